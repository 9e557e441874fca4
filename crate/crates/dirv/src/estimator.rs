//! Post-click metric estimation: per-item means and variances, predicted
//! variances for items with little data, and the decomposition of a
//! ranking's expected metric into per-item click probabilities times
//! per-item means.
//!
//! The decomposition is what lets observations be shared across rankings: a
//! click on an item teaches us about that item's post-click value no matter
//! which ranking produced the click. Two stabilizers are layered on top:
//! clipping the observed variance from below by a prediction, and blending
//! the model-based click probability with a per-ranking click-through rate
//! so that systematic click-model errors wash out as a ranking accumulates
//! impressions of its own.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::clickmodel::{self, ClickModelKind};
use crate::error::{Error, Result};
use crate::types::{Estimate, ExperimentState, ItemId, ItemStats, Ranking, RankingSet};

/// Mean post-click value of one item: total observed value per click.
/// Returns 0 flagged cold until the first click.
pub fn item_mean(stats: &ItemStats) -> Estimate {
    if stats.n_click == 0 {
        return Estimate::cold(0.0);
    }
    Estimate::warm(stats.sum_x / stats.n_click as f64)
}

/// Unbiased sample variance of one item's post-click values, or `None`
/// while fewer than two clicks have been observed. Tiny negative values from
/// floating-point cancellation are clamped to zero.
pub fn item_variance(stats: &ItemStats) -> Option<f64> {
    if stats.n_click < 2 {
        return None;
    }
    let n = stats.n_click as f64;
    let centered = stats.sum_x2 - stats.sum_x * stats.sum_x / n;
    Some((centered / (n - 1.0)).max(0.0))
}

/// Variance clipped from below by a prediction: the observed sample variance
/// starts at zero with few samples, which would starve exactly the items
/// that most need exposure, so the working value is never allowed below the
/// predicted one.
pub fn clipped_variance(observed: Option<f64>, predicted: f64) -> f64 {
    match observed {
        Some(v) => v.max(predicted),
        None => predicted,
    }
}

// ── Variance prediction ───────────────────────────────────────────────────

/// Source of predicted per-item variances used before observations accrue.
#[derive(Debug, Clone, PartialEq)]
pub enum VariancePredictor {
    /// Stand-in for a trained regressor in simulation: a uniform draw on
    /// `[0, 2v]` around the true variance `v`, so predictions are noisy but
    /// right on average.
    OracleNoise,
    /// The same prediction for every item.
    Constant(f64),
    /// Per-item predictions from a table; absent items predict 0.
    Table(BTreeMap<ItemId, f64>),
}

impl VariancePredictor {
    /// Predicted variance for one item. `true_variance` feeds the oracle
    /// predictor and must be supplied in simulation; replay has no ground
    /// truth, so configuring the oracle there is rejected.
    pub fn predict(
        &self,
        item: ItemId,
        true_variance: Option<f64>,
        rng: &mut impl Rng,
    ) -> Result<f64> {
        match self {
            VariancePredictor::OracleNoise => {
                let v = true_variance.ok_or_else(|| {
                    Error::Config(
                        "the oracle-noise variance predictor needs ground truth and is only \
                         available in simulation"
                            .into(),
                    )
                })?;
                if v <= 0.0 {
                    return Ok(0.0);
                }
                Ok(rng.gen_range(0.0..2.0 * v))
            }
            VariancePredictor::Constant(v) => Ok(*v),
            VariancePredictor::Table(table) => Ok(table.get(&item).copied().unwrap_or(0.0)),
        }
    }

    /// Loads a table predictor from a two-column CSV (`item_id,
    /// predicted_variance`, header optional).
    pub fn table_from_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut table = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let id = fields.next().unwrap_or("");
            if lineno == 0 && id.parse::<u64>().is_err() {
                continue; // header row
            }
            let id: u64 = id.parse().map_err(|_| {
                Error::data(path, format!("line {}: bad item id {id:?}", lineno + 1))
            })?;
            let value: f64 = fields
                .next()
                .ok_or_else(|| Error::data(path, format!("line {}: missing variance", lineno + 1)))?
                .parse()
                .map_err(|_| Error::data(path, format!("line {}: bad variance", lineno + 1)))?;
            if value < 0.0 || !value.is_finite() {
                return Err(Error::data(
                    path,
                    format!("line {}: variance must be a nonnegative number", lineno + 1),
                ));
            }
            table.insert(ItemId(id), value);
        }
        Ok(VariancePredictor::Table(table))
    }
}

// ── Model-agnostic correction ─────────────────────────────────────────────

/// Click-through rate of `item` within verbatim impressions of input
/// ranking `index`: clicks on the item there per impression of the ranking.
/// Makes no click-model assumption at all, which is the point — it is the
/// correction target when the model is systematically wrong.
pub fn model_agnostic_ctr(
    state: &ExperimentState,
    set: &RankingSet,
    index: usize,
    item: ItemId,
) -> Result<Estimate> {
    if !set.rankings()[index].contains(item) {
        return Err(Error::ItemNotInRanking { item, ranking: index });
    }
    let prs = state.per_ranking(index);
    if prs.n_impr == 0 {
        return Ok(Estimate::cold(0.0));
    }
    Ok(Estimate::warm(prs.clicks_on(item) as f64 / prs.n_impr as f64))
}

/// Weight of the model-based click probability in the blend: starts at 1
/// and decays as the ranking accumulates verbatim impressions, handing over
/// to the model-agnostic rate.
pub fn blend_weight(n_impr_ranking: u64) -> f64 {
    1.0 / ((n_impr_ranking as f64 + 1.0).sqrt())
}

/// Blend of the model click probability and the per-ranking click-through
/// rate, weighted by how much verbatim data the ranking has.
pub fn blended_click_prob(model_prob: f64, ctr: f64, n_impr_ranking: u64) -> f64 {
    let theta = blend_weight(n_impr_ranking);
    theta * model_prob + (1.0 - theta) * ctr
}

// ── Ranking-level estimate ────────────────────────────────────────────────

/// Attraction estimates for every known item, as the click models consume
/// them.
pub fn attraction_estimates(state: &ExperimentState, prior: f64) -> BTreeMap<ItemId, f64> {
    state
        .items()
        .iter()
        .map(|(&d, stats)| (d, clickmodel::estimate_attraction(stats, prior).value))
        .collect()
}

/// Estimated expected post-click metric of a ranking, decomposed as the sum
/// over positions of estimated click probability times estimated item mean.
pub fn ranking_metric_estimate(
    ranking: &Ranking,
    state: &ExperimentState,
    kind: &ClickModelKind,
    attraction_prior: f64,
) -> Result<f64> {
    let attraction = attraction_estimates(state, attraction_prior);
    let clicks = clickmodel::click_probs(ranking, &attraction, kind)?;
    Ok(ranking
        .items()
        .iter()
        .zip(clicks)
        .map(|(&d, p)| p * item_mean(&state.item(d)).value)
        .sum())
}

/// Like [`ranking_metric_estimate`] for input ranking `index`, but with each
/// position's click probability blended toward that ranking's own
/// click-through rates. With zero verbatim impressions the blend weight is 1
/// and this reduces to the pure model estimate.
pub fn corrected_ranking_metric_estimate(
    set: &RankingSet,
    state: &ExperimentState,
    index: usize,
    kind: &ClickModelKind,
    attraction_prior: f64,
) -> Result<f64> {
    let ranking = &set.rankings()[index];
    let attraction = attraction_estimates(state, attraction_prior);
    let clicks = clickmodel::click_probs(ranking, &attraction, kind)?;
    let n = state.per_ranking(index).n_impr;
    let mut total = 0.0;
    for (&d, model_p) in ranking.items().iter().zip(clicks) {
        let ctr = model_agnostic_ctr(state, set, index, d)?.value;
        total += blended_click_prob(model_p, ctr, n) * item_mean(&state.item(d)).value;
    }
    Ok(total)
}
