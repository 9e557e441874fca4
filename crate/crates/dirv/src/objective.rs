//! The variance objective that ranking construction minimizes.
//!
//! The estimate of a ranking's metric is a sum over its items of click
//! probability times item mean, so its sampling variance decomposes into
//! per-item contributions `phi`. Each contribution combines the uncertainty
//! of the click probability (shrinking with the item's impressions) with
//! the uncertainty of the item's mean (shrinking with its clicks). Showing
//! an item buys future impressions and expected clicks, so candidate
//! rankings are scored by what the total variance across all input rankings
//! would look like after those counts arrive; the interleaving policy picks
//! the candidate that minimizes it.
//!
//! A second objective term scores per-ranking counts the same way, which
//! pushes the policy to occasionally show an input ranking verbatim; those
//! verbatim impressions feed the model-agnostic correction in the
//! estimator.

use std::collections::BTreeMap;

use crate::clickmodel::{self, ClickModelKind};
use crate::error::{Error, Result};
use crate::estimator;
use crate::types::{ExperimentState, ItemId, Ranking, RankingSet};

/// Ceiling for a variance contribution evaluated at zero samples: large
/// enough to dominate any realistic finite value, finite so that candidate
/// comparisons never involve infinities or NaNs.
pub const PHI_CAP: f64 = 1e12;

/// Inputs to one item's variance contribution within one ranking. Counts
/// are real numbers because candidate evaluation feeds fractional expected
/// clicks through them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiInputs {
    /// Estimated probability of a click on the item in this ranking.
    pub p_click: f64,
    /// Estimated mean post-click value of the item.
    pub mean_x: f64,
    /// Estimated (clipped) variance of the item's post-click value.
    pub var_x: f64,
    /// Impressions of the item.
    pub n_impr: f64,
    /// Clicks on the item.
    pub n_click: f64,
}

/// Variance contributed by one item to one ranking's estimate, treating the
/// click probability as estimated from `n_impr` samples and the mean from
/// `n_click` samples:
///
/// ```text
/// p(1-p)/n_impr * v/n_click  +  p^2 * v/n_click  +  m^2 * p(1-p)/n_impr
/// ```
///
/// A term with zero numerator contributes nothing even at zero counts; a
/// positive term over a zero count is capped at [`PHI_CAP`].
pub fn phi(inputs: &PhiInputs) -> f64 {
    let p = inputs.p_click.clamp(0.0, 1.0);
    let spread = p * (1.0 - p);
    let joint = term(spread * inputs.var_x, inputs.n_impr * inputs.n_click);
    let mean_part = term(p * p * inputs.var_x, inputs.n_click);
    let click_part = term(inputs.mean_x * inputs.mean_x * spread, inputs.n_impr);
    (joint + mean_part + click_part).min(PHI_CAP)
}

fn term(numerator: f64, denominator: f64) -> f64 {
    if numerator == 0.0 {
        0.0
    } else if denominator == 0.0 {
        PHI_CAP
    } else {
        numerator / denominator
    }
}

// ── Objective evaluation over the experiment state ────────────────────────

/// Estimator configuration shared by objective evaluation and metric
/// estimation.
#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub click_model: ClickModelKind,
    pub attraction_prior: f64,
    /// Blend model click probabilities toward per-ranking click-through
    /// rates (and enable the verbatim-presentation objective term).
    pub error_correction: bool,
}

/// A consistent snapshot of everything the objectives need, computed once
/// per impression: attraction / mean / variance estimates per item, click
/// probabilities per input-ranking position, and each position's variance
/// contribution at the current counts.
pub struct Evaluator<'a> {
    set: &'a RankingSet,
    state: &'a ExperimentState,
    settings: &'a EvalSettings,
    attraction: BTreeMap<ItemId, f64>,
    mean: BTreeMap<ItemId, f64>,
    variance: BTreeMap<ItemId, f64>,
    /// Pure click-model probability per (ranking, position).
    model_click: Vec<Vec<f64>>,
    /// Probability fed into `phi` per (ranking, position): blended when
    /// error correction is on, otherwise the model probability.
    phi_p: Vec<Vec<f64>>,
    /// `phi` at the current counts per (ranking, position).
    current_phi: Vec<Vec<f64>>,
    /// Where each item appears: (ranking index, position).
    occurrences: BTreeMap<ItemId, Vec<(usize, usize)>>,
}

impl<'a> Evaluator<'a> {
    /// `predicted_variance` holds the per-item predictions that clip the
    /// observed variances from below; items absent from the map predict 0.
    pub fn new(
        set: &'a RankingSet,
        state: &'a ExperimentState,
        settings: &'a EvalSettings,
        predicted_variance: &BTreeMap<ItemId, f64>,
    ) -> Result<Self> {
        let attraction = estimator::attraction_estimates(state, settings.attraction_prior);
        let mut mean = BTreeMap::new();
        let mut variance = BTreeMap::new();
        for &d in set.universe() {
            let stats = state.item(d);
            mean.insert(d, estimator::item_mean(&stats).value);
            let predicted = predicted_variance.get(&d).copied().unwrap_or(0.0);
            variance
                .insert(d, estimator::clipped_variance(estimator::item_variance(&stats), predicted));
        }

        let mut model_click = Vec::with_capacity(set.len());
        let mut phi_p = Vec::with_capacity(set.len());
        let mut occurrences: BTreeMap<ItemId, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, ranking) in set.rankings().iter().enumerate() {
            let clicks = clickmodel::click_probs(ranking, &attraction, &settings.click_model)?;
            let mut blended = Vec::with_capacity(clicks.len());
            for (pos, (&d, &model_p)) in ranking.items().iter().zip(&clicks).enumerate() {
                occurrences.entry(d).or_default().push((i, pos));
                if settings.error_correction {
                    let ctr = estimator::model_agnostic_ctr(state, set, i, d)?.value;
                    blended.push(estimator::blended_click_prob(
                        model_p,
                        ctr,
                        state.per_ranking(i).n_impr,
                    ));
                } else {
                    blended.push(model_p);
                }
            }
            model_click.push(clicks);
            phi_p.push(blended);
        }

        let mut ev = Evaluator {
            set,
            state,
            settings,
            attraction,
            mean,
            variance,
            model_click,
            phi_p,
            current_phi: Vec::new(),
            occurrences,
        };
        ev.current_phi = (0..set.len())
            .map(|i| {
                let ranking = &set.rankings()[i];
                (0..ranking.depth())
                    .map(|pos| {
                        let stats = state.item(ranking.items()[pos]);
                        phi(&ev.phi_inputs(i, pos, stats.n_impr as f64, stats.n_click as f64))
                    })
                    .collect()
            })
            .collect();
        Ok(ev)
    }

    pub fn set(&self) -> &RankingSet {
        self.set
    }

    fn phi_inputs(&self, i: usize, pos: usize, n_impr: f64, n_click: f64) -> PhiInputs {
        let d = self.set.rankings()[i].items()[pos];
        PhiInputs {
            p_click: self.phi_p[i][pos],
            mean_x: self.mean[&d],
            var_x: self.variance[&d],
            n_impr,
            n_click,
        }
    }

    /// Variance of input ranking `index`'s estimate at the current counts:
    /// the sum of its positions' contributions.
    pub fn ranking_variance(&self, index: usize) -> f64 {
        self.current_phi[index].iter().sum()
    }

    /// Total variance across all input rankings at the current counts.
    pub fn total_variance(&self) -> f64 {
        (0..self.set.len()).map(|i| self.ranking_variance(i)).sum()
    }

    /// Expected click probability per position of an arbitrary candidate
    /// ranking, under the pure click model.
    pub fn expected_clicks(&self, candidate: &Ranking) -> Result<Vec<f64>> {
        clickmodel::click_probs(candidate, &self.attraction, &self.settings.click_model)
    }

    /// Total variance across input rankings after a hypothetical impression
    /// of `candidate`: every shown item is credited one impression and its
    /// expected clicks, everything else keeps its current contribution.
    pub fn f_objective(&self, candidate: &Ranking) -> Result<f64> {
        let clicks = self.expected_clicks(candidate)?;
        let shown: BTreeMap<ItemId, f64> =
            candidate.items().iter().copied().zip(clicks).collect();
        let mut total = 0.0;
        for (i, ranking) in self.set.rankings().iter().enumerate() {
            for (pos, &d) in ranking.items().iter().enumerate() {
                total += match shown.get(&d) {
                    Some(&expected_click) => {
                        let stats = self.state.item(d);
                        phi(&self.phi_inputs(
                            i,
                            pos,
                            stats.n_impr as f64 + 1.0,
                            stats.n_click as f64 + expected_click,
                        ))
                    }
                    None => self.current_phi[i][pos],
                };
            }
        }
        Ok(total)
    }

    /// Probability that the position right after `prefix` is examined.
    fn examination_after(&self, prefix: &[ItemId]) -> Result<f64> {
        match &self.settings.click_model {
            ClickModelKind::Cascade => {
                let mut exam = 1.0;
                for &d in prefix {
                    let a = self
                        .attraction
                        .get(&d)
                        .copied()
                        .ok_or(Error::UnknownItem(d))?;
                    exam *= 1.0 - exam * a;
                }
                Ok(exam)
            }
            ClickModelKind::PositionBased { position_probs } => {
                // Examination here depends on rank alone.
                Ok(position_probs.get(prefix.len()).copied().unwrap_or(0.0))
            }
        }
    }

    /// Reduction of the total variance from appending `d` after `prefix`:
    /// the item's contributions at current counts minus its contributions
    /// after one more impression and the expected click at that slot.
    pub fn greedy_gain(&self, d: ItemId, prefix: &[ItemId]) -> Result<f64> {
        if prefix.contains(&d) {
            return Err(Error::InvalidValue(format!(
                "item {d} is already in the ranking prefix"
            )));
        }
        let attraction =
            self.attraction.get(&d).copied().ok_or(Error::UnknownItem(d))?;
        let expected_click = self.examination_after(prefix)? * attraction;
        let stats = self.state.item(d);
        let mut gain = 0.0;
        for &(i, pos) in self.occurrences.get(&d).into_iter().flatten() {
            let updated = phi(&self.phi_inputs(
                i,
                pos,
                stats.n_impr as f64 + 1.0,
                stats.n_click as f64 + expected_click,
            ));
            gain += self.current_phi[i][pos] - updated;
        }
        Ok(gain)
    }

    /// Per-ranking analogue of [`f_objective`], driving verbatim
    /// presentations: each input ranking's positions are scored with that
    /// ranking's own impression and click counts, weighted by the blend
    /// weight so the pressure fades as verbatim data accumulates. Counts
    /// enter with add-one smoothing to stay finite at zero. Only an exact
    /// (position-by-position) match receives the hypothetical impression.
    pub fn g_objective(&self, candidate: &Ranking) -> Result<f64> {
        let matched = self.set.position_match(candidate);
        let mut total = 0.0;
        for (i, ranking) in self.set.rankings().iter().enumerate() {
            let prs = self.state.per_ranking(i);
            let theta = estimator::blend_weight(prs.n_impr);
            let hit = matched == Some(i);
            let n_impr = prs.n_impr as f64 + f64::from(hit) + 1.0;
            let mut sum = 0.0;
            for (pos, &d) in ranking.items().iter().enumerate() {
                let expected_click = if hit { self.model_click[i][pos] } else { 0.0 };
                let n_click = prs.clicks_on(d) as f64 + expected_click + 1.0;
                sum += phi(&self.phi_inputs(i, pos, n_impr, n_click));
            }
            total += theta * sum;
        }
        Ok(total)
    }
}
