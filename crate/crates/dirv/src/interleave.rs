//! Ranking construction policies: the variance-minimizing interleaver, a
//! team-draft multileaver, and a uniform A/B arm.
//!
//! The variance-minimizing policy builds a candidate greedily, one position
//! at a time, always appending the item whose hypothetical impression
//! removes the most variance from the input rankings' estimates. The final
//! choice then compares that candidate against presenting an input ranking
//! verbatim, using the combined objective.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::objective::Evaluator;
use crate::types::{Estimate, ImpressionRecord, ItemId, PerRankingStats, PreferenceMatrix, Ranking, RankingSet};

// ── Variance-minimizing interleaving ──────────────────────────────────────

/// Builds a ranking of `depth` items by repeatedly appending the item with
/// the largest variance reduction given the prefix built so far. Ties break
/// toward the smallest item id.
pub fn dirv_greedy(ev: &Evaluator, depth: usize) -> Result<Ranking> {
    let universe = ev.set().universe();
    if depth > universe.len() {
        return Err(Error::Config(format!(
            "ranking depth {depth} exceeds the {} distinct items available",
            universe.len()
        )));
    }
    let mut chosen: Vec<ItemId> = Vec::with_capacity(depth);
    for _ in 0..depth {
        let mut best: Option<(ItemId, f64)> = None;
        for &d in universe.iter() {
            if chosen.contains(&d) {
                continue;
            }
            let gain = ev.greedy_gain(d, &chosen)?;
            if best.is_none_or(|(_, best_gain)| gain > best_gain) {
                best = Some((d, gain));
            }
        }
        chosen.push(best.expect("depth <= universe size").0);
    }
    Ranking::new(chosen)
}

/// Picks what to present: the greedy candidate or one of the input rankings
/// verbatim, whichever minimizes the combined objective `f + gamma * g`.
/// With `gamma == 0` the correction term is skipped entirely. Ties keep the
/// earliest candidate, i.e. the greedy ranking, then input rankings in
/// order.
pub fn dirv_select(ev: &Evaluator, gamma: f64, depth: usize) -> Result<Ranking> {
    let mut candidates = Vec::with_capacity(1 + ev.set().len());
    candidates.push(dirv_greedy(ev, depth)?);
    candidates.extend(ev.set().rankings().iter().cloned());
    select_min(ev, gamma, candidates)
}

/// Replay variant: the choice is restricted to rankings that still have
/// logged impressions, so no greedy candidate is constructed.
pub fn dirv_select_from_pool(ev: &Evaluator, gamma: f64, pool: &[Ranking]) -> Result<Ranking> {
    if pool.is_empty() {
        return Err(Error::InvalidValue("empty candidate pool".into()));
    }
    select_min(ev, gamma, pool.to_vec())
}

fn select_min(ev: &Evaluator, gamma: f64, mut candidates: Vec<Ranking>) -> Result<Ranking> {
    let mut best: Option<(usize, f64)> = None;
    for (k, candidate) in candidates.iter().enumerate() {
        let mut value = ev.f_objective(candidate)?;
        if gamma != 0.0 {
            value += gamma * ev.g_objective(candidate)?;
        }
        if best.is_none_or(|(_, best_value)| value < best_value) {
            best = Some((k, value));
        }
    }
    let (index, _) = best.expect("candidate list is non-empty");
    Ok(candidates.swap_remove(index))
}

// ── Team-draft multileaving ───────────────────────────────────────────────

/// A multileaved ranking plus, per position, the index of the input ranking
/// whose draft pick filled it.
#[derive(Debug, Clone, PartialEq)]
pub struct TdmInterleaved {
    pub ranking: Ranking,
    pub team_of_position: Vec<usize>,
}

/// Team-draft multileaving: teams draft in a fresh random order each round,
/// each contributing its highest-ranked item not yet placed. Stops at
/// `depth` positions or when no team can contribute.
pub fn tdm_interleave(
    set: &RankingSet,
    depth: usize,
    rng: &mut impl Rng,
) -> Result<TdmInterleaved> {
    let mut placed: Vec<ItemId> = Vec::with_capacity(depth);
    let mut team_of_position = Vec::with_capacity(depth);
    let mut next_pick = vec![0usize; set.len()];
    let mut order: Vec<usize> = (0..set.len()).collect();

    while placed.len() < depth {
        order.shuffle(rng);
        let mut progressed = false;
        for &team in &order {
            if placed.len() == depth {
                break;
            }
            let items = set.rankings()[team].items();
            while next_pick[team] < items.len() && placed.contains(&items[next_pick[team]]) {
                next_pick[team] += 1;
            }
            if next_pick[team] < items.len() {
                placed.push(items[next_pick[team]]);
                team_of_position.push(team);
                next_pick[team] += 1;
                progressed = true;
            }
        }
        if !progressed {
            break; // every team exhausted
        }
    }
    Ok(TdmInterleaved { ranking: Ranking::new(placed)?, team_of_position })
}

/// Post-click credit per team for one impression of a multileaved ranking:
/// each click pays its observed post-click value to the team that owns the
/// clicked position. (Plain team-draft scoring would pay 1 per click; using
/// the value instead is what makes the comparison about the post-click
/// metric.)
pub fn tdm_credit(record: &ImpressionRecord, interleaved: &TdmInterleaved, num_teams: usize) -> Vec<f64> {
    let mut credit = vec![0.0; num_teams];
    for (pos, &clicked) in record.clicks().iter().enumerate() {
        if clicked {
            let x = record.post_click()[pos].expect("validated on construction");
            credit[interleaved.team_of_position[pos]] += x;
        }
    }
    credit
}

/// Cumulative pairwise win counts across impressions. A team wins an
/// impression against another when its credit is strictly larger.
#[derive(Debug, Clone)]
pub struct TdmTally {
    wins: Vec<Vec<f64>>,
}

impl TdmTally {
    pub fn new(num_teams: usize) -> Self {
        TdmTally { wins: vec![vec![0.0; num_teams]; num_teams] }
    }

    pub fn record(&mut self, credit: &[f64]) {
        debug_assert_eq!(credit.len(), self.wins.len());
        for i in 0..credit.len() {
            for j in 0..credit.len() {
                if credit[i] > credit[j] {
                    self.wins[i][j] += 1.0;
                }
            }
        }
    }

    /// Preference as the difference of win counts, antisymmetric by
    /// construction.
    pub fn preference_matrix(&self) -> PreferenceMatrix {
        let n = self.wins.len();
        let values = (0..n)
            .map(|i| (0..n).map(|j| self.wins[i][j] - self.wins[j][i]).collect())
            .collect();
        PreferenceMatrix::new(values).expect("win differences are antisymmetric")
    }
}

// ── A/B presentation ──────────────────────────────────────────────────────

/// Uniform choice among candidate rankings; returns the chosen index.
pub fn ab_select(rankings: &[Ranking], rng: &mut impl Rng) -> Result<usize> {
    if rankings.is_empty() {
        return Err(Error::InvalidValue("no rankings to choose from".into()));
    }
    Ok(rng.gen_range(0..rankings.len()))
}

/// The A/B estimate of a ranking's metric: total post-click value observed
/// during its verbatim impressions, per impression. Cold until the ranking
/// has been shown at least once.
pub fn ab_estimate(prs: &PerRankingStats) -> Estimate {
    if prs.n_impr == 0 {
        return Estimate::cold(0.0);
    }
    Estimate::warm(prs.sum_x / prs.n_impr as f64)
}
