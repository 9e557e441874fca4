//! Shared data model: items, rankings, observation counters, and the
//! mutable experiment state that every policy reads from and writes to.
//!
//! All counters live here so that estimation and ranking construction stay
//! pure functions over one state value. Iteration is over `BTreeMap`s
//! keyed by [`ItemId`] to keep every downstream computation deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Opaque integer identifier for a rankable item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u64);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

// ── Rankings ──────────────────────────────────────────────────────────────

/// An ordered list of distinct items. Two rankings are equal only when they
/// agree position by position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ranking {
    items: Vec<ItemId>,
}

impl Ranking {
    /// Builds a ranking, rejecting repeated items.
    pub fn new(items: Vec<ItemId>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &item in &items {
            if !seen.insert(item) {
                return Err(Error::DuplicateItem(item));
            }
        }
        Ok(Ranking { items })
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn depth(&self) -> usize {
        self.items.len()
    }

    /// Zero-based position of `item`, if present.
    pub fn position_of(&self, item: ItemId) -> Option<usize> {
        self.items.iter().position(|&d| d == item)
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.items.contains(&item)
    }
}

/// The fixed set of input rankings under comparison, plus the universe of
/// items they mention.
#[derive(Debug, Clone)]
pub struct RankingSet {
    rankings: Vec<Ranking>,
    universe: BTreeSet<ItemId>,
}

impl RankingSet {
    /// Builds a set from at least two rankings. Rankings may share items or
    /// even be identical; the universe is the union of their items.
    pub fn new(rankings: Vec<Ranking>) -> Result<Self> {
        if rankings.len() < 2 {
            return Err(Error::TooFewRankings(rankings.len()));
        }
        let universe = rankings
            .iter()
            .flat_map(|r| r.items().iter().copied())
            .collect();
        Ok(RankingSet { rankings, universe })
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn universe(&self) -> &BTreeSet<ItemId> {
        &self.universe
    }

    /// Index of the input ranking that `presented` matches position by
    /// position, if any.
    pub fn position_match(&self, presented: &Ranking) -> Option<usize> {
        self.rankings.iter().position(|r| r == presented)
    }
}

// ── Observation counters ──────────────────────────────────────────────────

/// Lifetime counters for one item, accumulated across every impression in
/// which the item appeared, regardless of which ranking was presented.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ItemStats {
    /// Impressions that included the item anywhere.
    pub n_impr: u64,
    /// Impressions in which the item is believed to have been examined.
    pub n_exam: u64,
    /// Clicks on the item.
    pub n_click: u64,
    /// Sum of post-click values observed after clicks on the item.
    pub sum_x: f64,
    /// Sum of squared post-click values (for the running variance).
    pub sum_x2: f64,
}

/// Counters tied to one input ranking, updated only when that exact ranking
/// was presented.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerRankingStats {
    /// Times this input ranking was shown verbatim.
    pub n_impr: u64,
    /// Clicks per item during those verbatim impressions.
    pub n_click: BTreeMap<ItemId, u64>,
    /// Total post-click value observed during those verbatim impressions.
    pub sum_x: f64,
}

impl PerRankingStats {
    pub fn clicks_on(&self, item: ItemId) -> u64 {
        self.n_click.get(&item).copied().unwrap_or(0)
    }
}

// ── Impressions ───────────────────────────────────────────────────────────

/// One presented ranking together with the user's response: a click flag per
/// position and, for clicked positions only, an observed post-click value.
#[derive(Debug, Clone)]
pub struct ImpressionRecord {
    ranking: Ranking,
    clicks: Vec<bool>,
    post_click: Vec<Option<f64>>,
}

impl ImpressionRecord {
    /// Validates alignment: one click flag per position, a post-click value
    /// exactly where a click happened, and nonnegative values.
    pub fn new(ranking: Ranking, clicks: Vec<bool>, post_click: Vec<Option<f64>>) -> Result<Self> {
        if clicks.len() != ranking.depth() || post_click.len() != ranking.depth() {
            return Err(Error::MalformedRecord(format!(
                "ranking has {} positions but got {} click flags and {} post-click values",
                ranking.depth(),
                clicks.len(),
                post_click.len()
            )));
        }
        for (pos, (&clicked, value)) in clicks.iter().zip(&post_click).enumerate() {
            match (clicked, value) {
                (true, Some(x)) if *x >= 0.0 && x.is_finite() => {}
                (true, Some(x)) => {
                    return Err(Error::MalformedRecord(format!(
                        "post-click value {x} at position {} is not a nonnegative finite number",
                        pos + 1
                    )));
                }
                (true, None) => {
                    return Err(Error::MalformedRecord(format!(
                        "click at position {} has no post-click value",
                        pos + 1
                    )));
                }
                (false, Some(_)) => {
                    return Err(Error::MalformedRecord(format!(
                        "post-click value without a click at position {}",
                        pos + 1
                    )));
                }
                (false, None) => {}
            }
        }
        Ok(ImpressionRecord { ranking, clicks, post_click })
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn clicks(&self) -> &[bool] {
        &self.clicks
    }

    pub fn post_click(&self) -> &[Option<f64>] {
        &self.post_click
    }

    /// Position (zero-based) of the last click, if any.
    pub fn last_click_position(&self) -> Option<usize> {
        self.clicks.iter().rposition(|&c| c)
    }

    /// Total post-click value across all clicks in this impression.
    pub fn total_post_click(&self) -> f64 {
        self.post_click.iter().flatten().sum()
    }
}

// ── Experiment state ──────────────────────────────────────────────────────

/// All counters accumulated during one experiment run: per-item lifetime
/// stats plus per-input-ranking stats aligned with a [`RankingSet`].
#[derive(Debug, Clone)]
pub struct ExperimentState {
    items: BTreeMap<ItemId, ItemStats>,
    per_ranking: Vec<PerRankingStats>,
}

impl ExperimentState {
    /// Fresh state with zeroed counters for every item in the set's universe.
    pub fn new(set: &RankingSet) -> Self {
        let items = set
            .universe()
            .iter()
            .map(|&d| (d, ItemStats::default()))
            .collect();
        let per_ranking = vec![PerRankingStats::default(); set.len()];
        ExperimentState { items, per_ranking }
    }

    pub fn item(&self, item: ItemId) -> ItemStats {
        self.items.get(&item).copied().unwrap_or_default()
    }

    pub fn items(&self) -> &BTreeMap<ItemId, ItemStats> {
        &self.items
    }

    pub fn item_mut(&mut self, item: ItemId) -> &mut ItemStats {
        self.items.entry(item).or_default()
    }

    pub fn per_ranking(&self, index: usize) -> &PerRankingStats {
        &self.per_ranking[index]
    }

    /// Folds one impression into the counters: every shown item gets an
    /// impression, clicked items get a click and the observed value, and if
    /// the presented ranking is one of the input rankings (position by
    /// position), that ranking's own counters are updated too. Examination
    /// counters are handled separately by the click model.
    pub fn record_impression(&mut self, set: &RankingSet, record: &ImpressionRecord) {
        for (pos, &item) in record.ranking().items().iter().enumerate() {
            let stats = self.items.entry(item).or_default();
            stats.n_impr += 1;
            if record.clicks()[pos] {
                let x = record.post_click()[pos].expect("validated on construction");
                stats.n_click += 1;
                stats.sum_x += x;
                stats.sum_x2 += x * x;
            }
        }
        if let Some(index) = set.position_match(record.ranking()) {
            let prs = &mut self.per_ranking[index];
            prs.n_impr += 1;
            prs.sum_x += record.total_post_click();
            for (pos, &item) in record.ranking().items().iter().enumerate() {
                if record.clicks()[pos] {
                    *prs.n_click.entry(item).or_default() += 1;
                }
            }
        }
    }
}

/// A point estimate plus a flag marking that no data backed it and a
/// configured prior was returned instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub cold_start: bool,
}

impl Estimate {
    pub fn warm(value: f64) -> Self {
        Estimate { value, cold_start: false }
    }

    pub fn cold(prior: f64) -> Self {
        Estimate { value: prior, cold_start: true }
    }
}

// ── Preference matrices ───────────────────────────────────────────────────

/// Antisymmetric matrix of pairwise preferences between the input rankings:
/// entry `(i, j)` is positive when ranking `i` is preferred over ranking `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    values: Vec<Vec<f64>>,
}

impl PreferenceMatrix {
    /// Builds from raw entries, checking squareness, a zero diagonal, and
    /// exact antisymmetry.
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidMatrix(format!("entry ({i}, {j}) is {v}")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidMatrix(format!("diagonal entry ({i}, {i}) is {v}")));
                }
                if values[j][i] != -v {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({i}, {j}) and ({j}, {i}) are not antisymmetric"
                    )));
                }
            }
        }
        Ok(PreferenceMatrix { values })
    }

    /// Builds `(i, j) = score[i] - score[j]`, which is antisymmetric by
    /// construction.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        for (i, s) in scores.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::InvalidMatrix(format!("score {i} is {s}")));
            }
        }
        let n = scores.len();
        let values = (0..n)
            .map(|i| (0..n).map(|j| scores[i] - scores[j]).collect())
            .collect();
        Ok(PreferenceMatrix { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}
