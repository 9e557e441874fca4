//! Synthetic worlds and user behavior for simulation: item ground truth,
//! dataset generators, input-ranking construction, and closed-form ground
//! truth for scoring the estimates.
//!
//! The simulated user and the estimation-side click model are deliberately
//! separate types: experiments probe what happens when the estimator's
//! model does not match how users actually behave.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::types::{ImpressionRecord, ItemId, PreferenceMatrix, Ranking, RankingSet};

// ── Ground-truth items ────────────────────────────────────────────────────

/// Distribution of the value observed after a click.
#[derive(Debug, Clone, PartialEq)]
pub enum PostClickDist {
    /// E.g. dwell time: exponential with the given mean.
    Exponential { mean: f64 },
    /// E.g. revenue: `value` with probability `rate`, otherwise 0.
    ScaledBernoulli { rate: f64, value: f64 },
}

impl PostClickDist {
    pub fn mean(&self) -> f64 {
        match self {
            PostClickDist::Exponential { mean } => *mean,
            PostClickDist::ScaledBernoulli { rate, value } => rate * value,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            PostClickDist::Exponential { mean } => mean * mean,
            PostClickDist::ScaledBernoulli { rate, value } => value * value * rate * (1.0 - rate),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            PostClickDist::Exponential { mean } => {
                if *mean <= 0.0 {
                    0.0
                } else {
                    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
                }
            }
            PostClickDist::ScaledBernoulli { rate, value } => {
                if rng.gen::<f64>() < *rate {
                    *value
                } else {
                    0.0
                }
            }
        }
    }
}

/// True parameters of one item.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemTruth {
    /// Probability of a click given examination.
    pub attraction: f64,
    pub post_click: PostClickDist,
    /// Overrides the distribution's variance when the data source reports
    /// its own (the news-style table does).
    pub variance_override: Option<f64>,
}

/// Ground truth for every item in a simulated experiment.
#[derive(Debug, Clone, Default)]
pub struct World {
    items: BTreeMap<ItemId, ItemTruth>,
}

impl World {
    pub fn new(items: BTreeMap<ItemId, ItemTruth>) -> Self {
        World { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.items.keys().copied()
    }

    pub fn truth(&self, item: ItemId) -> Result<&ItemTruth> {
        self.items.get(&item).ok_or(Error::UnknownItem(item))
    }

    pub fn attraction(&self, item: ItemId) -> Result<f64> {
        Ok(self.truth(item)?.attraction)
    }

    pub fn mean(&self, item: ItemId) -> Result<f64> {
        Ok(self.truth(item)?.post_click.mean())
    }

    pub fn variance(&self, item: ItemId) -> Result<f64> {
        let truth = self.truth(item)?;
        Ok(truth.variance_override.unwrap_or_else(|| truth.post_click.variance()))
    }
}

// ── User behavior ─────────────────────────────────────────────────────────

/// How the simulated user actually behaves (as opposed to what the
/// estimator assumes).
#[derive(Debug, Clone, PartialEq)]
pub enum UserBehaviorKind {
    /// Scans top-down, clicks at most once, leaves after the click.
    CascadeSim,
    /// Examines each rank independently with the given probability; can
    /// click any number of items. Ranks beyond the table are not examined.
    PositionBasedSim { position_probs: Vec<f64> },
}

impl UserBehaviorKind {
    pub fn validate(&self) -> Result<()> {
        if let UserBehaviorKind::PositionBasedSim { position_probs } = self {
            if position_probs.is_empty() {
                return Err(Error::InvalidValue(
                    "position-based behavior needs at least one examination probability".into(),
                ));
            }
            for (k, &p) in position_probs.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidValue(format!(
                        "behavior examination probability {p} at rank {} is outside [0, 1]",
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Simulates one user session over `ranking` and returns the resulting
/// impression record.
pub fn simulate_impression(
    ranking: &Ranking,
    world: &World,
    behavior: &UserBehaviorKind,
    rng: &mut impl Rng,
) -> Result<ImpressionRecord> {
    let depth = ranking.depth();
    let mut clicks = vec![false; depth];
    let mut post_click = vec![None; depth];
    match behavior {
        UserBehaviorKind::CascadeSim => {
            for (pos, &item) in ranking.items().iter().enumerate() {
                let truth = world.truth(item)?;
                if rng.gen::<f64>() < truth.attraction {
                    clicks[pos] = true;
                    post_click[pos] = Some(truth.post_click.sample(rng));
                    break; // the session ends with the click
                }
            }
        }
        UserBehaviorKind::PositionBasedSim { position_probs } => {
            for (pos, &item) in ranking.items().iter().enumerate() {
                let truth = world.truth(item)?;
                let examined = position_probs.get(pos).copied().unwrap_or(0.0);
                if rng.gen::<f64>() < examined && rng.gen::<f64>() < truth.attraction {
                    clicks[pos] = true;
                    post_click[pos] = Some(truth.post_click.sample(rng));
                }
            }
        }
    }
    ImpressionRecord::new(ranking.clone(), clicks, post_click)
}

// ── Dataset recipes ───────────────────────────────────────────────────────

/// E-commerce-style world: each item gets an attraction in [0, 0.5), a
/// price in [1, 1000), and a conversion rate in [0, 0.5); the post-click
/// value is the price when the click converts and 0 otherwise.
pub fn gen_ec_world(num_items: usize, rng: &mut impl Rng) -> World {
    let items = (0..num_items as u64)
        .map(|id| {
            let attraction = rng.gen_range(0.0..0.5);
            let price = rng.gen_range(1.0..1000.0);
            let rate = rng.gen_range(0.0..0.5);
            (
                ItemId(id),
                ItemTruth {
                    attraction,
                    post_click: PostClickDist::ScaledBernoulli { rate, value: price },
                    variance_override: None,
                },
            )
        })
        .collect();
    World::new(items)
}

/// Learning-to-rank-style world derived from graded relevance labels:
/// higher grades mean proportionally higher attraction (clamped to 1) and
/// longer exponential dwell times.
pub fn gen_letor_world(relevance: &BTreeMap<ItemId, u8>, rng: &mut impl Rng) -> Result<World> {
    let mut items = BTreeMap::new();
    for (&id, &label) in relevance {
        if label > 2 {
            return Err(Error::InvalidValue(format!(
                "relevance label {label} for item {id} is outside 0..=2"
            )));
        }
        let grade = (label + 1) as f64;
        let attraction = (grade * rng.gen_range(0.0..0.5)).min(1.0);
        let mean_dwell = grade * rng.gen_range(1.0..20.0);
        items.insert(
            id,
            ItemTruth {
                attraction,
                post_click: PostClickDist::Exponential { mean: mean_dwell },
                variance_override: None,
            },
        );
    }
    Ok(World::new(items))
}

/// Loads a relevance-label CSV (`item_id,relevance`, header optional) with
/// labels restricted to 0, 1, 2.
pub fn load_relevance_csv(path: &Path) -> Result<BTreeMap<ItemId, u8>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = BTreeMap::new();
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
        let id: u64 = id
            .parse()
            .map_err(|_| Error::data(path, format!("line {}: bad item id {id:?}", lineno + 1)))?;
        let label: u8 = fields
            .next()
            .ok_or_else(|| Error::data(path, format!("line {}: missing relevance", lineno + 1)))?
            .parse()
            .map_err(|_| Error::data(path, format!("line {}: bad relevance label", lineno + 1)))?;
        if label > 2 {
            return Err(Error::data(
                path,
                format!("line {}: relevance label {label} is outside 0..=2", lineno + 1),
            ));
        }
        labels.insert(ItemId(id), label);
    }
    if labels.is_empty() {
        return Err(Error::data(path, "no relevance rows"));
    }
    Ok(labels)
}

/// News-style world from a table of per-item attraction, mean dwell, and
/// dwell variance (`item_id,attraction,mean_dwell,var_dwell`). Dwell is
/// sampled as exponential around the mean, but the reported variance is
/// used wherever the true variance is consulted.
pub fn load_news_world_csv(path: &Path) -> Result<World> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut items = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && fields[0].parse::<u64>().is_err() {
            continue; // header row
        }
        if fields.len() != 4 {
            return Err(Error::data(
                path,
                format!("line {}: expected 4 columns, got {}", lineno + 1, fields.len()),
            ));
        }
        let id: u64 = fields[0]
            .parse()
            .map_err(|_| Error::data(path, format!("line {}: bad item id", lineno + 1)))?;
        let parse = |field: &str, name: &str| -> Result<f64> {
            field.parse().map_err(|_| {
                Error::data(path, format!("line {}: bad {name} value", lineno + 1))
            })
        };
        let attraction = parse(fields[1], "attraction")?;
        let mean_dwell = parse(fields[2], "mean_dwell")?;
        let var_dwell = parse(fields[3], "var_dwell")?;
        if !(0.0..=1.0).contains(&attraction) {
            return Err(Error::data(
                path,
                format!("line {}: attraction {attraction} is outside [0, 1]", lineno + 1),
            ));
        }
        if mean_dwell < 0.0 || var_dwell < 0.0 {
            return Err(Error::data(
                path,
                format!("line {}: dwell mean and variance must be nonnegative", lineno + 1),
            ));
        }
        items.insert(
            ItemId(id),
            ItemTruth {
                attraction,
                post_click: PostClickDist::Exponential { mean: mean_dwell },
                variance_override: Some(var_dwell),
            },
        );
    }
    if items.is_empty() {
        return Err(Error::data(path, "no item rows"));
    }
    Ok(World::new(items))
}

// ── Input-ranking construction ────────────────────────────────────────────

/// Builds input rankings sharing their `top_k` items: the `top_k` items
/// with the highest true attraction times mean value go into every ranking
/// (think "items with positive historical feedback"), the rest of each
/// ranking is a random draw from the remaining items, and the whole thing
/// is shuffled. `top_k / depth` is the fraction of overlap between any two
/// rankings.
pub fn gen_input_rankings(
    world: &World,
    num_rankings: usize,
    depth: usize,
    top_k: usize,
    rng: &mut impl Rng,
) -> Result<RankingSet> {
    if top_k > depth {
        return Err(Error::Config(format!(
            "shared top {top_k} cannot exceed the ranking depth {depth}"
        )));
    }
    if world.len() < depth {
        return Err(Error::Config(format!(
            "world has {} items, fewer than the ranking depth {depth}",
            world.len()
        )));
    }
    let mut scored: Vec<(ItemId, f64)> = world
        .ids()
        .map(|d| {
            let truth = world.truth(d).expect("own id");
            (d, truth.attraction * truth.post_click.mean())
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let shared: Vec<ItemId> = scored[..top_k].iter().map(|&(d, _)| d).collect();
    let rest: Vec<ItemId> = scored[top_k..].iter().map(|&(d, _)| d).collect();

    let mut rankings = Vec::with_capacity(num_rankings);
    for _ in 0..num_rankings {
        let mut items = shared.clone();
        items.extend(rest.choose_multiple(rng, depth - top_k).copied());
        items.shuffle(rng);
        rankings.push(Ranking::new(items)?);
    }
    RankingSet::new(rankings)
}

/// Table of per-item feature values, one ranking source per feature.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    names: Vec<String>,
    rows: BTreeMap<ItemId, Vec<f64>>,
}

impl FeatureTable {
    pub fn new(names: Vec<String>, rows: BTreeMap<ItemId, Vec<f64>>) -> Result<Self> {
        for (id, row) in &rows {
            if row.len() != names.len() {
                return Err(Error::DimensionMismatch(format!(
                    "item {id} has {} feature values, expected {}",
                    row.len(),
                    names.len()
                )));
            }
        }
        Ok(FeatureTable { names, rows })
    }

    /// Loads a feature CSV whose header is `item_id` followed by feature
    /// names.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        });
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::data(path, "empty feature table"))?;
        let mut header_fields = header.split(',').map(str::trim);
        if header_fields.next() != Some("item_id") {
            return Err(Error::data(path, "feature table header must start with item_id"));
        }
        let names: Vec<String> = header_fields.map(String::from).collect();
        if names.is_empty() {
            return Err(Error::data(path, "feature table has no feature columns"));
        }
        let mut rows = BTreeMap::new();
        for (lineno, line) in lines {
            let mut fields = line.split(',').map(str::trim);
            let id: u64 = fields
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::data(path, format!("line {}: bad item id", lineno + 1)))?;
            let values: Vec<f64> = fields
                .map(|f| {
                    f.parse().map_err(|_| {
                        Error::data(path, format!("line {}: bad feature value {f:?}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            if values.len() != names.len() {
                return Err(Error::data(
                    path,
                    format!(
                        "line {}: {} feature values, expected {}",
                        lineno + 1,
                        values.len(),
                        names.len()
                    ),
                ));
            }
            rows.insert(ItemId(id), values);
        }
        FeatureTable::new(names, rows)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.rows.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Restriction of the table to the given items (for candidate
    /// subsampling).
    pub fn restrict(&self, items: &[ItemId]) -> Result<FeatureTable> {
        let mut rows = BTreeMap::new();
        for &d in items {
            let row = self.rows.get(&d).ok_or(Error::UnknownItem(d))?;
            rows.insert(d, row.clone());
        }
        FeatureTable::new(self.names.clone(), rows)
    }
}

/// One input ranking per requested feature: items sorted by that feature
/// descending, ties toward the smaller item id, truncated at `depth`.
pub fn letor_input_rankings(
    table: &FeatureTable,
    features: &[String],
    depth: usize,
) -> Result<RankingSet> {
    if table.len() < depth {
        return Err(Error::Config(format!(
            "feature table has {} items, fewer than the ranking depth {depth}",
            table.len()
        )));
    }
    let mut rankings = Vec::with_capacity(features.len());
    for feature in features {
        let column = table
            .names
            .iter()
            .position(|n| n == feature)
            .ok_or_else(|| Error::Config(format!("unknown feature {feature:?}")))?;
        let mut scored: Vec<(ItemId, f64)> =
            table.rows.iter().map(|(&d, row)| (d, row[column])).collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        rankings.push(Ranking::new(scored[..depth].iter().map(|&(d, _)| d).collect())?);
    }
    RankingSet::new(rankings)
}

// ── Ground truth ──────────────────────────────────────────────────────────

/// True expected post-click metric of one ranking under the given user
/// behavior, in closed form.
pub fn ground_truth_value(
    ranking: &Ranking,
    world: &World,
    behavior: &UserBehaviorKind,
) -> Result<f64> {
    let mut total = 0.0;
    match behavior {
        UserBehaviorKind::CascadeSim => {
            let mut exam = 1.0;
            for &item in ranking.items() {
                let truth = world.truth(item)?;
                total += exam * truth.attraction * truth.post_click.mean();
                exam *= 1.0 - truth.attraction;
            }
        }
        UserBehaviorKind::PositionBasedSim { position_probs } => {
            for (pos, &item) in ranking.items().iter().enumerate() {
                let truth = world.truth(item)?;
                let examined = position_probs.get(pos).copied().unwrap_or(0.0);
                total += examined * truth.attraction * truth.post_click.mean();
            }
        }
    }
    Ok(total)
}

/// True pairwise preferences between the input rankings: differences of
/// their closed-form metric values.
pub fn ground_truth_preference(
    set: &RankingSet,
    world: &World,
    behavior: &UserBehaviorKind,
) -> Result<PreferenceMatrix> {
    let values: Vec<f64> = set
        .rankings()
        .iter()
        .map(|r| ground_truth_value(r, world, behavior))
        .collect::<Result<_>>()?;
    PreferenceMatrix::from_scores(&values)
}
