//! Experiment harness: seeded simulation and replay runs that drive a
//! presentation policy impression by impression and record, at regular
//! checkpoints, how well each policy's preference estimates match ground
//! truth and how much estimation variance remains.

pub mod config;
pub mod output;
pub mod replay;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clickmodel;
use crate::error::{Error, Result};
use crate::estimator::{self, VariancePredictor};
use crate::interleave::{self, TdmInterleaved, TdmTally};
use crate::objective::{EvalSettings, Evaluator};
use crate::sim::{self, FeatureTable, UserBehaviorKind, World};
use crate::types::{
    ExperimentState, ImpressionRecord, ItemId, PreferenceMatrix, Ranking, RankingSet,
};

use config::{DatasetSpec, ExperimentConfig, PolicyKind, PredictorSpec};
pub use output::{CheckpointRow, RunSeries};

// ── Random streams ────────────────────────────────────────────────────────

/// Independent random streams within one repeat of an experiment. Worlds,
/// user behavior, policy randomness, and predictor noise each draw from
/// their own stream, so two policies compared at the same seed face
/// identical worlds and identical users no matter how much randomness each
/// policy itself consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngStream {
    World = 0,
    Behavior = 1,
    Policy = 2,
    Predictor = 3,
}

const NUM_STREAMS: u64 = 4;

/// A generator seeded by `(seed, repeat, stream)`, reproducible and
/// non-overlapping across repeats and streams.
pub fn stream_rng(seed: u64, repeat: u64, stream: RngStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repeat * NUM_STREAMS + stream as u64);
    rng
}

// ── Pairwise accuracy ─────────────────────────────────────────────────────

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Fraction of ordered ranking pairs whose estimated preference sign
/// disagrees with the true one: 0 when every pair is ordered correctly, 1
/// when every pair is inverted.
pub fn binary_error(estimated: &PreferenceMatrix, truth: &PreferenceMatrix) -> Result<f64> {
    let n = truth.len();
    if estimated.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "estimated preferences cover {} rankings, ground truth covers {n}",
            estimated.len()
        )));
    }
    let mut mismatches = 0u64;
    for i in 0..n {
        for j in 0..n {
            if i != j && sign(estimated.get(i, j)) != sign(truth.get(i, j)) {
                mismatches += 1;
            }
        }
    }
    Ok(mismatches as f64 / (n * (n - 1)) as f64)
}

/// Like [`binary_error`], but pairs whose true preference is exactly zero
/// are dropped from both the numerator and the denominator. Sampled
/// estimates are almost never exactly zero, so scoring truly tied pairs
/// would charge the estimator for coin flips it cannot win. Errors if every
/// pair is tied.
pub fn binary_error_excluding_ties(
    estimated: &PreferenceMatrix,
    truth: &PreferenceMatrix,
) -> Result<f64> {
    let n = truth.len();
    if estimated.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "estimated preferences cover {} rankings, ground truth covers {n}",
            estimated.len()
        )));
    }
    let mut mismatches = 0u64;
    let mut scored = 0u64;
    for i in 0..n {
        for j in 0..n {
            if i == j || truth.get(i, j) == 0.0 {
                continue;
            }
            scored += 1;
            if sign(estimated.get(i, j)) != sign(truth.get(i, j)) {
                mismatches += 1;
            }
        }
    }
    if scored == 0 {
        return Err(Error::InvalidValue(
            "every ground-truth ranking pair is tied; pairwise accuracy is undefined".into(),
        ));
    }
    Ok(mismatches as f64 / scored as f64)
}

// ── Checkpoint estimates ──────────────────────────────────────────────────

/// Per-ranking metric estimates from the click decomposition, corrected
/// toward per-ranking click-through rates when the settings say so.
pub fn decomposition_estimates(
    set: &RankingSet,
    state: &ExperimentState,
    settings: &EvalSettings,
) -> Result<Vec<f64>> {
    (0..set.len())
        .map(|i| {
            if settings.error_correction {
                estimator::corrected_ranking_metric_estimate(
                    set,
                    state,
                    i,
                    &settings.click_model,
                    settings.attraction_prior,
                )
            } else {
                estimator::ranking_metric_estimate(
                    &set.rankings()[i],
                    state,
                    &settings.click_model,
                    settings.attraction_prior,
                )
            }
        })
        .collect()
}

/// The pairwise preference estimates a policy reports at a checkpoint: win
/// differences for team-draft multileaving, per-ranking sample means for
/// A/B, and decomposition estimates otherwise. `tally` is required only for
/// the team-draft policy.
pub fn policy_estimate_matrix(
    policy: PolicyKind,
    set: &RankingSet,
    state: &ExperimentState,
    settings: &EvalSettings,
    tally: Option<&TdmTally>,
) -> Result<PreferenceMatrix> {
    match policy {
        PolicyKind::Tdm => {
            let tally = tally.ok_or_else(|| {
                Error::InvalidValue("team-draft estimates need the win tally".into())
            })?;
            Ok(tally.preference_matrix())
        }
        PolicyKind::Ab => {
            let scores: Vec<f64> = (0..set.len())
                .map(|i| interleave::ab_estimate(state.per_ranking(i)).value)
                .collect();
            PreferenceMatrix::from_scores(&scores)
        }
        _ => PreferenceMatrix::from_scores(&decomposition_estimates(set, state, settings)?),
    }
}

// ── Dataset preparation ───────────────────────────────────────────────────

/// Dataset inputs resolved once per run; worlds and rankings are still
/// drawn fresh for every repeat.
enum PreparedDataset {
    Ec {
        num_items: usize,
    },
    News {
        world: World,
    },
    Letor {
        relevance: BTreeMap<ItemId, u8>,
        table: FeatureTable,
        features: Vec<String>,
        /// Items having both a label and features, ascending.
        usable: Vec<ItemId>,
        candidates: usize,
    },
}

fn prepare_dataset(cfg: &ExperimentConfig) -> Result<(PreparedDataset, Vec<String>)> {
    let mut warnings = Vec::new();
    let prepared = match &cfg.dataset {
        DatasetSpec::Ec { num_items } => PreparedDataset::Ec { num_items: *num_items },
        DatasetSpec::News { world_file } => {
            let world = sim::load_news_world_csv(world_file)?;
            if world.len() < cfg.depth {
                return Err(Error::Config(format!(
                    "news world has {} items, fewer than the ranking depth {}",
                    world.len(),
                    cfg.depth
                )));
            }
            PreparedDataset::News { world }
        }
        DatasetSpec::Letor { relevance_file, feature_file, features, candidates } => {
            let relevance = sim::load_relevance_csv(relevance_file)?;
            let table = FeatureTable::from_csv(feature_file)?;
            let features = match features {
                Some(list) => list.clone(),
                None => table.names().to_vec(),
            };
            if features.len() < 2 {
                return Err(Error::Config(
                    "ranking by features needs at least two feature columns".into(),
                ));
            }
            let usable: Vec<ItemId> =
                table.ids().filter(|d| relevance.contains_key(d)).collect();
            let mut candidates = *candidates;
            if candidates > usable.len() {
                warnings.push(format!(
                    "only {} items have both labels and features; candidate pool reduced from \
                     {candidates}",
                    usable.len()
                ));
                candidates = usable.len();
            }
            if candidates < cfg.depth {
                return Err(Error::Config(format!(
                    "candidate pool of {candidates} items cannot fill rankings of depth {}",
                    cfg.depth
                )));
            }
            PreparedDataset::Letor { relevance, table, features, usable, candidates }
        }
    };
    Ok((prepared, warnings))
}

/// Draws this repeat's world and input rankings from the world stream.
fn materialize(
    prepared: &PreparedDataset,
    cfg: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(World, RankingSet)> {
    match prepared {
        PreparedDataset::Ec { num_items } => {
            let world = sim::gen_ec_world(*num_items, rng);
            let set = sim::gen_input_rankings(
                &world,
                cfg.num_rankings,
                cfg.depth,
                cfg.duplication_k,
                rng,
            )?;
            Ok((world, set))
        }
        PreparedDataset::News { world } => {
            let set = sim::gen_input_rankings(
                world,
                cfg.num_rankings,
                cfg.depth,
                cfg.duplication_k,
                rng,
            )?;
            Ok((world.clone(), set))
        }
        PreparedDataset::Letor { relevance, table, features, usable, candidates } => {
            let chosen: Vec<ItemId> = usable.choose_multiple(rng, *candidates).copied().collect();
            let restricted_relevance: BTreeMap<ItemId, u8> =
                chosen.iter().map(|d| (*d, relevance[d])).collect();
            let world = sim::gen_letor_world(&restricted_relevance, rng)?;
            let set = sim::letor_input_rankings(&table.restrict(&chosen)?, features, cfg.depth)?;
            Ok((world, set))
        }
    }
}

// ── Predictions ───────────────────────────────────────────────────────────

fn build_predictor(spec: &PredictorSpec) -> Result<VariancePredictor> {
    match spec {
        PredictorSpec::OracleNoise => Ok(VariancePredictor::OracleNoise),
        PredictorSpec::Constant(v) => Ok(VariancePredictor::Constant(*v)),
        PredictorSpec::Table(path) => VariancePredictor::table_from_csv(path),
    }
}

/// Draws one predicted variance per universe item, in ascending item order,
/// from the predictor stream. The draw order is fixed so the map is
/// identical across policies at the same seed and repeat.
fn freeze_predictions(
    predictor: &VariancePredictor,
    universe: &BTreeSet<ItemId>,
    world: Option<&World>,
    rng: &mut ChaCha8Rng,
) -> Result<BTreeMap<ItemId, f64>> {
    let mut map = BTreeMap::new();
    for &d in universe {
        let truth = world.map(|w| w.variance(d)).transpose()?;
        map.insert(d, predictor.predict(d, truth, rng)?);
    }
    Ok(map)
}

fn zero_predictions(universe: &BTreeSet<ItemId>) -> BTreeMap<ItemId, f64> {
    universe.iter().map(|&d| (d, 0.0)).collect()
}

// ── Checkpoint grid ───────────────────────────────────────────────────────

/// Impression counts at which metrics are recorded: zero, every multiple of
/// `interval`, and the final impression.
pub fn checkpoint_grid(num_impressions: u64, interval: u64) -> Vec<u64> {
    let mut grid = vec![0];
    let mut t = interval;
    while t < num_impressions {
        grid.push(t);
        t += interval;
    }
    if num_impressions > 0 {
        grid.push(num_impressions);
    }
    grid
}

// ── Simulation runs ───────────────────────────────────────────────────────

/// Evaluation settings the policy itself runs under while selecting
/// presentations and reporting estimates.
fn selection_settings(cfg: &ExperimentConfig) -> EvalSettings {
    EvalSettings {
        click_model: cfg.click_model.clone(),
        attraction_prior: cfg.attraction_prior,
        error_correction: cfg.policy.error_correction(),
    }
}

/// Settings for the reported variance column: pure model click
/// probabilities for every policy, so the column compares policies on equal
/// terms rather than echoing each policy's own correction.
fn report_settings(cfg: &ExperimentConfig) -> EvalSettings {
    EvalSettings {
        click_model: cfg.click_model.clone(),
        attraction_prior: cfg.attraction_prior,
        error_correction: false,
    }
}

/// The weight of the verbatim-presentation pressure during selection. The
/// no-correction ablation removes that pressure entirely along with the
/// click-through blending.
fn selection_gamma(cfg: &ExperimentConfig) -> f64 {
    if cfg.policy == PolicyKind::DirvNoErrCorr {
        0.0
    } else {
        cfg.gamma
    }
}

/// Runs the configured policy against simulated users for every repeat and
/// returns the checkpoint series. Deterministic in the seed: the same
/// config produces the same rows.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<RunSeries> {
    let (prepared, prep_warnings) = prepare_dataset(cfg)?;
    let predictor = build_predictor(&cfg.predictor)?;
    let select = selection_settings(cfg);
    let report = report_settings(cfg);
    let gamma = selection_gamma(cfg);

    let mut warnings = cfg.warnings.clone();
    warnings.extend(prep_warnings);

    let mut rows = Vec::new();
    for repeat in 0..cfg.num_repeats {
        let mut world_rng = stream_rng(cfg.seed, repeat, RngStream::World);
        let mut behavior_rng = stream_rng(cfg.seed, repeat, RngStream::Behavior);
        let mut policy_rng = stream_rng(cfg.seed, repeat, RngStream::Policy);
        let mut predictor_rng = stream_rng(cfg.seed, repeat, RngStream::Predictor);

        let (world, set) = materialize(&prepared, cfg, &mut world_rng)?;
        let report_predictions =
            freeze_predictions(&predictor, set.universe(), Some(&world), &mut predictor_rng)?;
        let selection_predictions = if cfg.policy == PolicyKind::DirvNoVarPred {
            zero_predictions(set.universe())
        } else {
            report_predictions.clone()
        };
        let truth = sim::ground_truth_preference(&set, &world, &cfg.behavior)?;

        let mut state = ExperimentState::new(&set);
        let mut tally = TdmTally::new(set.len());

        let checkpoint = |state: &ExperimentState,
                          tally: &TdmTally,
                          impressions: u64|
         -> Result<CheckpointRow> {
            let estimated = policy_estimate_matrix(cfg.policy, &set, state, &select, Some(tally))?;
            let e_bin = binary_error_excluding_ties(&estimated, &truth)?;
            let ev = Evaluator::new(&set, state, &report, &report_predictions)?;
            Ok(CheckpointRow { repeat, impressions, e_bin, total_variance: ev.total_variance() })
        };

        rows.push(checkpoint(&state, &tally, 0)?);
        for t in 1..=cfg.num_impressions {
            let mut team_info: Option<TdmInterleaved> = None;
            let presented = match cfg.policy {
                PolicyKind::Dirv | PolicyKind::DirvNoVarPred | PolicyKind::DirvNoErrCorr => {
                    let ev = Evaluator::new(&set, &state, &select, &selection_predictions)?;
                    interleave::dirv_select(&ev, gamma, cfg.depth)?
                }
                PolicyKind::Tdm => {
                    let interleaved = interleave::tdm_interleave(&set, cfg.depth, &mut policy_rng)?;
                    let ranking = interleaved.ranking.clone();
                    team_info = Some(interleaved);
                    ranking
                }
                PolicyKind::Ab => {
                    let index = interleave::ab_select(set.rankings(), &mut policy_rng)?;
                    set.rankings()[index].clone()
                }
            };
            let record =
                sim::simulate_impression(&presented, &world, &cfg.behavior, &mut behavior_rng)?;
            state.record_impression(&set, &record);
            clickmodel::update_examination_counts(&mut state, &record);
            if let Some(interleaved) = &team_info {
                tally.record(&interleave::tdm_credit(&record, interleaved, set.len()));
            }
            if t % cfg.checkpoint_interval == 0 || t == cfg.num_impressions {
                rows.push(checkpoint(&state, &tally, t)?);
            }
        }
    }

    Ok(RunSeries { policy: cfg.policy.name().to_string(), seed: cfg.seed, rows, warnings })
}

// ── Replay runs ───────────────────────────────────────────────────────────

/// A logged presentation queue: records of one pool ranking, consumed front
/// to back as the policy re-selects it.
struct ReplayQueue {
    ranking: Ranking,
    /// Index of the matching input ranking, when the pool ranking is one.
    input_index: Option<usize>,
    records: VecDeque<ImpressionRecord>,
}

/// Splits one query's log into ground truth and replayable records: the
/// first half (rounded up) of each input ranking's verbatim impressions
/// scores the ground-truth preference, the rest — plus every off-ranking
/// presentation — feeds the replay queues.
fn split_query(query: &replay::ReplayQuery) -> Result<(PreferenceMatrix, Vec<ReplayQueue>)> {
    let set = &query.input_rankings;
    let mut truth_sums = vec![(0.0f64, 0u64); set.len()];
    let mut queues = Vec::new();
    for (ranking, records) in &query.pool {
        let input_index = set.position_match(ranking);
        let held_out = match input_index {
            Some(_) => records.len().div_ceil(2),
            None => 0,
        };
        if let Some(i) = input_index {
            for record in &records[..held_out] {
                truth_sums[i].0 += record.total_post_click();
                truth_sums[i].1 += 1;
            }
        }
        queues.push(ReplayQueue {
            ranking: ranking.clone(),
            input_index,
            records: records[held_out..].iter().cloned().collect(),
        });
    }
    let scores: Vec<f64> = truth_sums
        .iter()
        .enumerate()
        .map(|(i, &(sum, n))| {
            if n == 0 {
                Err(Error::InvalidValue(format!(
                    "query {:?}: input ranking {i} has no logged verbatim impressions to score \
                     ground truth",
                    query.query_id
                )))
            } else {
                Ok(sum / n as f64)
            }
        })
        .collect::<Result<_>>()?;
    Ok((PreferenceMatrix::from_scores(&scores)?, queues))
}

/// Replays one query against the policy for one repeat, reporting
/// `(e_bin, total_variance)` at each grid point and whether the log ran dry
/// before the end. After exhaustion the metrics freeze at their last
/// values.
#[allow(clippy::too_many_arguments)]
fn replay_one_query(
    query: &replay::ReplayQuery,
    cfg: &ExperimentConfig,
    select: &EvalSettings,
    report: &EvalSettings,
    gamma: f64,
    predictor: &VariancePredictor,
    grid: &[u64],
    policy_rng: &mut ChaCha8Rng,
    predictor_rng: &mut ChaCha8Rng,
) -> Result<(Vec<(f64, f64)>, bool)> {
    let set = &query.input_rankings;
    let (truth, mut queues) = split_query(query)?;
    let report_predictions =
        freeze_predictions(predictor, set.universe(), None, predictor_rng)?;
    let selection_predictions = if cfg.policy == PolicyKind::DirvNoVarPred {
        zero_predictions(set.universe())
    } else {
        report_predictions.clone()
    };
    let mut state = ExperimentState::new(set);

    // Advances one impression; false when no queue the policy may use has
    // records left.
    let mut step = |state: &mut ExperimentState, policy_rng: &mut ChaCha8Rng| -> Result<bool> {
        let available: Vec<usize> = queues
            .iter()
            .enumerate()
            .filter(|(_, q)| !q.records.is_empty())
            .filter(|(_, q)| cfg.policy != PolicyKind::Ab || q.input_index.is_some())
            .map(|(i, _)| i)
            .collect();
        if available.is_empty() {
            return Ok(false);
        }
        let chosen = match cfg.policy {
            PolicyKind::Ab => {
                let rankings: Vec<Ranking> =
                    available.iter().map(|&i| queues[i].ranking.clone()).collect();
                available[interleave::ab_select(&rankings, policy_rng)?]
            }
            PolicyKind::Tdm => {
                return Err(Error::Config(
                    "team-draft multileaving cannot be replayed from logs".into(),
                ))
            }
            _ => {
                let pool: Vec<Ranking> =
                    available.iter().map(|&i| queues[i].ranking.clone()).collect();
                let ev = Evaluator::new(set, state, select, &selection_predictions)?;
                let picked = interleave::dirv_select_from_pool(&ev, gamma, &pool)?;
                available[pool.iter().position(|r| *r == picked).expect("picked from pool")]
            }
        };
        let record = queues[chosen].records.pop_front().expect("nonempty queue");
        state.record_impression(set, &record);
        clickmodel::update_examination_counts(state, &record);
        Ok(true)
    };

    let mut series = Vec::with_capacity(grid.len());
    let mut t = 0u64;
    let mut exhausted = false;
    for &target in grid {
        while t < target && !exhausted {
            if step(&mut state, policy_rng)? {
                t += 1;
            } else {
                exhausted = true;
            }
        }
        let estimated = policy_estimate_matrix(cfg.policy, set, &state, select, None)?;
        let e_bin = binary_error(&estimated, &truth)?;
        let ev = Evaluator::new(set, &state, report, &report_predictions)?;
        series.push((e_bin, ev.total_variance()));
    }
    Ok((series, exhausted))
}

/// Replays logged impressions against the configured policy. Each query in
/// the log is replayed separately; checkpoint metrics are averaged across
/// queries. Ground truth comes from held-out verbatim impressions, so no
/// simulator is involved.
pub fn run_replay(cfg: &ExperimentConfig, data: &Path) -> Result<RunSeries> {
    let queries = replay::load_replay_file(data)?;
    let predictor = build_predictor(&cfg.predictor)?;
    let select = selection_settings(cfg);
    let report = report_settings(cfg);
    let gamma = selection_gamma(cfg);
    let grid = checkpoint_grid(cfg.num_impressions, cfg.checkpoint_interval);

    let mut warnings = cfg.warnings.clone();
    let mut warned_queries: BTreeSet<String> = BTreeSet::new();

    let mut rows = Vec::new();
    for repeat in 0..cfg.num_repeats {
        let mut policy_rng = stream_rng(cfg.seed, repeat, RngStream::Policy);
        let mut predictor_rng = stream_rng(cfg.seed, repeat, RngStream::Predictor);

        let mut sums = vec![(0.0f64, 0.0f64); grid.len()];
        for query in &queries {
            let (series, exhausted) = replay_one_query(
                query,
                cfg,
                &select,
                &report,
                gamma,
                &predictor,
                &grid,
                &mut policy_rng,
                &mut predictor_rng,
            )?;
            if exhausted && warned_queries.insert(query.query_id.clone()) {
                warnings.push(format!(
                    "query {:?}: log ran dry before {} impressions; later checkpoints repeat the \
                     last observed state",
                    query.query_id, cfg.num_impressions
                ));
            }
            for (sum, point) in sums.iter_mut().zip(series) {
                sum.0 += point.0;
                sum.1 += point.1;
            }
        }
        let num_queries = queries.len() as f64;
        for (&impressions, &(e_sum, v_sum)) in grid.iter().zip(&sums) {
            rows.push(CheckpointRow {
                repeat,
                impressions,
                e_bin: e_sum / num_queries,
                total_variance: v_sum / num_queries,
            });
        }
    }

    Ok(RunSeries { policy: cfg.policy.name().to_string(), seed: cfg.seed, rows, warnings })
}

// ── Accuracy bound ────────────────────────────────────────────────────────

/// Result of checking the pairwise-accuracy bound, which says the expected
/// binary error is at most the total estimation variance divided by the
/// squared smallest true gap times the number of rankings.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub mean_binary_error: f64,
    pub mean_bound: f64,
    /// Squared smallest absolute true preference between any two rankings.
    pub min_squared_gap: f64,
    /// A bound above 1 can never be violated and certifies nothing.
    pub vacuous: bool,
    pub violated: bool,
}

/// Compares the mean binary error across independent experiment states
/// against the mean of the variance-based accuracy bound. Errors when two
/// rankings are truly tied, since the bound divides by the smallest gap.
pub fn check_error_bound(
    set: &RankingSet,
    world: &World,
    behavior: &UserBehaviorKind,
    states: &[ExperimentState],
    settings: &EvalSettings,
    predicted_variance: &BTreeMap<ItemId, f64>,
) -> Result<BoundCheck> {
    if states.is_empty() {
        return Err(Error::InvalidValue("bound check needs at least one run".into()));
    }
    let truth = sim::ground_truth_preference(set, world, behavior)?;
    let n = truth.len();
    let mut min_squared_gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = truth.get(i, j);
            if gap == 0.0 {
                return Err(Error::TiedTruth(i, j));
            }
            min_squared_gap = min_squared_gap.min(gap * gap);
        }
    }

    let mut error_sum = 0.0;
    let mut bound_sum = 0.0;
    for state in states {
        let estimated = PreferenceMatrix::from_scores(&decomposition_estimates(set, state, settings)?)?;
        error_sum += binary_error(&estimated, &truth)?;
        let ev = Evaluator::new(set, state, settings, predicted_variance)?;
        bound_sum += ev.total_variance() / (min_squared_gap * n as f64);
    }
    let runs = states.len() as f64;
    let mean_bound = bound_sum / runs;
    let mean_binary_error = error_sum / runs;
    let vacuous = mean_bound > 1.0;
    Ok(BoundCheck {
        mean_binary_error,
        mean_bound,
        min_squared_gap,
        vacuous,
        violated: !vacuous && mean_binary_error > mean_bound + 1e-9,
    })
}
