//! Acceptance suite: one test per criterion the crate promises to satisfy,
//! each printing a single PASS/FAIL line (visible with `--nocapture`).
//!
//! The expensive simulation runs are shared: the first criterion to need
//! them builds a bank of desk-scale runs (10,000 impressions, 30 repeats,
//! seed 1) that the rest read from.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dirv::clickmodel::ClickModelKind;
use dirv::estimator::ranking_metric_estimate;
use dirv::harness::config::ExperimentConfig;
use dirv::harness::output::{aggregate, emit_results};
use dirv::harness::{binary_error, check_error_bound, run_simulation, RunSeries};
use dirv::interleave::{ab_select, dirv_greedy, dirv_select};
use dirv::objective::{phi, EvalSettings, Evaluator, PhiInputs, PHI_CAP};
use dirv::sim::{
    ground_truth_value, simulate_impression, ItemTruth, PostClickDist, UserBehaviorKind, World,
};
use dirv::types::{
    ExperimentState, ItemId, ItemStats, PreferenceMatrix, Ranking, RankingSet,
};

// ── Shared run bank ───────────────────────────────────────────────────────

/// E-commerce simulation at desk scale. `duplication_k` of the 10 positions
/// are shared across all 5 input rankings.
fn ec_config(policy: &str, duplication_k: usize) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "policy = {policy}\n\
         dataset = ec\n\
         ec_num_items = 50\n\
         num_rankings = 5\n\
         depth = 10\n\
         duplication_k = {duplication_k}\n\
         num_impressions = 10000\n\
         num_repeats = 30\n\
         checkpoint_interval = 100\n\
         seed = 1\n"
    ))
    .expect("valid acceptance config")
}

/// The model-mismatch setting: users examine by rank (probability 1/rank)
/// and click independently, while the estimator still assumes a cascade.
fn mismatch_config(policy: &str) -> ExperimentConfig {
    let probs: Vec<String> = (1..=10).map(|k| format!("{}", 1.0 / k as f64)).collect();
    ExperimentConfig::parse(&format!(
        "policy = {policy}\n\
         dataset = ec\n\
         ec_num_items = 50\n\
         num_rankings = 5\n\
         depth = 10\n\
         duplication_k = 4\n\
         num_impressions = 5000\n\
         num_repeats = 30\n\
         checkpoint_interval = 100\n\
         seed = 1\n\
         behavior = position_based_sim\n\
         behavior_position_probs = {}\n",
        probs.join(", ")
    ))
    .expect("valid acceptance config")
}

struct Bank {
    /// Keyed by (policy name, duplication_k).
    ec: BTreeMap<(&'static str, usize), RunSeries>,
    /// Keyed by policy name; the model-mismatch runs.
    mismatch: BTreeMap<&'static str, RunSeries>,
}

fn bank() -> &'static Bank {
    static BANK: OnceLock<Bank> = OnceLock::new();
    BANK.get_or_init(|| {
        let mut ec = BTreeMap::new();
        let combos: [(&'static str, &[usize]); 4] = [
            ("dirv", &[0, 2, 4, 6, 8]),
            ("tdm", &[0, 2, 4, 6, 8]),
            ("ab", &[0, 8]),
            ("dirv_no_varpred", &[4]),
        ];
        for (policy, ks) in combos {
            for &k in ks {
                ec.insert((policy, k), run_simulation(&ec_config(policy, k)).unwrap());
            }
        }
        let mut mismatch = BTreeMap::new();
        for policy in ["dirv", "dirv_no_errcorr"] {
            mismatch.insert(policy, run_simulation(&mismatch_config(policy)).unwrap());
        }
        Bank { ec, mismatch }
    })
}

fn final_error(series: &RunSeries) -> f64 {
    aggregate(&series.rows).last().expect("rows").mean_e_bin
}

/// Mean error at a given impression count, across repeats.
fn error_at(series: &RunSeries, impressions: u64) -> f64 {
    aggregate(&series.rows)
        .into_iter()
        .find(|r| r.impressions == impressions)
        .expect("checkpoint on the grid")
        .mean_e_bin
}

fn verdict(criterion: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion} ({name}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {criterion} ({name}) failed: {detail}");
}

// ── Criterion 1: headline accuracy ────────────────────────────────────────

#[test]
fn c1_headline_accuracy_at_desk_scale() {
    let bank = bank();
    let dirv0 = final_error(&bank.ec[&("dirv", 0)]);
    let ab0 = final_error(&bank.ec[&("ab", 0)]);
    let dirv8 = final_error(&bank.ec[&("dirv", 8)]);
    let tdm8 = final_error(&bank.ec[&("tdm", 8)]);
    let pass = dirv0 <= 0.07 && ab0 <= 0.07 && dirv8 <= 0.12 && tdm8 >= 0.20;
    verdict(
        1,
        "headline accuracy at desk scale",
        pass,
        &format!(
            "no duplication: dirv {dirv0:.4} and ab {ab0:.4} (need <= 0.07); 80% duplication: \
             dirv {dirv8:.4} (need <= 0.12), tdm {tdm8:.4} (need >= 0.20)"
        ),
    );
}

// ── Criterion 2: beats team-draft everywhere ──────────────────────────────

#[test]
fn c2_beats_team_draft_at_every_duplication() {
    let bank = bank();
    let mut detail = Vec::new();
    let mut pass = true;
    for k in [0, 2, 4, 6, 8] {
        let dirv = final_error(&bank.ec[&("dirv", k)]);
        let tdm = final_error(&bank.ec[&("tdm", k)]);
        pass &= dirv < tdm;
        detail.push(format!("{}%: dirv {dirv:.4} vs tdm {tdm:.4}", k * 10));
    }
    verdict(2, "lower final error than team-draft at every duplication level", pass, &detail.join("; "));
}

// ── Criterion 3: variance dominance ───────────────────────────────────────

#[test]
fn c3_variance_below_ab_once_warmed_up() {
    let bank = bank();
    let mut detail = Vec::new();
    let mut pass = true;
    for k in [0, 8] {
        let dirv: BTreeMap<u64, f64> = aggregate(&bank.ec[&("dirv", k)].rows)
            .into_iter()
            .map(|r| (r.impressions, r.mean_total_variance))
            .collect();
        let ab: BTreeMap<u64, f64> = aggregate(&bank.ec[&("ab", k)].rows)
            .into_iter()
            .map(|r| (r.impressions, r.mean_total_variance))
            .collect();
        let past_warmup: Vec<u64> = dirv.keys().copied().filter(|&t| t > 500).collect();
        let wins = past_warmup.iter().filter(|t| dirv[t] <= ab[t]).count();
        let fraction = wins as f64 / past_warmup.len() as f64;
        pass &= fraction >= 0.8;
        detail.push(format!(
            "{}% duplication: variance at or below ab at {:.0}% of {} checkpoints past 500 \
             impressions (need >= 80%)",
            k * 10,
            fraction * 100.0,
            past_warmup.len()
        ));
    }
    verdict(3, "reported variance at or below ab after warm-up", pass, &detail.join("; "));
}

// ── Criterion 4: variance prediction speeds convergence ───────────────────

/// First checkpoint at which a repeat's error reaches 0.10, per repeat.
fn first_reach(series: &RunSeries, threshold: f64) -> BTreeMap<u64, Option<u64>> {
    let mut out = BTreeMap::new();
    for repeat in 0..series.repeats() {
        let reached = series
            .repeat_rows(repeat)
            .find(|r| r.e_bin <= threshold)
            .map(|r| r.impressions);
        out.insert(repeat, reached);
    }
    out
}

#[test]
fn c4_variance_prediction_reaches_accuracy_sooner() {
    let bank = bank();
    let with = first_reach(&bank.ec[&("dirv", 4)], 0.10);
    let without = first_reach(&bank.ec[&("dirv_no_varpred", 4)], 0.10);
    let repeats = with.len() as u64;
    let mut earlier = 0u64;
    for (repeat, reached) in &with {
        let a = reached.unwrap_or(u64::MAX);
        let b = without[repeat].unwrap_or(u64::MAX);
        if a < b {
            earlier += 1;
        }
    }
    let pass = 2 * earlier > repeats;
    verdict(
        4,
        "variance prediction reaches 10% error sooner",
        pass,
        &format!(
            "with predictions strictly earlier to error <= 0.10 in {earlier} of {repeats} \
             repeats at 40% duplication (need a strict majority)"
        ),
    );
}

// ── Criterion 5: correction survives model mismatch ───────────────────────

#[test]
fn c5_correction_survives_model_mismatch() {
    let bank = bank();
    let corrected = &bank.mismatch["dirv"];
    let uncorrected = &bank.mismatch["dirv_no_errcorr"];
    let final_corrected = final_error(corrected);
    let final_uncorrected = final_error(uncorrected);
    let plateau = (error_at(uncorrected, 1000) - error_at(uncorrected, 5000)).abs();
    let pass = final_corrected < final_uncorrected && plateau < 0.05;
    verdict(
        5,
        "click-rate correction survives a wrong click model",
        pass,
        &format!(
            "position-based users, cascade estimation: corrected {final_corrected:.4} vs \
             uncorrected {final_uncorrected:.4}; uncorrected moved only {plateau:.4} over its \
             last 4000 impressions (plateau, need < 0.05)"
        ),
    );
}

// ── Criterion 6: analytic properties ──────────────────────────────────────

fn phi_properties() -> Result<(), String> {
    let mut runner = TestRunner::new(PropConfig { cases: 10_000, ..PropConfig::default() });
    runner
        .run(
            &(
                0.0f64..=1.0,
                0.0f64..1000.0,
                0.0f64..1.0e6,
                0u64..1_000_000,
                0.0f64..=1.0,
            ),
            |(p, mean, var, n_impr, click_frac)| {
                let n_impr = n_impr as f64;
                let n_click = (n_impr * click_frac).floor();
                let base = PhiInputs { p_click: p, mean_x: mean, var_x: var, n_impr, n_click };
                let value = phi(&base);
                prop_assert!((0.0..=PHI_CAP).contains(&value), "phi out of range: {value}");

                // More variance never shrinks the surrogate.
                let more_var = PhiInputs { var_x: var * 2.0 + 1.0, ..base };
                prop_assert!(phi(&more_var) + 1e-9 >= value, "variance monotonicity");

                // Ten times the data never grows it.
                let more_data =
                    PhiInputs { n_impr: n_impr * 10.0, n_click: n_click * 10.0, ..base };
                prop_assert!(phi(&more_data) <= value + 1e-9, "sample-size monotonicity");
                Ok(())
            },
        )
        .map_err(|e| format!("phi properties: {e}"))
}

/// Strategy for internally consistent per-item statistics.
fn arb_stats() -> impl Strategy<Value = ItemStats> {
    (0u64..60, 0.0f64..=1.0, 0.0f64..=1.0, 0.1f64..20.0, 0.0f64..50.0).prop_map(
        |(n_impr, exam_frac, click_frac, mean, extra_spread)| {
            let n_exam = (n_impr as f64 * exam_frac).floor() as u64;
            let n_click = (n_exam as f64 * click_frac).floor() as u64;
            let sum_x = n_click as f64 * mean;
            let sum_x2 = n_click as f64 * (mean * mean + extra_spread);
            ItemStats { n_impr, n_exam, n_click, sum_x, sum_x2 }
        },
    )
}

/// A small world: item statistics, two input rankings drawn from the items,
/// and per-item variance predictions.
#[allow(clippy::type_complexity)]
fn arb_small_world(
) -> impl Strategy<Value = (Vec<ItemStats>, Vec<ItemId>, Vec<ItemId>, Vec<f64>, usize)> {
    (4usize..=8, 2usize..=4).prop_flat_map(|(num_items, depth)| {
        let ids: Vec<ItemId> = (1..=num_items as u64).map(ItemId).collect();
        (
            proptest::collection::vec(arb_stats(), num_items),
            Just(ids.clone()).prop_shuffle(),
            Just(ids).prop_shuffle(),
            proptest::collection::vec(0.0f64..30.0, num_items),
            Just(depth),
        )
    })
}

fn state_from(set: &RankingSet, stats: &[ItemStats]) -> ExperimentState {
    let mut state = ExperimentState::new(set);
    for (item, s) in set.universe().iter().zip(stats) {
        *state.item_mut(*item) = s.clone();
    }
    state
}

fn greedy_is_stepwise_optimal() -> Result<(), String> {
    let mut runner = TestRunner::new(PropConfig { cases: 48, ..PropConfig::default() });
    runner
        .run(&arb_small_world(), |(stats, order_a, order_b, predictions, depth)| {
            let ranking_a = Ranking::new(order_a[..depth].to_vec()).unwrap();
            let ranking_b = Ranking::new(order_b[..depth].to_vec()).unwrap();
            let set = RankingSet::new(vec![ranking_a, ranking_b]).unwrap();
            let state = state_from(&set, &stats);
            let settings = EvalSettings {
                click_model: ClickModelKind::Cascade,
                attraction_prior: 0.2,
                error_correction: false,
            };
            let predicted: BTreeMap<ItemId, f64> =
                set.universe().iter().copied().zip(predictions.iter().copied()).collect();
            let ev = Evaluator::new(&set, &state, &settings, &predicted).unwrap();
            let greedy = dirv_greedy(&ev, depth).unwrap();
            // At every position, the chosen item's gain must match the best
            // gain available among the items not yet placed.
            for pos in 0..depth {
                let prefix = &greedy.items()[..pos];
                let chosen_gain = ev.greedy_gain(greedy.items()[pos], prefix).unwrap();
                for &other in set.universe() {
                    if prefix.contains(&other) || other == greedy.items()[pos] {
                        continue;
                    }
                    let other_gain = ev.greedy_gain(other, prefix).unwrap();
                    prop_assert!(
                        chosen_gain >= other_gain - 1e-9,
                        "position {pos}: chose gain {chosen_gain}, item {other} offered \
                         {other_gain}"
                    );
                }
            }
            Ok(())
        })
        .map_err(|e| format!("greedy step-optimality: {e}"))
}

fn selection_minimizes_objective_when_unweighted() -> Result<(), String> {
    let mut runner = TestRunner::new(PropConfig { cases: 48, ..PropConfig::default() });
    runner
        .run(&arb_small_world(), |(stats, order_a, order_b, predictions, depth)| {
            let ranking_a = Ranking::new(order_a[..depth].to_vec()).unwrap();
            let ranking_b = Ranking::new(order_b[..depth].to_vec()).unwrap();
            let set = RankingSet::new(vec![ranking_a, ranking_b]).unwrap();
            let state = state_from(&set, &stats);
            let settings = EvalSettings {
                click_model: ClickModelKind::Cascade,
                attraction_prior: 0.2,
                error_correction: false,
            };
            let predicted: BTreeMap<ItemId, f64> =
                set.universe().iter().copied().zip(predictions.iter().copied()).collect();
            let ev = Evaluator::new(&set, &state, &settings, &predicted).unwrap();
            let selected = dirv_select(&ev, 0.0, depth).unwrap();
            let selected_f = ev.f_objective(&selected).unwrap();
            let mut candidates = vec![dirv_greedy(&ev, depth).unwrap()];
            candidates.extend(set.rankings().iter().cloned());
            for candidate in candidates {
                let f = ev.f_objective(&candidate).unwrap();
                prop_assert!(
                    selected_f <= f + 1e-9,
                    "selected objective {selected_f} beaten by candidate at {f}"
                );
            }
            Ok(())
        })
        .map_err(|e| format!("unweighted selection optimality: {e}"))
}

/// A fixed shallow ranking estimated from its own impressions: the
/// decomposition's recursive examination estimate is slightly optimistic at
/// depth, so the check is pinned at depth 3 where the estimate must land
/// within 5% of the closed-form truth.
fn shallow_estimates_land_near_truth() -> Result<(), String> {
    let attractions = [0.3, 0.2, 0.4];
    let means = [12.0, 7.0, 19.0];
    let mut items = BTreeMap::new();
    for (i, (&a, &m)) in attractions.iter().zip(&means).enumerate() {
        items.insert(
            ItemId(i as u64 + 1),
            ItemTruth {
                attraction: a,
                post_click: PostClickDist::Exponential { mean: m },
                variance_override: None,
            },
        );
    }
    let world = World::new(items);
    let presented = Ranking::new(vec![ItemId(1), ItemId(2), ItemId(3)]).unwrap();
    let other = Ranking::new(vec![ItemId(3), ItemId(2), ItemId(1)]).unwrap();
    let set = RankingSet::new(vec![presented.clone(), other]).unwrap();
    let truth = ground_truth_value(&presented, &world, &UserBehaviorKind::CascadeSim).unwrap();

    let mut total_relative_error = 0.0;
    let seeds = 30;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = ExperimentState::new(&set);
        for _ in 0..10_000 {
            let record =
                simulate_impression(&presented, &world, &UserBehaviorKind::CascadeSim, &mut rng)
                    .unwrap();
            state.record_impression(&set, &record);
            dirv::clickmodel::update_examination_counts(&mut state, &record);
        }
        let estimate =
            ranking_metric_estimate(&presented, &state, &ClickModelKind::Cascade, 0.0).unwrap();
        total_relative_error += (estimate - truth).abs() / truth;
    }
    let mean_relative_error = total_relative_error / seeds as f64;
    if mean_relative_error < 0.05 {
        Ok(())
    } else {
        Err(format!(
            "shallow estimate off truth by {:.2}% on average (need < 5%)",
            mean_relative_error * 100.0
        ))
    }
}

fn binary_error_worked_examples() -> Result<(), String> {
    let truth = PreferenceMatrix::new(vec![
        vec![0.0, 2.0, 1.0],
        vec![-2.0, 0.0, 3.0],
        vec![-1.0, -3.0, 0.0],
    ])
    .unwrap();
    let flipped = PreferenceMatrix::new(vec![
        vec![0.0, -2.0, -1.0],
        vec![2.0, 0.0, -3.0],
        vec![1.0, 3.0, 0.0],
    ])
    .unwrap();
    let one_pair_wrong = PreferenceMatrix::new(vec![
        vec![0.0, -2.0, 1.0],
        vec![2.0, 0.0, 3.0],
        vec![-1.0, -3.0, 0.0],
    ])
    .unwrap();
    let checks = [
        (binary_error(&truth, &truth).unwrap(), 0.0),
        (binary_error(&flipped, &truth).unwrap(), 1.0),
        (binary_error(&one_pair_wrong, &truth).unwrap(), 2.0 / 6.0),
    ];
    for (got, want) in checks {
        if (got - want).abs() > 1e-12 {
            return Err(format!("binary error example: got {got}, want {want}"));
        }
    }
    Ok(())
}

/// Monte-Carlo check of the accuracy bound in a setting where it is
/// non-vacuous: two single-item rankings with a wide true gap, estimated
/// from uniformly split impressions.
fn accuracy_bound_holds_when_informative() -> Result<(), String> {
    let mut items = BTreeMap::new();
    items.insert(
        ItemId(1),
        ItemTruth {
            attraction: 0.9,
            post_click: PostClickDist::ScaledBernoulli { rate: 0.5, value: 10.0 },
            variance_override: None,
        },
    );
    items.insert(
        ItemId(2),
        ItemTruth {
            attraction: 0.9,
            post_click: PostClickDist::ScaledBernoulli { rate: 0.5, value: 2.0 },
            variance_override: None,
        },
    );
    let world = World::new(items);
    let set = RankingSet::new(vec![
        Ranking::new(vec![ItemId(1)]).unwrap(),
        Ranking::new(vec![ItemId(2)]).unwrap(),
    ])
    .unwrap();
    let settings = EvalSettings {
        click_model: ClickModelKind::Cascade,
        attraction_prior: 0.0,
        error_correction: false,
    };
    let predicted: BTreeMap<ItemId, f64> = world
        .ids()
        .map(|d| (d, world.variance(d).unwrap()))
        .collect();

    let mut states = Vec::new();
    for run in 0..20 {
        let mut policy_rng = ChaCha8Rng::seed_from_u64(run * 2);
        let mut behavior_rng = ChaCha8Rng::seed_from_u64(run * 2 + 1);
        let mut state = ExperimentState::new(&set);
        for _ in 0..2000 {
            let index = ab_select(set.rankings(), &mut policy_rng).unwrap();
            let record = simulate_impression(
                &set.rankings()[index],
                &world,
                &UserBehaviorKind::CascadeSim,
                &mut behavior_rng,
            )
            .unwrap();
            state.record_impression(&set, &record);
            dirv::clickmodel::update_examination_counts(&mut state, &record);
        }
        states.push(state);
    }

    let check = check_error_bound(
        &set,
        &world,
        &UserBehaviorKind::CascadeSim,
        &states,
        &settings,
        &predicted,
    )
    .map_err(|e| format!("bound check: {e}"))?;
    if check.vacuous {
        return Err(format!("bound unexpectedly vacuous (mean bound {})", check.mean_bound));
    }
    if check.violated {
        return Err(format!(
            "bound violated: mean error {} above mean bound {}",
            check.mean_binary_error, check.mean_bound
        ));
    }
    Ok(())
}

#[test]
fn c6_analytic_properties_hold() {
    let checks: [(&str, Result<(), String>); 5] = [
        ("variance surrogate monotonicity", phi_properties()),
        ("greedy step-optimality", greedy_is_stepwise_optimal()),
        ("unweighted selection minimizes the objective", selection_minimizes_objective_when_unweighted()),
        ("shallow estimates within 5% of truth", shallow_estimates_land_near_truth()),
        ("pairwise error worked examples", binary_error_worked_examples()),
    ];
    let mut failures: Vec<String> = checks
        .into_iter()
        .filter_map(|(name, result)| result.err().map(|e| format!("{name}: {e}")))
        .collect();
    if let Err(e) = accuracy_bound_holds_when_informative() {
        failures.push(format!("accuracy bound: {e}"));
    }
    let pass = failures.is_empty();
    let detail = if pass {
        "surrogate monotone over 10,000 random inputs; greedy stepwise-optimal and unweighted \
         selection objective-minimal over 48 random small worlds each; shallow estimates within \
         5% of truth over 30 seeds; pairwise-error examples exact; accuracy bound informative \
         and unviolated over 20 uniform runs"
            .to_string()
    } else {
        failures.join(" | ")
    };
    verdict(6, "analytic properties hold", pass, &detail);
}

// ── Criterion 7: determinism ──────────────────────────────────────────────

#[test]
fn c7_runs_are_reproducible_byte_for_byte() {
    let mut pass = true;
    let mut detail = Vec::new();
    for policy in ["dirv", "tdm"] {
        let cfg = ExperimentConfig::parse(&format!(
            "policy = {policy}\n\
             dataset = ec\n\
             ec_num_items = 10\n\
             num_rankings = 3\n\
             depth = 4\n\
             num_impressions = 300\n\
             num_repeats = 3\n\
             checkpoint_interval = 50\n\
             seed = 9\n"
        ))
        .unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let path_a = emit_results(&run_simulation(&cfg).unwrap(), dir_a.path()).unwrap();
        let path_b = emit_results(&run_simulation(&cfg).unwrap(), dir_b.path()).unwrap();
        let bytes_a = std::fs::read(&path_a).unwrap();
        let bytes_b = std::fs::read(&path_b).unwrap();
        pass &= bytes_a == bytes_b;
        detail.push(format!(
            "{policy}: two runs at seed 9 wrote {} identical bytes",
            bytes_a.len()
        ));
    }
    verdict(7, "identical seeds give identical result files", pass, &detail.join("; "));
}
