//! Experiment configuration: a flat `key = value` file with `#` comments.
//! Unknown or inapplicable keys are hard errors so typos cannot silently
//! fall back to defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::clickmodel::ClickModelKind;
use crate::error::{Error, Result};
use crate::sim::UserBehaviorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Replay,
}

/// Which presentation policy drives the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    /// Variance-minimizing interleaving with both stabilizers.
    Dirv,
    /// Ablation: variance prediction disabled (cold items predict 0).
    DirvNoVarPred,
    /// Ablation: the model-agnostic correction disabled.
    DirvNoErrCorr,
    /// Team-draft multileaving baseline.
    Tdm,
    /// Uniform A/B presentation baseline.
    Ab,
}

impl PolicyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dirv" => Ok(PolicyKind::Dirv),
            "dirv_no_varpred" => Ok(PolicyKind::DirvNoVarPred),
            "dirv_no_errcorr" => Ok(PolicyKind::DirvNoErrCorr),
            "tdm" => Ok(PolicyKind::Tdm),
            "ab" => Ok(PolicyKind::Ab),
            other => Err(Error::Config(format!(
                "unknown policy {other:?} (expected dirv, dirv_no_varpred, dirv_no_errcorr, \
                 tdm, or ab)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Dirv => "dirv",
            PolicyKind::DirvNoVarPred => "dirv_no_varpred",
            PolicyKind::DirvNoErrCorr => "dirv_no_errcorr",
            PolicyKind::Tdm => "tdm",
            PolicyKind::Ab => "ab",
        }
    }

    /// Whether this policy blends model click probabilities with per-ranking
    /// click-through rates (and pays the verbatim-presentation objective).
    pub fn error_correction(self) -> bool {
        matches!(self, PolicyKind::Dirv | PolicyKind::DirvNoVarPred)
    }
}

/// Where items and input rankings come from in simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    /// Synthetic e-commerce items with revenue-style post-click values.
    Ec { num_items: usize },
    /// Relevance-labeled items with one input ranking per feature column.
    Letor {
        relevance_file: PathBuf,
        feature_file: PathBuf,
        /// Feature columns to build rankings from; defaults to all columns.
        features: Option<Vec<String>>,
        /// Number of candidate items subsampled per repeat.
        candidates: usize,
    },
    /// Items read from a news-style table with reported dwell variance.
    News { world_file: PathBuf },
}

/// Source of predicted per-item variances.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictorSpec {
    OracleNoise,
    Constant(f64),
    Table(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub dataset: DatasetSpec,
    pub policy: PolicyKind,
    /// Weight of the verbatim-presentation objective in the final choice.
    pub gamma: f64,
    pub num_impressions: u64,
    pub num_repeats: u64,
    pub num_rankings: usize,
    pub depth: usize,
    /// Items shared across all input rankings (degree of duplication).
    pub duplication_k: usize,
    pub seed: u64,
    pub checkpoint_interval: u64,
    pub out: PathBuf,
    pub click_model: ClickModelKind,
    pub behavior: UserBehaviorKind,
    pub predictor: PredictorSpec,
    pub attraction_prior: f64,
    /// Validation warnings gathered while assembling the config.
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(Self::pairs_of(text)?)
    }

    /// Loads a config file with `key = value` overrides applied on top
    /// (an override replaces the file's value for that key). The merged
    /// result is validated as a whole, so overrides cannot sidestep any
    /// rule the file itself is held to.
    pub fn from_file_with_overrides(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Self::pairs_of(&text)?;
        for (key, value) in overrides {
            pairs.insert(key.clone(), value.clone());
        }
        Self::from_pairs(pairs)
    }

    fn pairs_of(text: &str) -> Result<BTreeMap<String, String>> {
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got {line:?}", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if pairs.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }
        Ok(pairs)
    }

    fn from_pairs(mut pairs: BTreeMap<String, String>) -> Result<Self> {
        let mut take = |key: &str| pairs.remove(key);
        let parse_u64 = |key: &str, value: String| -> Result<u64> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("{key} must be a nonnegative integer")))
        };
        let parse_usize = |key: &str, value: String| -> Result<usize> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("{key} must be a nonnegative integer")))
        };
        let parse_f64 = |key: &str, value: String| -> Result<f64> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("{key} must be a finite number")))
        };
        let parse_probs = |key: &str, value: String| -> Result<Vec<f64>> {
            value
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("{key} must be comma-separated numbers")))
                })
                .collect()
        };

        let mode = match take("mode").as_deref() {
            None | Some("simulate") => Mode::Simulate,
            Some("replay") => Mode::Replay,
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown mode {other:?} (expected simulate or replay)"
                )))
            }
        };

        let policy = match take("policy") {
            Some(v) => PolicyKind::parse(&v)?,
            None => PolicyKind::Dirv,
        };

        let gamma = match take("gamma") {
            Some(v) => parse_f64("gamma", v)?,
            None => 1.0,
        };
        if gamma < 0.0 {
            return Err(Error::Config("gamma must be nonnegative".into()));
        }

        let num_impressions = match take("num_impressions") {
            Some(v) => parse_u64("num_impressions", v)?,
            None => 10_000,
        };
        let num_repeats = match take("num_repeats") {
            Some(v) => parse_u64("num_repeats", v)?,
            None => 30,
        };
        if num_repeats == 0 {
            return Err(Error::Config("num_repeats must be at least 1".into()));
        }
        let num_rankings = match take("num_rankings") {
            Some(v) => parse_usize("num_rankings", v)?,
            None => 5,
        };
        if num_rankings < 2 {
            return Err(Error::Config("num_rankings must be at least 2".into()));
        }
        let depth = match take("depth") {
            Some(v) => parse_usize("depth", v)?,
            None => 10,
        };
        if depth == 0 {
            return Err(Error::Config("depth must be at least 1".into()));
        }
        let duplication_k = match take("duplication_k") {
            Some(v) => parse_usize("duplication_k", v)?,
            None => 0,
        };
        if duplication_k > depth {
            return Err(Error::Config(format!(
                "duplication_k {duplication_k} cannot exceed depth {depth}"
            )));
        }
        let seed = match take("seed") {
            Some(v) => parse_u64("seed", v)?,
            None => 0,
        };
        let checkpoint_interval = match take("checkpoint_interval") {
            Some(v) => parse_u64("checkpoint_interval", v)?,
            None => 100,
        };
        if checkpoint_interval == 0 {
            return Err(Error::Config("checkpoint_interval must be at least 1".into()));
        }
        let out = PathBuf::from(take("out").unwrap_or_else(|| "results".into()));
        let attraction_prior = match take("attraction_prior") {
            Some(v) => parse_f64("attraction_prior", v)?,
            None => 0.0,
        };
        if !(0.0..=1.0).contains(&attraction_prior) {
            return Err(Error::Config("attraction_prior must be in [0, 1]".into()));
        }

        let click_model = match take("click_model").as_deref() {
            None | Some("cascade") => ClickModelKind::Cascade,
            Some("position_based") => {
                let probs = take("click_model_position_probs").ok_or_else(|| {
                    Error::Config(
                        "click_model = position_based needs click_model_position_probs".into(),
                    )
                })?;
                ClickModelKind::PositionBased {
                    position_probs: parse_probs("click_model_position_probs", probs)?,
                }
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown click_model {other:?} (expected cascade or position_based)"
                )))
            }
        };
        let mut warnings = click_model.validate()?;

        let behavior = match take("behavior").as_deref() {
            None | Some("cascade_sim") => UserBehaviorKind::CascadeSim,
            Some("position_based_sim") => {
                let probs = take("behavior_position_probs").ok_or_else(|| {
                    Error::Config(
                        "behavior = position_based_sim needs behavior_position_probs".into(),
                    )
                })?;
                UserBehaviorKind::PositionBasedSim {
                    position_probs: parse_probs("behavior_position_probs", probs)?,
                }
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown behavior {other:?} (expected cascade_sim or position_based_sim)"
                )))
            }
        };
        behavior.validate()?;

        let predictor = match take("predictor").as_deref() {
            None | Some("oracle_noise") => PredictorSpec::OracleNoise,
            Some("constant") => {
                let v = take("predictor_constant").ok_or_else(|| {
                    Error::Config("predictor = constant needs predictor_constant".into())
                })?;
                let v = parse_f64("predictor_constant", v)?;
                if v < 0.0 {
                    return Err(Error::Config("predictor_constant must be nonnegative".into()));
                }
                PredictorSpec::Constant(v)
            }
            Some("table") => {
                let path = take("predictor_table").ok_or_else(|| {
                    Error::Config("predictor = table needs predictor_table".into())
                })?;
                PredictorSpec::Table(PathBuf::from(path))
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown predictor {other:?} (expected oracle_noise, constant, or table)"
                )))
            }
        };

        let dataset = match take("dataset").as_deref() {
            None | Some("ec") => {
                let num_items = match take("ec_num_items") {
                    Some(v) => parse_usize("ec_num_items", v)?,
                    None => 50,
                };
                if num_items == 0 {
                    return Err(Error::Config("ec_num_items must be at least 1".into()));
                }
                DatasetSpec::Ec { num_items }
            }
            Some("letor") => {
                let relevance_file = take("relevance_file").ok_or_else(|| {
                    Error::Config("dataset = letor needs relevance_file".into())
                })?;
                let feature_file = take("feature_file").ok_or_else(|| {
                    Error::Config("dataset = letor needs feature_file".into())
                })?;
                let features = take("features").map(|v| {
                    v.split(',').map(|f| f.trim().to_string()).collect::<Vec<_>>()
                });
                let candidates = match take("letor_candidates") {
                    Some(v) => parse_usize("letor_candidates", v)?,
                    None => 20,
                };
                DatasetSpec::Letor {
                    relevance_file: PathBuf::from(relevance_file),
                    feature_file: PathBuf::from(feature_file),
                    features,
                    candidates,
                }
            }
            Some("news") => {
                let world_file = take("news_world_file").ok_or_else(|| {
                    Error::Config("dataset = news needs news_world_file".into())
                })?;
                DatasetSpec::News { world_file: PathBuf::from(world_file) }
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown dataset {other:?} (expected ec, letor, or news)"
                )))
            }
        };

        if mode == Mode::Replay {
            if policy == PolicyKind::Tdm {
                return Err(Error::Config(
                    "tdm is not supported in replay: logged impressions carry no team \
                     assignments"
                        .into(),
                ));
            }
            if predictor == PredictorSpec::OracleNoise {
                return Err(Error::Config(
                    "the oracle_noise predictor needs ground truth; use constant or table \
                     in replay"
                        .into(),
                ));
            }
        }
        if let DatasetSpec::Ec { num_items } = dataset {
            if mode == Mode::Simulate && num_items < depth {
                return Err(Error::Config(format!(
                    "ec_num_items {num_items} is smaller than depth {depth}"
                )));
            }
        }

        if !pairs.is_empty() {
            let keys: Vec<String> = pairs.into_keys().collect();
            return Err(Error::Config(format!(
                "unknown or inapplicable config keys: {}",
                keys.join(", ")
            )));
        }

        if policy == PolicyKind::DirvNoVarPred && predictor != PredictorSpec::OracleNoise {
            warnings.push(
                "policy dirv_no_varpred ignores the configured predictor for ranking \
                 construction (it always predicts 0)"
                    .into(),
            );
        }

        Ok(ExperimentConfig {
            mode,
            dataset,
            policy,
            gamma,
            num_impressions,
            num_repeats,
            num_rankings,
            depth,
            duplication_k,
            seed,
            checkpoint_interval,
            out,
            click_model,
            behavior,
            predictor,
            attraction_prior,
            warnings,
        })
    }
}
