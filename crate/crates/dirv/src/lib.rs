//! Online evaluation of ranked lists by their post-click outcomes (revenue,
//! dwell time, conversions) rather than by clicks alone.
//!
//! The goal is to find which of several candidate rankings earns the best
//! expected post-click value, using as few user impressions as possible.
//! Instead of showing each candidate verbatim and averaging its outcomes,
//! the estimator decomposes a ranking's expected value into per-item click
//! probabilities (from a click model) times per-item expected values, so
//! every impression — whatever ranking was shown — sharpens the shared
//! per-item statistics that all candidate estimates are built from.
//!
//! On top of the estimator sits an interleaving policy that, at each
//! impression, presents the ranking expected to shrink the variance of the
//! candidate estimates the most. Two stabilizers guard it against its own
//! modeling assumptions: per-item variance predictions stand in for
//! unobserved variances before data accrues, and a model-agnostic
//! correction blends the click model's probabilities toward each
//! candidate's own observed click-through rates, which also creates
//! pressure to occasionally present candidates verbatim.
//!
//! The crate is organized bottom-up:
//!
//! - [`types`]: rankings, impression records, accumulated counters, and
//!   pairwise preference matrices;
//! - [`clickmodel`]: click models (cascade and position-based) mapping
//!   attraction estimates to examination and click probabilities;
//! - [`estimator`]: per-item statistics, variance prediction, the click
//!   blend, and the per-ranking metric estimates;
//! - [`objective`]: the per-position variance surrogate and the evaluator
//!   that scores hypothetical presentations;
//! - [`interleave`]: the greedy variance-minimizing policy plus team-draft
//!   multileaving and uniform A/B baselines;
//! - [`sim`]: synthetic worlds, user behavior simulation, and closed-form
//!   ground truth;
//! - [`harness`]: seeded end-to-end simulation and replay runs with CSV
//!   checkpoint output.

#![forbid(unsafe_code)]

pub mod clickmodel;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod interleave;
pub mod objective;
pub mod sim;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    Estimate, ExperimentState, ImpressionRecord, ItemId, ItemStats, PerRankingStats,
    PreferenceMatrix, Ranking, RankingSet,
};
