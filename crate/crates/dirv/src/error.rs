//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

use crate::types::ItemId;

#[derive(Debug, Error)]
pub enum Error {
    /// A ranking was constructed with a repeated item.
    #[error("ranking contains item {0} more than once")]
    DuplicateItem(ItemId),

    /// A ranking set needs at least two rankings to compare.
    #[error("a ranking set needs at least two rankings, got {0}")]
    TooFewRankings(usize),

    /// Clicks / post-click values are not aligned with the ranking.
    #[error("malformed impression record: {0}")]
    MalformedRecord(String),

    /// An item was looked up that the current context does not know about.
    #[error("unknown item {0}")]
    UnknownItem(ItemId),

    /// A per-ranking quantity was requested for an item outside that ranking.
    #[error("item {item} does not appear in ranking {ranking}")]
    ItemNotInRanking { item: ItemId, ranking: usize },

    /// Probabilities and other numeric fields must stay in their domain.
    #[error("invalid value: {0}")]
    InvalidValue(String),

    /// A preference matrix failed its shape or antisymmetry check.
    #[error("invalid preference matrix: {0}")]
    InvalidMatrix(String),

    /// Two preference matrices (or other aligned structures) disagree in size.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The sign-accuracy bound is undefined when two rankings are truly tied.
    #[error("ground-truth preference between rankings {0} and {1} is zero; the bound is undefined")]
    TiedTruth(usize, usize),

    /// Experiment configuration problems (bad keys, bad values, bad combinations).
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data files.
    #[error("data error in {path}: {message}")]
    Data { path: PathBuf, message: String },

    /// Replay ran out of logged impressions for every candidate ranking.
    #[error("replay pool exhausted: no candidate ranking has logged impressions left")]
    ReplayExhausted,

    #[error("failed to access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Data { path: path.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
