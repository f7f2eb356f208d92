//! Crate-wide error type.

use thiserror::Error;

/// Errors produced while loading instances, building models or solving them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("unknown {kind} id `{id}` referenced by {context}")]
    UnknownId {
        kind: &'static str,
        id: String,
        context: String,
    },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("missing event time for train `{train}` at platform `{platform}`")]
    MissingEvent { train: String, platform: String },

    #[error("duplicate event time for train `{train}` at platform `{platform}`")]
    DuplicateEvent { train: String, platform: String },

    #[error("missing {kind} window for {key}")]
    MissingWindow { kind: &'static str, key: String },

    #[error("window for {key} has lower bound {lo} above upper bound {hi}")]
    ReversedWindow { key: String, lo: f64, hi: f64 },

    #[error(
        "cannot derive a finite big-M for pair {pair}: event domains are unbounded; \
         set a fixed big-M or a finite deviation limit"
    )]
    UnboundedBigM { pair: String },

    #[error("model has {count} pairs, above the exhaustive-search cap of {cap}")]
    TooManyPairs { count: usize, cap: usize },

    #[error("numerical failure in the LP solver: {0}")]
    Numerical(String),

    #[error("iteration limit of {0} exceeded in the LP solver")]
    IterationLimit(usize),

    #[error("mps export: {0}")]
    MpsExport(String),

    #[error("generator spec infeasible: {0}")]
    GenSpec(String),

    #[error("energy report: {0}")]
    Energy(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
