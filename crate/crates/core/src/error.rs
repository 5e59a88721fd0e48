use thiserror::Error;

use crate::quantum::QubitLabel;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit {0} appears in both registers")]
    OverlappingLabels(QubitLabel),

    #[error("qubit {0} is not part of the register")]
    UnknownLabel(QubitLabel),

    #[error("register mismatch: {0}")]
    RegisterMismatch(String),

    #[error("matrix is not unitary (max deviation of U^dag U from identity: {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("requested measurement branch has zero probability")]
    ZeroProbability,

    #[error("index {index} out of range 0..{bound}")]
    OutOfRange { index: usize, bound: usize },

    #[error("GHZ branch patterns are not bitwise complements")]
    NonComplementary,

    #[error("missing measurement setting `{0}`")]
    MissingSetting(String),

    #[error("measurement setting `{0}` has zero total counts")]
    EmptySetting(String),

    #[error("conditional state undefined: herald amplitude vanishes at the requested detection times")]
    UndefinedConditionalState,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
