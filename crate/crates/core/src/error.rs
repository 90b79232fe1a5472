use thiserror::Error;

use crate::free_energy::Regime;

#[derive(Debug, Error)]
pub enum PottsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("composition grid has {atoms} atoms, above the cap of {cap}; use the MCMC fallback")]
    GridTooLarge { atoms: u128, cap: u128 },

    #[error("brute force needs {configs} configurations, above the cap of {cap}")]
    BruteForceTooLarge { configs: u128, cap: u128 },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("ambiguous classification: {0}")]
    AmbiguousClassification(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no atom lies within distance {eps} of the center")]
    EmptyRestriction { eps: f64 },

    #[error("score has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("bracket failure: {0}")]
    BracketFailure(String),

    #[error("regime mismatch: expected {expected:?}, found {found:?}")]
    RegimeMismatch { expected: Regime, found: Regime },

    #[error("balls of radius {eps} overlap (closest maximizers at distance {min_distance})")]
    OverlappingBalls { eps: f64, min_distance: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

/// Coarse grouping of errors, used by the command-line front end to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Degenerate,
    Regime,
}

impl PottsError {
    pub fn class(&self) -> ErrorClass {
        match self {
            PottsError::InvalidParameter(_)
            | PottsError::Io(_)
            | PottsError::Json(_)
            | PottsError::Csv(_)
            | PottsError::Parse(_) => ErrorClass::Config,
            PottsError::RegimeMismatch { .. } => ErrorClass::Regime,
            _ => ErrorClass::Degenerate,
        }
    }
}

pub type Result<T> = std::result::Result<T, PottsError>;
