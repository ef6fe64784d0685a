use std::io;

use thiserror::Error;

use crate::smt::QueryRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contradictory literal: {0} appears with both polarities")]
    ContradictoryLiteral(String),

    #[error("duplicate variable declaration: {0}")]
    DuplicateVariable(String),

    #[error("invalid variable name: {0:?}")]
    InvalidName(String),

    #[error("unknown variable: {0}")]
    UnknownVariable(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("explicit state space too large: {vars} variables exceeds cap of {cap}")]
    ExplicitStateTooLarge { vars: usize, cap: usize },

    #[error("state space too large for brute-force rd: {states} states exceeds cap of {cap}")]
    RdBruteforceTooLarge { states: usize, cap: usize },

    #[error("invalid step count k={0}; must be at least 1")]
    InvalidStepCount(u64),

    #[error("solver error: {message}")]
    Solver {
        message: String,
        /// Queries answered before the failure.
        log: Vec<QueryRecord>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid JSON system: {0}")]
    Json(#[from] serde_json::Error),

    #[error("generator error: {0}")]
    Generator(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Short machine-readable tag, printed by the CLI on failure.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ContradictoryLiteral(_) => "contradictory-literal",
            Error::DuplicateVariable(_) => "duplicate-variable",
            Error::InvalidName(_) => "invalid-name",
            Error::UnknownVariable(_) => "unknown-variable",
            Error::DomainMismatch(_) => "domain-mismatch",
            Error::ExplicitStateTooLarge { .. } => "explicit-state-too-large",
            Error::RdBruteforceTooLarge { .. } => "rd-bruteforce-too-large",
            Error::InvalidStepCount(_) => "invalid-step-count",
            Error::Solver { .. } => "solver-error",
            Error::Parse { .. } => "parse-error",
            Error::Json(_) => "parse-error",
            Error::Generator(_) => "generator-error",
            Error::Config(_) => "config-error",
            Error::Csv(_) => "io-error",
            Error::Io(_) => "io-error",
        }
    }
}
