use thiserror::Error;

/// Errors produced while loading, validating or repairing data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: unknown attribute `{name}`")]
    UnknownAttribute { line: usize, name: String },

    #[error("line {line}: {message}")]
    InvalidDeclaration { line: usize, message: String },

    #[error("line {line}: rule is a tautology (component on `{attr}` is empty)")]
    Tautology { line: usize, attr: String },

    #[error("line {line}: rule is a contradiction (every component covers the full domain)")]
    Contradiction { line: usize },

    #[error("line {line}: rule involves key attribute `{attr}`")]
    RuleOnKey { line: usize, attr: String },

    #[error("sufficient set generation exceeded the cap of {cap} rules")]
    SufficientSetCap { cap: usize },

    #[error("the edit rules are unsatisfiable")]
    Unsatisfiable,

    #[error("search space of {size} assignments exceeds the oracle cap of {cap}")]
    OracleCap { size: u128, cap: u128 },

    #[error("row {row}: key attribute `{attr}` is null")]
    NullKey { row: usize, attr: String },

    #[error("relations are not aligned: {0}")]
    Alignment(String),

    #[error("repair set is empty")]
    EmptyRepairSet,

    #[error("malformed input: {0}")]
    Input(String),

    #[error("preference table for `{attr}`: {message}")]
    Preference { attr: String, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
