use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum CakeError {
    #[error("agent index {index} out of range for {n} agents")]
    AgentOutOfRange { index: usize, n: usize },

    #[error("interval [{left}, {right}] is not contained in [0, 1]")]
    IntervalOutOfRange { left: String, right: String },

    #[error("agent {agent} has only {available} left from {from}, needs {target}")]
    InsufficientValue {
        agent: usize,
        from: String,
        available: String,
        target: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid instance: {}", fmt_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid formula: {}", .0.join("; "))]
    InvalidFormula(Vec<String>),

    #[error("budget exceeded: {what} needs {required}, budget is {budget}")]
    BudgetExceeded {
        what: String,
        required: u128,
        budget: u128,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant broken: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, CakeError>;
