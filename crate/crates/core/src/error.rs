use thiserror::Error;

use crate::game::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid mass distribution: {0}")]
    InvalidDistribution(String),

    #[error("{operation} requires {requirement}")]
    UnsupportedModel {
        operation: &'static str,
        requirement: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("series diverges for alpha = {alpha}; use a finite horizon")]
    Diverges { alpha: f64 },

    #[error("resource constraint is slack at mu1 = {mu1}; drift derivative is {derivative}")]
    SlackConstraint { mu1: f64, derivative: f64 },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("{}: {}", v.path, v.message))
        .collect::<Vec<_>>()
        .join("; ")
}
