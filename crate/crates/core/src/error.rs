use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph parameters: {0}")]
    InvalidGraph(String),

    #[error("random regular graph with n={n}, d={d} not found after {attempts} attempts")]
    GenerationFailed { n: usize, d: usize, attempts: usize },

    #[error("invalid speeds: {0}")]
    InvalidSpeeds(String),

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("graph with {n} nodes exceeds dense cap of {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("lambda must lie in [0, 1), got {0}")]
    InvalidLambda(f64),

    #[error("beta must lie in (0, 2), got {0}")]
    InvalidBeta(f64),

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("divergence series not converged within {t_max} rounds (partial value {partial})")]
    UpsilonNotConverged { partial: f64, t_max: usize },

    #[error("{0}")]
    InvalidConfig(String),

    #[error("error history has {available} rounds, {requested} requested")]
    HistoryTooShort { available: usize, requested: usize },

    #[error("parse error in {path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
