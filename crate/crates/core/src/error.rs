use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("net scale rho must be positive, got {0}")]
    InvalidRho(f64),
    #[error("subspace net resolution zeta must lie in (0, 1), got {0}")]
    InvalidZeta(f64),
    #[error("net would need more than {cap} elements")]
    NetTooLarge { cap: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    InvalidDimension { expected: usize, got: usize },
    #[error("generalized Jung needs 1 <= j <= i <= d, got i={i}, j={j}, d={d}")]
    InvalidDims { i: usize, j: usize, d: usize },
    #[error("psi has no improved slack at beta={beta}")]
    NoImprovedSlack { beta: f64 },
    #[error("beta must be positive, got {0}")]
    InvalidBeta(f64),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("xi must lie in (0, 1), got {0}")]
    InvalidXi(f64),
    #[error("eps must lie in (0, 1/(d+1)], got {0}")]
    InvalidEps(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid sampler spec: {0}")]
    InvalidSpec(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("instance is infeasible: {0}")]
    Infeasible(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
