use thiserror::Error;

/// Errors raised by the estimation routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "quadrature did not reach tolerance: estimate {value:e}, error bound {abs_error:e} after {intervals} subintervals"
    )]
    Quadrature {
        value: f64,
        abs_error: f64,
        intervals: usize,
    },

    #[error("fixed-point iteration failed after {iterations} steps (beta = {beta:e}, residual = {residual:e})")]
    FixedPoint {
        iterations: usize,
        beta: f64,
        residual: f64,
    },

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("log-concavity violated at abscissa {abscissa:e}")]
    NotLogConcave { abscissa: f64 },

    #[error("density cannot be normalized: {0}")]
    Unnormalizable(String),

    #[error("sampler failed at iteration {iteration}: {source}")]
    Chain {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("bootstrap failed: {failed} of {total} replicates gave no usable estimate")]
    Bootstrap { failed: usize, total: usize },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
