use thiserror::Error;

/// Errors raised by the sampling, collocation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OcsError {
    #[error("invalid Zernike index: n = {n}, m = {m} (need |m| <= n and n - m even)")]
    InvalidIndex { n: i64, m: i64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("size mismatch: expected {expected}, got {actual} ({context})")]
    SizeMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("collocation matrix is numerically singular (pivot ratio {ratio:.3e})")]
    Singular { ratio: f64 },

    #[error("least-squares system is rank deficient: numerical rank {rank} < {cols}")]
    RankDeficient { rank: usize, cols: usize },

    #[error("ring index {index} out of range (pattern has {rings} rings)")]
    RingOutOfRange { index: usize, rings: usize },

    #[error("quadrature did not reach tolerance {tolerance:.1e} (last change {change:.3e})")]
    NoConvergence { tolerance: f64, change: f64 },

    #[error("wrong matrix mode: expected {expected}")]
    WrongMode { expected: &'static str },

    #[error("could not serialize output: {0}")]
    Serialization(String),
}

impl OcsError {
    /// True for failures of the numerics (as opposed to bad arguments).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            OcsError::Singular { .. }
                | OcsError::RankDeficient { .. }
                | OcsError::NoConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, OcsError>;
