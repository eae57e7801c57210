//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum VdError {
    /// Evaluation point too close to a pole of the requested function.
    #[error("point ({re:.6}, {im:.6}) within {dist:.3e} of a pole (guard {guard:.3e})")]
    PoleProximity {
        re: f64,
        im: f64,
        dist: f64,
        guard: f64,
    },

    /// Series or product failed to reach the target accuracy under the term cap.
    #[error("series/product not converged within {max_terms} terms")]
    NonConvergent { max_terms: usize },

    /// Index outside its admissible range.
    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    /// A parameter-space predicate failed.
    #[error("domain violation: {0}")]
    Domain(String),

    /// The shift-ratio condition a_s/a_l required by the operation fails.
    #[error("shift-ratio guard: {0}")]
    RatioGuard(String),

    /// Analytic continuation of an eigenfunction could not be carried out.
    #[error("continuation failure: {0}")]
    Continuation(String),

    /// Requested point sits on the critical pole set of the residue multipliers.
    #[error("critical pole: {0}")]
    CriticalPole(String),

    /// Point outside the strip where the continued eigenfunction is defined.
    #[error("out of strip: |Im x| = {im:.6} exceeds {limit:.6}")]
    OutOfStrip { im: f64, limit: f64 },

    /// Discretization cannot resolve the requested mode count.
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    /// Orthonormalization drifted beyond tolerance.
    #[error("loss of orthogonality: Gram residual {0:.3e}")]
    LossOfOrthogonality(f64),

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for VdError {
    fn from(e: std::io::Error) -> Self {
        VdError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VdError>;
