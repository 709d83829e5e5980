use thiserror::Error;

use crate::bethe::{BetheRoots, ResidualReport};

#[derive(Debug, Error)]
pub enum Error {
    #[error("root finder did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("zero input where a nonzero value is required")]
    ZeroInput,
    #[error("invalid indices: {0}")]
    BadIndices(String),
    #[error("{what}: remainder {remainder:.3e} exceeds tolerance")]
    NotDivisible { what: String, remainder: f64 },
    #[error("determinant vanishes identically")]
    ZeroDeterminant,
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("denominator vanishes at {0}")]
    PoleHit(String),
    #[error("Newton iteration failed from every start (best residual {:.3e})", best.1.max_abs)]
    NoConvergence { best: Box<(BetheRoots, ResidualReport)> },
    #[error("linear system is inconsistent (relative residual {residual:.3e})")]
    Inconsistent { residual: f64 },
    #[error("twists are q-lattice related: {0}")]
    DegenerateTwists(String),
    #[error("Vandermonde factor vanishes")]
    VandermondeDegenerate,
    #[error("known data has vanishing constant term")]
    ZeroConstantTerm,
    #[error("identity check failed: {what} (residual {residual:.3e})")]
    IdentityFailure { what: String, residual: f64 },
    #[error("result is not a polynomial: {what} (remainder {remainder:.3e})")]
    NotPolynomial { what: String, remainder: f64 },
    #[error("minor mismatch at step {step} (residual {residual:.3e})")]
    MinorMismatch { step: usize, residual: f64 },
    #[error("degenerate twist: {0}")]
    DegenerateTwist(String),
    #[error("degree mismatch: {0}")]
    BadDegrees(String),
    #[error("Wronskian does not match: residual {residual:.3e}")]
    WronskianMismatch { residual: f64 },
    #[error("pole of t(z) at Bethe root {index} (remainder {remainder:.3e})")]
    PoleAtBetheRoot { index: usize, remainder: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at(stage: &str) -> impl FnOnce(Error) -> Error + '_ {
        move |source| Error::Stage { stage: stage.to_string(), source: Box::new(source) }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
