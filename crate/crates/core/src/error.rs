use thiserror::Error;

/// Errors raised by the numerical routines and input parsers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("function is not coercive on the unit sphere (min {min:e}, max {max:e})")]
    NotCoercive { min: f64, max: f64 },

    #[error("radial integral diverges at the origin (n + p = {0})")]
    RadialDivergence(f64),

    #[error("max-of handle requires equal degrees, found {0} and {1}")]
    MixedDegrees(f64, f64),

    #[error("moment sequence has degree {have}, {needed} required")]
    InsufficientMoments { needed: usize, have: usize },

    #[error("no strictly feasible starting point found")]
    InfeasibleStart,

    #[error("Newton iteration stalled at barrier parameter {nu:e} (decrement {decrement:e})")]
    NewtonStall { nu: f64, decrement: f64 },

    #[error("outer solver made no progress: {0}")]
    NoProgress(String),

    #[error("matrix is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("convexity spot-check failed at {0} of the sampled midpoints")]
    NotConvex(usize),

    #[error("function failed the positive homogeneity check (residual {0:e})")]
    NotHomogeneous(f64),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotCoercive { .. }
                | Error::RadialDivergence(_)
                | Error::InfeasibleStart
                | Error::NewtonStall { .. }
                | Error::NoProgress(_)
                | Error::NotPositiveDefinite(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::NotCoercive { .. } => "NotCoercive",
            Error::RadialDivergence(_) => "RadialDivergence",
            Error::MixedDegrees(..) => "MixedDegrees",
            Error::InsufficientMoments { .. } => "InsufficientMoments",
            Error::InfeasibleStart => "InfeasibleStart",
            Error::NewtonStall { .. } => "NewtonStall",
            Error::NoProgress(_) => "NoProgress",
            Error::NotPositiveDefinite(_) => "NotPositiveDefinite",
            Error::NotConvex(_) => "NotConvex",
            Error::NotHomogeneous(_) => "NotHomogeneous",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
