use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the closed unit disc, or a pole of a factor was hit.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition of the called operation does not hold.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rootfinder did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    RootFinding {
        iterations: usize,
        worst_residual: f64,
    },

    /// Numerically impossible outcome, e.g. a preimage of an interior
    /// point landing on the unit circle.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("composite degree {degree} exceeds cap {cap}; use nested evaluation instead")]
    Capacity { degree: u64, cap: u64 },

    #[error("boundary angle {theta} is within {tolerance:e} of the zero argument {zero_arg} (step {step:?})")]
    Singularity {
        theta: f64,
        zero_arg: f64,
        tolerance: f64,
        step: Option<usize>,
    },

    #[error("Blaschke sum of the supplied zeros looks divergent (last-decade increment {increment:e})")]
    DivergentBlaschkeSum { increment: f64 },

    #[error("generator {index} has vanishing derivative at the origin; Frostman term undefined")]
    DegreeCollapse { index: usize },

    #[error("generator {index} is not normalized: b'(0) = {re} + {im}i is not real positive")]
    NotNormalized { index: usize, re: f64, im: f64 },
}

impl Error {
    /// Attach a step index to a singularity error raised while iterating.
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            Error::Singularity {
                theta,
                zero_arg,
                tolerance,
                ..
            } => Error::Singularity {
                theta,
                zero_arg,
                tolerance,
                step: Some(step),
            },
            other => other,
        }
    }
}
