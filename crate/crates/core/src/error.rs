use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty projection")]
    EmptyProjection,

    #[error("vertex index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("disk covers torus: pi r^2 = {area} >= 1")]
    DiskCoversTorus { area: f64 },

    #[error("quadrature did not reach tolerance {tol:e} within {steps} refinements")]
    QuadratureDiverged { tol: f64, steps: usize },

    #[error("plan needs {requested} point placements, budget is {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },

    /// A hard invariant failed on computed data.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
