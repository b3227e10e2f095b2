use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFiniteEvaluation { x: f64 },

    #[error("quadrature did not converge: value {value}, error estimate {error_estimate}")]
    NonConvergence { value: f64, error_estimate: f64 },

    #[error("model `{0}` has no density; use the characteristic-function path")]
    NoDensity(String),

    #[error("x = {x} is outside the support of the model")]
    OutOfSupport { x: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("classical moment of order {order} is undefined")]
    Undefined { order: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parameter {index} at {value} leaves no room for a finite-difference step of {step}")]
    StepUnderflow { index: usize, value: f64, step: f64 },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("empty grid: {0}")]
    EmptyGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("weak moment of order {order}: {source}")]
    AtOrder {
        order: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Whether the error stems from bad input (as opposed to a numeric
    /// failure on valid input).
    pub fn is_usage(&self) -> bool {
        match self {
            Self::InvalidParameter(_)
            | Self::DimensionMismatch(_)
            | Self::UnknownExperiment(_)
            | Self::EmptyGrid(_)
            | Self::Parse(_)
            | Self::Unsupported(_)
            | Self::NoDensity(_) => true,
            Self::AtOrder { source, .. } => source.is_usage(),
            _ => false,
        }
    }

    pub(crate) fn at_order(self, order: u32) -> Self {
        Error::AtOrder {
            order,
            source: Box::new(self),
        }
    }
}
