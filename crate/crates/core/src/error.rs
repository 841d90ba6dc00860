use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameters, grid sizes or presets.
    #[error("configuration error: {0}")]
    Config(String),

    /// A function was evaluated outside its domain (negative production,
    /// price outside the invertible range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("zero pivot in tridiagonal solve at row {row}")]
    ZeroPivot { row: usize },

    #[error("non-finite value produced at time step {step}")]
    NonFinite { step: usize },

    /// Numerical failure inside a march, tagged with the time step.
    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// Numerical failure inside the outer learning loop.
    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step { step, source: Box::new(self) }
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::Iteration { iteration, source: Box::new(self) }
    }

    /// True for errors raised by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::ZeroPivot { .. } | Error::NonFinite { .. } => true,
            Error::Step { source, .. } | Error::Iteration { source, .. } => source.is_numerical(),
            Error::Config(_) | Error::Domain(_) => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
