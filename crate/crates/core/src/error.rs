use thiserror::Error;

/// Errors produced by the rsbox library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("rule arity {k} exceeds dimension {n}")]
    Dimension { k: usize, n: usize },

    #[error("dimension {n} exceeds the supported maximum {max}")]
    TooLarge { n: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("metric undefined: the map is not a bijection")]
    NotBijective,

    #[error("matrix is singular")]
    Singular,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search budget of {budget} candidates exceeded")]
    BudgetExceeded {
        budget: u64,
        /// Generators found before the budget ran out.
        partial: Vec<crate::search::LiftingReport>,
        /// Next candidate index to process in each worker range.
        resume: crate::search::ResumeToken,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
