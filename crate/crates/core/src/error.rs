use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree {degree} out of range (valid: {valid})")]
    Degree { degree: isize, valid: String },

    #[error("invalid simplicial complex: {0}")]
    Complex(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("operator assembly error: {0}")]
    Assembly(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("function is not finite at eigenvalue {eigenvalue:e}")]
    Domain { eigenvalue: f64 },

    #[error("sector error: {0}")]
    Sector(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("chain is not closed: boundary has {nonzero} nonzero coefficients")]
    Cycle { nonzero: usize },

    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn degree(degree: isize, lo: isize, hi: isize) -> Self {
        Error::Degree { degree, valid: format!("{lo}..={hi}") }
    }
}
