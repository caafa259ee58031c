use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("hyperedge size {size} outside [2, {max}]")]
    EdgeSize { size: usize, max: usize },

    #[error("edge probability {0} exceeds 1")]
    ProbabilityAboveOne(f64),

    #[error("index {index} out of range for {count} multisets")]
    IndexOutOfRange { index: u64, count: u64 },

    #[error("instance too large for enumeration ({0} candidate hyperedges)")]
    TooLarge(u128),

    #[error("duplicate hyperedge {0}")]
    DuplicateEdge(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("eigensolver did not converge after {matvecs} products (residuals {residuals:?})")]
    NoConvergence { matvecs: usize, residuals: Vec<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from numerics rather than from user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::ProbabilityAboveOne(_) | Error::Infeasible(_)
        )
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
