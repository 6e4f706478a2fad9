use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown gallery family `{0}` (expected ag, tree_omega, star, nondual or two_row)")]
    InvalidGallery(String),
    #[error("space has a single point and therefore no molecules")]
    EmptySpace,
    #[error("operands are defined on different metric spaces")]
    SpaceMismatch,
    #[error("space has {points} points but the oracle cap is {cap}")]
    TooLarge { points: usize, cap: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("unknown point label `{0}`")]
    UnknownPoint(String),
    #[error("malformed input at `{path}`: {message}")]
    Malformed { path: String, message: String },
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Prefixes the JSON path of a [`Error::Malformed`] error.
    pub fn at(self, prefix: &str) -> Self {
        match self {
            Error::Malformed { path, message } => Error::Malformed {
                path: if path.is_empty() {
                    prefix.to_string()
                } else {
                    format!("{prefix}{path}")
                },
                message,
            },
            other => other,
        }
    }
}
