use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("degenerate weight vector: {0}")]
    DegenerateWeights(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("value out of domain: {0}")]
    OutOfDomain(String),

    #[error("zero feature marginal at feature vector {0:?}")]
    ZeroMarginal(Vec<usize>),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("unsmoothed fit with empty class {0}")]
    EmptyClass(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bisection did not converge after {iterations} iterations (bracket [{lo}, {hi}])")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("empty candidate set")]
    EmptyCandidates,

    #[error("vertex enumeration needs {count} vertices, cap is {cap}")]
    TooManyVertices { count: u128, cap: usize },

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("metric `{metric}` is absent for instance {instance}")]
    MissingMetric { metric: String, instance: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
