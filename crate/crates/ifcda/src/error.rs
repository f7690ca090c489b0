//! Crate-wide error type. Variants map one-to-one onto the CLI exit-code
//! categories (config / file / data / pipeline).

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent configuration (bad key, bad value, bad grid).
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem failure while reading or writing an artifact.
    #[error("file error: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Structurally malformed input file (ragged rows, truncated binary, ...).
    #[error("format error: {0}")]
    Format(String),

    /// Structurally valid input carrying invalid values (non-finite entries,
    /// dimension mismatches).
    #[error("data error: {0}")]
    Data(String),

    /// Digital label outside the permitted range.
    #[error("label error: {0}")]
    Label(String),

    /// Out-of-range hyperparameter or operation argument.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Label propagation system is singular or near-singular.
    #[error("propagation error: {0}")]
    Propagation(String),

    /// A probability column could not be normalized (zero mass).
    #[error("normalization error: {0}")]
    Normalization(String),

    /// A loss term degenerated (zero class mass where positive mass is required).
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    /// Eigensolver or factorization failure.
    #[error("solver error: {0}")]
    Solver(String),

    /// Metric computation over inconsistent prediction/truth vectors.
    #[error("metric error: {0}")]
    Metric(String),

    /// Failure inside the alternating optimization loop, annotated with the
    /// iteration at which it occurred.
    #[error("pipeline error at iteration {iteration}: {source}")]
    Pipeline {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wrap an error with the outer-loop iteration it occurred in.
    pub fn at_iteration(self, iteration: usize) -> Self {
        Error::Pipeline {
            iteration,
            source: Box::new(self),
        }
    }
}
