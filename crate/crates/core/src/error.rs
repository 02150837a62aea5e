use std::path::PathBuf;

use thiserror::Error;

use crate::scenario::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric input was NaN or infinite, or outside the mathematical
    /// domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input is finite but beyond the range the kernel supports.
    #[error("range error: {what} = {value} exceeds the supported bound {limit}")]
    Range { what: &'static str, value: f64, limit: f64 },

    /// Text input (scenario file, `.sem` source, grid option) could not be parsed.
    /// `line` is 1-based; 0 means the error is not tied to a line.
    #[error("{}", fmt_parse(*line, message))]
    Parse { line: usize, message: String },

    #[error("missing required keys for structure `{structure}`: {}", keys.join(", "))]
    MissingKeys { structure: String, keys: Vec<String> },

    #[error("invalid scenario: {0}")]
    Invalid(ValidationReport),

    /// The requested least-squares coefficient does not exist (zero or
    /// negative denominator, singular Gram block).
    #[error("undefined estimator: {0}")]
    UndefinedEstimator(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    /// A standardized SEM asks for more explained variance than a unit-variance
    /// node can carry, so no real noise loading exists.
    #[error("node `{node}` is not realizable with unit variance (explained variance {explained})")]
    NotRealizable { node: String, explained: f64 },

    #[error("no feasible cells in the grid")]
    EmptyRegion,

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_parse(line: usize, message: &str) -> String {
    if line == 0 {
        format!("parse error: {message}")
    } else {
        format!("parse error at line {line}: {message}")
    }
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure_finite(what: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {value}")))
    }
}
