use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input file; `line` is 1-based when known.
    #[error("format error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Format { line: Option<usize>, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("solver did not converge after {iterations} iterations (objective {objective})")]
    NonConvergence { iterations: usize, objective: f64 },

    #[error("evaluation ids do not line up; missing: {missing:?}")]
    IdMismatch { missing: Vec<String> },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// The pipeline stopped early; `processed` results reached the sink first.
    #[error("pipeline aborted after {processed} results: {cause}")]
    Aborted { processed: usize, cause: Box<Error> },

    #[error("benchmark outputs diverged at {workers} workers: {detail}")]
    Divergent { workers: usize, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format { line: Some(line), message: message.into() }
    }

    pub(crate) fn format_nl(message: impl Into<String>) -> Self {
        Error::Format { line: None, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { context: path.into().display().to_string(), source }
    }
}
