use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A raw transcript line could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Parsed input violates a structural requirement (empty channel, duplicate side, ...).
    #[error("structural error: {0}")]
    Structure(String),

    /// A file on disk does not follow the expected schema.
    #[error("format error{}: {message}", location(.path, .line))]
    Format {
        path: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },

    /// Invalid configuration or arguments.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// A metric needs both classes but only one was present.
    #[error("single-class input: {0}")]
    SingleClass(String),

    #[error("unresolvable key {key} in trial {trial_id}")]
    UnresolvedKey { trial_id: String, key: String },

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Divergence { epoch: usize },

    /// Bootstrap resampling kept drawing single-class resamples.
    #[error("bootstrap degeneracy: {redraws} consecutive single-class resamples")]
    Degenerate { redraws: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(path: &Option<PathBuf>, line: &Option<usize>) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!(" in {}:{}", p.display(), l),
        (Some(p), None) => format!(" in {}", p.display()),
        (None, Some(l)) => format!(" at line {l}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(message: impl Into<String>) -> Self {
        Error::Format {
            path: None,
            line: None,
            message: message.into(),
        }
    }

    /// Attach a path to a format error that does not carry one yet.
    pub(crate) fn at_path(self, p: &std::path::Path) -> Self {
        match self {
            Error::Format {
                path: None,
                line,
                message,
            } => Error::Format {
                path: Some(p.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }
}

/// Drop serde_json's trailing " at line X column Y" (records are one line each).
pub(crate) fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(pos) => msg[..pos].to_string(),
        None => msg.to_string(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
