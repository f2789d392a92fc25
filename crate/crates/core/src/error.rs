use std::io;

use thiserror::Error;

/// Errors produced by the tagging pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad affix lists, gazetteers or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violates a precondition of the called operation.
    #[error("input error: {0}")]
    Input(String),

    /// A text file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A model file could not be loaded.
    #[error("model load error at line {line}: {message}")]
    ModelLoad { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn model_load(line: usize, message: impl Into<String>) -> Self {
        Error::ModelLoad {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
