use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Syntax, unknown key or type mismatch in a config file.
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("missing required key `{0}`")]
    MissingKey(&'static str),

    /// A parsed value violates a model precondition. `line` is the line
    /// of the offending key, absent when the value came from a default.
    #[error("{}{key}: {reason}", at_line(.line))]
    Validation {
        line: Option<usize>,
        key: &'static str,
        reason: String,
    },

    #[error("experiment mismatch: config declares `{declared}`, command asked for `{requested}`")]
    ExperimentMismatch { declared: String, requested: String },

    #[error(transparent)]
    Model(#[from] urllc_core::Error),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", .path.display())]
    Csv { path: PathBuf, source: csv::Error },
}

fn at_line(line: &Option<usize>) -> String {
    line.map_or_else(String::new, |l| format!("line {l}: "))
}

pub type Result<T> = std::result::Result<T, Error>;
