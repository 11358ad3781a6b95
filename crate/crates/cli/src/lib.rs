//! Command-line orchestration of the texture-orientation pipeline.
//!
//! Verbs: `simulate`, `preprocess`, `detect`, `estimate`, `pipeline`, `plot`.
//! Every run reads a flat `key = value` config (overridable by `--section.key
//! value` flags), writes its artifacts into one run directory guarded by a
//! lock file, and records a manifest with all parameters, seeds and content
//! hashes, so equal manifests imply byte-identical artifacts.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod svg;

/// Environment variable naming the parent directory for run outputs when
/// `--out` is not given.
pub const RUN_ROOT_ENV: &str = "TEXPLANE_RUN_ROOT";

/// Errors grouped by exit code: config and I/O problems exit 2, numerical or
/// validation failures during a run exit 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl From<texplane::Error> for CliError {
    fn from(e: texplane::Error) -> Self {
        use texplane::Error::*;
        match e {
            Io(_) | ImageParse { .. } | UnsupportedImageFormat(_) | CsvParse { .. } => {
                CliError::Io(e.to_string())
            }
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
