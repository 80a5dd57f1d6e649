//! Error type shared by every module of the crate.

use std::fmt;

/// Crate-wide error enum.
///
/// Variants map onto the distinct failure classes of the pipeline so that
/// callers (notably the CLI) can translate them into exit codes without
/// string matching.
#[derive(Debug)]
pub enum Error {
    /// Argument outside the supported envelope of a numeric kernel.
    Domain(String),
    /// Evaluation requested exactly at a singular point.
    Singularity(String),
    /// Physically or structurally invalid configuration (medium, scene, scenario file).
    Config(String),
    /// Invalid operation arguments or incompatible data shapes.
    Validation(String),
    /// Malformed input file; carries a 1-based line number when known.
    Parse { line: usize, message: String },
    /// Data that is formally valid but carries no information (e.g. zero norm).
    DegenerateData(String),
    /// Query outside the coverage of a tabulated field.
    Coverage(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Singularity(m) => write!(f, "singularity: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Validation(m) => write!(f, "validation error: {m}"),
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::DegenerateData(m) => write!(f, "degenerate data: {m}"),
            Error::Coverage(m) => write!(f, "coverage error: {m}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
