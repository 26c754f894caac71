use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("crossbar infeasible: {side} side needs {needed} exits but has {available}")]
    CrossbarInfeasible {
        side: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("malformed path: {0}")]
    MalformedPath(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
