use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {what} needs at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// The conditioning event has (numerically) zero probability.
    #[error("degenerate condition: {0}")]
    DegenerateCondition(String),

    #[error("degenerate variance: series is constant")]
    DegenerateVariance,

    #[error("{}:{line}:{column}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("{}: {message}", file.display())]
    Input { file: PathBuf, message: String },

    #[error("stock {stock_id} missing from CAPM table{}", year.map(|y| format!(" for year {y}")).unwrap_or_default())]
    MissingStock { stock_id: String, year: Option<i32> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by malformed input or usage rather than by
    /// the numbers themselves.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Input { .. }
                | Error::MissingStock { .. }
                | Error::Io(_)
                | Error::Csv(_)
                | Error::InvalidArgument(_)
        )
    }
}
