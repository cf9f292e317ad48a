use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("the response has zero sum of squares")]
    DegenerateResponse,

    /// The residualized column is numerically inside the span of the active set.
    #[error("column {0} is collinear with the active set")]
    Collinear(usize),

    /// The current residual sum of squares is zero, so no P-value exists.
    #[error("residual sum of squares is zero")]
    PerfectFit,

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("interaction expansion needs {count} columns, which exceeds the supported size")]
    Size { count: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by malformed or unreadable input data.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Data(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
