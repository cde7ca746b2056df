use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A graph, complex or configuration violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("exhaustive enumeration needs {needed} steps, work cap is {cap}")]
    WorkCapExceeded { needed: String, cap: u64 },

    #[error(
        "value {what} would have about {digits_estimate} decimal digits (cap {digit_cap}); \
         log2 lower bound {log2_lower_bound}"
    )]
    DigitCapExceeded {
        what: String,
        digits_estimate: f64,
        log2_lower_bound: f64,
        digit_cap: u64,
    },

    #[error("conditioning event has probability zero: {0}")]
    ZeroProbability(String),

    #[error("frame color has zero support: {0}")]
    ZeroSupport(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by an enumeration or digit budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::WorkCapExceeded { .. } | Error::DigitCapExceeded { .. })
    }
}
