use thiserror::Error;

/// Errors surfaced by the library. Cap overruns are deliberately loud:
/// the oracle is exhaustive, so exceeding a cap means the answer would not
/// be trustworthy within the configured budget, never that it is silently
/// approximated.
#[derive(Debug, Error)]
pub enum Error {
    #[error("order cap exceeded: group closure grew past {cap} elements")]
    OrderCapExceeded { cap: u64 },

    #[error("work cap exceeded: {what} needs more than {cap} steps")]
    WorkCapExceeded { what: &'static str, cap: u64 },

    #[error("index cap exceeded: [ambient : base] = {index} > {cap}")]
    IndexCapExceeded { index: u64, cap: u64 },

    #[error("enumeration cap exceeded: {what} ({value} > {cap})")]
    EnumerationCapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("oracle range exceeded: n = {n} is past the exhaustive-enumeration cap {cap}")]
    OracleRangeExceeded { n: usize, cap: usize },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("not a subgroup: {0}")]
    NotASubgroup(String),

    #[error("unsupported symbolic case: {0}")]
    UnsupportedSymbolic(String),

    #[error("unknown fiber: {0}")]
    UnknownFiber(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that mean "the configured budget was exceeded"
    /// rather than "the input is wrong". The CLI maps these to exit code 2.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(
            self,
            Error::OrderCapExceeded { .. }
                | Error::WorkCapExceeded { .. }
                | Error::IndexCapExceeded { .. }
                | Error::EnumerationCapExceeded { .. }
                | Error::OracleRangeExceeded { .. }
        )
    }
}
