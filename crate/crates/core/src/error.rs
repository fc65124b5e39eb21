use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeilError {
    #[error("{a} is not coprime to the modulus {modulus}")]
    NotCoprime { a: i64, modulus: u64 },

    #[error("bad modulus: {0}")]
    BadModulus(String),

    #[error("unsupported conductor {conductor}: {reason}")]
    UnsupportedConductor { conductor: u64, reason: String },

    #[error("no element found: {0}")]
    NotFound(String),

    #[error("level {n} is not divisible by f_K * h_K = {required}")]
    Divisibility { n: u64, required: u64 },

    #[error("slope entry at prime {label} is not integral: {value}")]
    NotIntegral { label: u64, value: String },

    #[error("generator {index} has no explicit certificate")]
    MissingCertificate { index: usize },

    #[error("operation requires level 1, got level {0}")]
    UnsupportedLevel(u64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("field table: {0}")]
    FieldTable(String),
}

impl WeilError {
    /// True for errors that mean "the input lies outside what the library supports",
    /// as opposed to malformed input.
    pub fn is_unsupported(&self) -> bool {
        matches!(
            self,
            WeilError::UnsupportedConductor { .. }
                | WeilError::Divisibility { .. }
                | WeilError::UnsupportedLevel(_)
                | WeilError::MissingCertificate { .. }
                | WeilError::NotFound(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, WeilError>;
