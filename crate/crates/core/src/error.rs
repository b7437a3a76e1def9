use std::fmt;

use thiserror::Error;

/// Syntax error reported by [`crate::expr::parse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the source where parsing failed.
    pub offset: usize,
    /// Tokens that would have been accepted at `offset`.
    pub expected: Vec<&'static str>,
    /// What was found instead (or a short description of the problem).
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: found {}", self.offset, self.found)?;
        if !self.expected.is_empty() {
            write!(f, ", expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// Why an evaluation left the domain of the expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
    /// `a^b` with a non-integer exponent needs `a > 0`.
    PowNonPositiveBase,
    /// An intermediate value overflowed or became NaN.
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainKind::LogNonPositive => "log of a non-positive value",
            DomainKind::SqrtNegative => "sqrt of a negative value",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::PowNonPositiveBase => "non-integer power of a non-positive base",
            DomainKind::NonFinite => "non-finite intermediate value",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainError {
    pub kind: DomainKind,
    /// The offending operand value.
    pub operand: f64,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (operand {})", self.kind, self.operand)
    }
}

impl std::error::Error for DomainError {}

/// Coarse error classes; each maps to one CLI exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Parse,
    Domain,
    Precondition,
}

impl Category {
    pub fn exit_code(self) -> u8 {
        match self {
            Category::Config | Category::Parse => 2,
            Category::Domain => 3,
            Category::Precondition => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Config => "config",
            Category::Parse => "parse",
            Category::Domain => "domain",
            Category::Precondition => "precondition",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error {0}")]
    Parse(#[from] ParseError),

    #[error("domain error: {0}")]
    Domain(#[from] DomainError),

    #[error("domain error at sample {index} (point {point:?}): {source}")]
    SampleDomain {
        index: u64,
        point: Vec<f64>,
        source: DomainError,
    },

    #[error("non-finite partial derivative")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("covariance is not positive semidefinite: pivot {pivot} at index {index}")]
    NotPsd { index: usize, pivot: f64 },

    #[error("family {family} requires a diagonal covariance (entry ({row}, {col}) = {value})")]
    FamilyConstraint {
        family: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("need at least 2 samples, got {0}")]
    InsufficientSamples(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Parse(_) => Category::Parse,
            Error::Domain(_) | Error::SampleDomain { .. } | Error::NonFinite => Category::Domain,
            Error::Precondition(_) => Category::Precondition,
            Error::DimensionMismatch { .. }
            | Error::NotPsd { .. }
            | Error::FamilyConstraint { .. }
            | Error::InvalidDensity(_)
            | Error::InsufficientSamples(_)
            | Error::InvalidArgument(_)
            | Error::Config(_) => Category::Config,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
