//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants carry enough context to be rendered to a user without further
/// lookup; [`Error::code`] gives a stable machine-readable tag.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("the rationals admit no finite extension of degree {0}")]
    ExtensionOfCharZero(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields ({0} vs {1})")]
    FieldMismatch(String, String),
    #[error("cannot embed {0} into {1}")]
    IncompatibleFields(String, String),
    #[error("field extension limit exceeded: {0}")]
    FieldExtensionLimit(String),
    #[error("tangent direction is not rational: {0}")]
    IrrationalTangent(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("precision underflow: {0}")]
    PrecisionUnderflow(String),
    #[error("series is not a unit")]
    NotAUnit,
    #[error("initial factors are not pairwise coprime")]
    NotCoprime,
    #[error("parametrization must be polynomial: {0}")]
    NonPolynomialInput(String),
    #[error("degenerate parametrization: {0}")]
    DegenerateParametrization(String),
    #[error("ideal is not zero-dimensional within degree bound {0}")]
    NotZeroDimensionalWithinBound(usize),
    #[error("truncation did not stabilise: {0}")]
    UnstableTruncation(String),
    #[error("blow-up direction does not belong to the tangent cone")]
    WrongDirection,
    #[error("curve is not reduced: {0}")]
    NotReduced(String),
    #[error("parameter truncation too coarse: {0}")]
    TruncationTooCoarse(String),
    #[error("auxiliary equation cannot be solved: {0}")]
    NonSolvableAuxiliary(String),
    #[error("unsupported characteristic {0}: expected 0 or a prime")]
    UnsupportedCharacteristic(u64),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable tag used in JSON output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::ExtensionOfCharZero(_) => "ExtensionOfCharZero",
            Error::DivisionByZero => "DivisionByZero",
            Error::FieldMismatch(..) => "FieldMismatch",
            Error::IncompatibleFields(..) => "IncompatibleFields",
            Error::FieldExtensionLimit(_) => "FieldExtensionLimit",
            Error::IrrationalTangent(_) => "IrrationalTangent",
            Error::InsufficientPrecision(_) => "InsufficientPrecision",
            Error::PrecisionUnderflow(_) => "PrecisionUnderflow",
            Error::NotAUnit => "NotAUnit",
            Error::NotCoprime => "NotCoprime",
            Error::NonPolynomialInput(_) => "NonPolynomialInput",
            Error::DegenerateParametrization(_) => "DegenerateParametrization",
            Error::NotZeroDimensionalWithinBound(_) => "NotZeroDimensionalWithinBound",
            Error::UnstableTruncation(_) => "UnstableTruncation",
            Error::WrongDirection => "WrongDirection",
            Error::NotReduced(_) => "NotReduced",
            Error::TruncationTooCoarse(_) => "TruncationTooCoarse",
            Error::NonSolvableAuxiliary(_) => "NonSolvableAuxiliary",
            Error::UnsupportedCharacteristic(_) => "UnsupportedCharacteristic",
            Error::Parse { .. } => "Parse",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// Whether the failure is a truncation problem (partial results remain
    /// meaningful) rather than a problem with the input.
    pub fn is_truncation(&self) -> bool {
        matches!(self, Error::UnstableTruncation(_) | Error::TruncationTooCoarse(_))
    }
}
