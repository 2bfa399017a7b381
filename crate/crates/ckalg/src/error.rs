//! Error type shared by every module of the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the algebra kernel and the solver.
///
/// Each variant maps to a stable machine-readable kind string (see
/// [`Error::kind`]), which the CLI turns into a distinct exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Multi-indices or points of different lengths were combined.
    DimensionMismatch { expected: usize, found: usize },
    /// Series or polynomials from incompatible contexts were combined
    /// (different base point, truncation order, or variable counts).
    ContextMismatch(String),
    /// An operation needed more certified coefficients than are available.
    InsufficientOrder { needed: u32, available: u32 },
    /// A denominator vanishes at the expansion or evaluation point.
    Pole(String),
    /// A denominator vanishes identically on the restriction hyperplane.
    RestrictionVanishes,
    /// Division by the zero polynomial or zero series.
    DivisionByZero,
    /// The polynomial contains no derivative of the requested unknown.
    NoLeader { unknown: String },
    /// The polynomial is not shaped like an integral relation
    /// (mixed unknowns, or the leader is not a pure d1-derivative).
    NotIntegral(String),
    /// A derivation matrix is not invertible over the integers.
    Matrix(String),
    /// The lambda search ran out of candidates below the bound.
    SearchExhausted { bound: i64 },
    /// An equation violates the normal-form condition; names the offending
    /// derivative exactly as it appears.
    NormalForm { equation: String, variable: String },
    /// The right-hand side denominator vanishes at the initial jet.
    DenominatorVanishes { equation: String },
    /// Required data is missing (point values, initial slices, ...).
    Underdetermined(String),
    /// The separant vanishes at the jet that was to be prolonged.
    SingularProlongation(String),
    /// Output fails a consistency check against its defining data.
    Consistency(String),
    /// Text input could not be parsed.
    Parse { line: usize, col: usize, message: String },
    /// A solution document failed re-verification.
    VerificationFailed(String),
}

impl Error {
    /// Stable kind string for machine-readable error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::ContextMismatch(_) => "context-mismatch",
            Error::InsufficientOrder { .. } => "insufficient-order",
            Error::Pole(_) => "pole",
            Error::RestrictionVanishes => "restriction-vanishes",
            Error::DivisionByZero => "division-by-zero",
            Error::NoLeader { .. } => "no-leader",
            Error::NotIntegral(_) => "not-integral",
            Error::Matrix(_) => "matrix",
            Error::SearchExhausted { .. } => "search-exhausted",
            Error::NormalForm { .. } => "normal-form",
            Error::DenominatorVanishes { .. } => "denominator-vanishes",
            Error::Underdetermined(_) => "underdetermined",
            Error::SingularProlongation(_) => "singular-prolongation",
            Error::Consistency(_) => "consistency",
            Error::Parse { .. } => "parse",
            Error::VerificationFailed(_) => "verification-failed",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ContextMismatch(msg) => write!(f, "context mismatch: {msg}"),
            Error::InsufficientOrder { needed, available } => write!(
                f,
                "insufficient truncation order: needed {needed}, available {available}"
            ),
            Error::Pole(msg) => write!(f, "denominator vanishes: {msg}"),
            Error::RestrictionVanishes => {
                write!(f, "denominator vanishes identically on the hyperplane")
            }
            Error::DivisionByZero => write!(f, "division by zero"),
            Error::NoLeader { unknown } => {
                write!(f, "no derivative of unknown {unknown} occurs")
            }
            Error::NotIntegral(msg) => write!(f, "not an integral relation: {msg}"),
            Error::Matrix(msg) => write!(f, "matrix error: {msg}"),
            Error::SearchExhausted { bound } => {
                write!(f, "lambda search exhausted up to max-norm {bound}")
            }
            Error::NormalForm { equation, variable } => write!(
                f,
                "{equation} violates the normal form: derivative {variable} is not permitted"
            ),
            Error::DenominatorVanishes { equation } => write!(
                f,
                "right-hand side denominator of {equation} vanishes at the initial jet"
            ),
            Error::Underdetermined(msg) => write!(f, "underdetermined: {msg}"),
            Error::SingularProlongation(msg) => {
                write!(f, "singular prolongation: separant vanishes: {msg}")
            }
            Error::Consistency(msg) => write!(f, "consistency check failed: {msg}"),
            Error::Parse { line, col, message } => {
                write!(f, "parse error at line {line}, column {col}: {message}")
            }
            Error::VerificationFailed(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
