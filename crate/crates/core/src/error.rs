use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square with dimension at least 2 (got {rows}x{cols})")]
    InvalidDimension { rows: usize, cols: usize },
    #[error("dimension {n} exceeds the configured cap {max}")]
    DimensionTooLarge { n: usize, max: usize },
    #[error("SingularMatrix: determinant is zero, the domain is not open")]
    SingularMatrix,
    #[error("UnboundedDomain: adjugate entry ({row}, {col}) is negative, the domain is unbounded")]
    UnboundedDomain { row: usize, col: usize },
    #[error("AllZeroRow: gcd of an all-zero row is undefined")]
    AllZeroRow,
    #[error("D_k requires k >= 1")]
    InvalidK,

    #[error("polynomials have different variable counts ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("division by the zero polynomial")]
    DivisionByZeroPolynomial,
    #[error("negative power of t_{0} evaluated at zero")]
    PoleAtZero(usize),

    #[error("CanonicityViolation: {0}")]
    CanonicityViolation(String),
    #[error("kernel evaluated at a singular point (factor {factor} has modulus {modulus:e})")]
    EvaluationAtSingularity { factor: usize, modulus: f64 },
    #[error("nu-box with {0} points is too large to enumerate")]
    BoxTooLarge(u128),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("NotUnimodular: det B = {0}, expected 1")]
    NotUnimodular(String),
    #[error("WrongDimension: expected n = {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("GcdViolation: parameters must be positive with gcd 1")]
    GcdViolation,

    #[error("WindowTooSmall: no exponent in the window is free of truncation effects")]
    WindowTooSmall,
    #[error("NonConvergent: series did not settle within truncation radius {0}")]
    NonConvergent(usize),
    #[error("point lies outside the domain (constraint {0})")]
    PointOutsideDomain(usize),

    #[error("parse error: {0}")]
    Parse(String),
}
