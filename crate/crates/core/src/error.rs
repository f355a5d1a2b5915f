use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("N ≥ 1 required")]
    NoElectrons,
    #[error("molecule has no atoms")]
    NoAtoms,
    #[error("atom {0}: nuclear charge must be at least 1")]
    InvalidCharge(usize),
    #[error("atom {0}: position is not finite")]
    NonFinitePosition(usize),
    #[error("atoms {0} and {1} share a position")]
    DuplicatePosition(usize, usize),
    #[error("unknown basis `{0}`")]
    UnknownBasis(String),
    #[error("no sto3g-paper data for Z = {0}")]
    MissingElement(u32),
    #[error("basis has {functions} functions, fewer than N = {electrons}")]
    BasisTooSmall { functions: usize, electrons: usize },
    #[error("shell {shell}: exponent {exponent} is not positive")]
    NonPositiveExponent { shell: usize, exponent: f64 },
    #[error("shell {0}: exponents must be strictly decreasing")]
    UnsortedExponents(usize),
    #[error("shell {0}: no primitives")]
    EmptyShell(usize),
    #[error("shell {shell}: angular momentum {l} unsupported (l ≤ 1)")]
    UnsupportedAngularMomentum { shell: usize, l: u32 },
    #[error("shell {shell}: center {center} does not name an atom")]
    BadCenter { shell: usize, center: usize },
    #[error("shell {0}: contraction has zero norm")]
    ZeroNorm(usize),
    #[error("unknown unit convention `{0}`")]
    UnknownConvention(String),
    #[error("overlap matrix is singular (condition number {0:e})")]
    SingularOverlap(f64),
    #[error("eigensolver failed: {0}")]
    Eigensolver(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("invalid option: {0}")]
    InvalidOption(&'static str),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("critical point is not certified (residual {0:e})")]
    NotCertified(f64),
    #[error("orbital energies must all be negative (max {0})")]
    UnboundOrbital(f64),
    #[error("radial grid invalid: {0}")]
    InvalidGrid(&'static str),
    #[error("radial grid too small: boundary amplitude {0:e}")]
    GridTooSmall(f64),
    #[error("only {found} bound s-levels resolvable, {wanted} requested")]
    TooFewBoundLevels { found: usize, wanted: usize },
    #[error("radial SCF did not converge in {0} iterations")]
    RadialNotConverged(usize),
    #[error("fit window invalid: {0}")]
    BadWindow(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
