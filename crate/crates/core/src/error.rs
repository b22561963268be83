use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the numerical routines.
///
/// [`Error::name`] gives a stable machine-readable identifier that the CLI
/// prints on failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The induced metric is (numerically) singular.
    DegenerateImmersion { det_g: f64 },
    /// `cos α` dropped below the symplectic threshold.
    LagrangianPoint { cos_alpha: f64 },
    /// `sin α` vanished, so no adapted frame exists.
    ComplexPoint { sin_alpha: f64 },
    /// A finite-difference stencil needs more grid points.
    GridTooCoarse { nodes: usize, required: usize },
    /// A sampled symbol determinant was negative.
    EllipticityViolation { det: f64 },
    /// The first-integral equation has no root at this radius.
    NoSolution { r: f64, target: f64 },
    InvalidBeta(f64),
    /// The surface fails the criticality gate required by a formula.
    NotCritical { residual: f64, tolerance: f64 },
    AsymptoticMismatch { r: f64, value: f64, detail: &'static str },
    BoundViolation { beta: f64, r: f64, value: f64, bound: f64 },
    InvalidInput(&'static str),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateImmersion { .. } => "DegenerateImmersion",
            Error::LagrangianPoint { .. } => "LagrangianPoint",
            Error::ComplexPoint { .. } => "ComplexPoint",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::EllipticityViolation { .. } => "EllipticityViolation",
            Error::NoSolution { .. } => "NoSolution",
            Error::InvalidBeta(_) => "InvalidBeta",
            Error::NotCritical { .. } => "NotCritical",
            Error::AsymptoticMismatch { .. } => "AsymptoticMismatch",
            Error::BoundViolation { .. } => "BoundViolation",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateImmersion { det_g } => {
                write!(f, "degenerate immersion: det g = {det_g:e}")
            }
            Error::LagrangianPoint { cos_alpha } => {
                write!(f, "Lagrangian point: cos alpha = {cos_alpha:e}")
            }
            Error::ComplexPoint { sin_alpha } => {
                write!(f, "complex point: sin alpha = {sin_alpha:e}")
            }
            Error::GridTooCoarse { nodes, required } => {
                write!(f, "grid too coarse: {nodes} nodes, need at least {required}")
            }
            Error::EllipticityViolation { det } => {
                write!(f, "negative symbol determinant {det:e}")
            }
            Error::NoSolution { r, target } => write!(
                f,
                "no slope solves the first integral at r = {r} (target {target} is out of range)"
            ),
            Error::InvalidBeta(beta) => write!(f, "invalid beta {beta}"),
            Error::NotCritical { residual, tolerance } => write!(
                f,
                "surface is not critical: residual {residual:e} exceeds {tolerance:e}"
            ),
            Error::AsymptoticMismatch { r, value, detail } => {
                write!(f, "asymptotic mismatch at r = {r}: {detail} (value {value:e})")
            }
            Error::BoundViolation { beta, r, value, bound } => write!(
                f,
                "bound violated at beta = {beta}, r = {r}: {value:e} > {bound:e}"
            ),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
