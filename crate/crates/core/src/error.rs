use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty product: compose needs at least one factor")]
    EmptyProduct,

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unmatched: field cannot be normalized (eta1_raw = {eta1_raw} must exceed eta2_raw = {eta2_raw})")]
    Unmatched { eta1_raw: f64, eta2_raw: f64 },

    #[error("field singularity: t = {t} lies outside the open interval |t| < {limit}")]
    FieldSingularity { t: f64, limit: f64 },

    #[error("invalid magnetic quantum number 2m = {two_m} for 2j = {two_j}")]
    InvalidMagneticNumber { two_m: i32, two_j: u32 },

    #[error(
        "inconsistent truncation window: delta = {delta} but arctan(sqrt(1 - (gamma/eta1)^2) tan(delta0)) = {related}"
    )]
    InconsistentWindow { delta: f64, related: f64 },

    #[error("matrix is not unitary: defect {defect} exceeds {tol}")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("integration outside the drive domain: t = {t} not in ({min}, {max})")]
    OutsideDomain { t: f64, min: f64, max: f64 },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("quadrature failed to reach tolerance on [{a}, {b}] (estimated error {error})")]
    QuadratureFailed { a: f64, b: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
