use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid radius {0}")]
    InvalidRadius(f64),
    #[error("invalid annulus: r_in={r_in}, r_out={r_out}")]
    InvalidAnnulus { r_in: f64, r_out: f64 },
    #[error("truncation order {order} needs at least {needed} samples, got {samples}")]
    OrderTooLarge {
        order: usize,
        samples: usize,
        needed: usize,
    },
    #[error("evaluation at lambda = 0")]
    ZeroLambda,
    #[error("|lambda| = {modulus} outside trusted annulus [{r_in}, {r_out}]")]
    OutsideAnnulus { modulus: f64, r_in: f64, r_out: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("loop not invertible on contour (condition number {0:.3e})")]
    NotInvertible(f64),
    #[error("matrix logarithm diverges: |D - I| = {0:.3e}")]
    LogDivergence(f64),
    #[error("outside big cell after {iterations} iterations (last residual {residual:.3e})")]
    OutsideBigCell { iterations: usize, residual: f64 },
    #[error("factorization residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("reality condition violated: residual {0:.3e}")]
    RealityViolation(f64),
    #[error("reality drift {0:.3e} during factorization")]
    HmrcDrift(f64),
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("matrix is not unimodular: |det - 1| = {0:.3e}")]
    NotUnimodular(f64),
    #[error("loop is not in the normalized plus group: residual {0:.3e}")]
    NotNormalized(f64),
    #[error("degree overflow: power {power} exceeds cap {cap}")]
    DegreeOverflow { power: i32, cap: i32 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("pole of f at z = {0}")]
    Pole(num_complex::Complex64),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("blow-up: |E| = {0:.3e}")]
    BlowUp(f64),
    #[error("non-unitary restriction: drift {0:.3e}")]
    NonUnitary(f64),
    #[error("spectral map too large for the trusted annulus: {0:.3e}")]
    MapTooLarge(f64),
    #[error("flow failed at the basepoint: {0}")]
    BasepointFailed(Box<Error>),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
