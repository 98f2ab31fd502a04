use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("dimension {0} is odd; the construction requires an even N")]
    OddDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index ({n}, {m}) out of range for dimension {dim}")]
    IndexOutOfRange { n: usize, m: usize, dim: usize },

    #[error("state is in the {found} basis, expected {expected}")]
    WrongBasis {
        expected: &'static str,
        found: &'static str,
    },

    #[error("input has a nonzero component outside the theta=(0,0) sector (norm {0:e})")]
    OutsideSector(f64),

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("point ({x}, {p}) lies on a region boundary")]
    BoundaryPoint { x: f64, p: f64 },

    #[error("sector leakage {0:e} exceeds the fixed-point tolerance")]
    SectorLeak(f64),

    #[error("oracle mismatch at ({row}, {col}): oracle {oracle}, closed form {closed}, |diff| {diff:e}")]
    OracleMismatch {
        row: usize,
        col: usize,
        oracle: Complex64,
        closed: Complex64,
        diff: f64,
    },

    #[error("state cannot be normalized (norm {0:e})")]
    Normalization(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
