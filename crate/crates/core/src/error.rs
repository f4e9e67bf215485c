use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("eigensolver did not converge (matrix hash {hash:016x}, dim {dim})")]
    NoConvergence { hash: u64, dim: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("gap violated: {0}")]
    GapViolated(String),

    #[error("not semi-simple: eigenvalue {eigenvalue} has a Jordan block (defect {defect:.3e})")]
    NotSemisimple { eigenvalue: String, defect: f64 },

    #[error("not hyperbolic: eigenvalue with imaginary part {imag:.3e} exceeds tolerance {tol:.3e}")]
    NotHyperbolic { imag: f64, tol: f64 },

    #[error("direction {0:?} is not noncharacteristic: L(nu) is singular")]
    Characteristic(Vec<f64>),

    #[error("parameter point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("full symmetrizer inconsistent at {sample:?}: defect {defect:.3e}")]
    FullSymmetrizerInconsistent { sample: Vec<f64>, defect: f64 },

    #[error("cutoff too wide: characteristic point inside the cutoff support at {0:?}")]
    CutoffTooWide(Vec<f64>),

    #[error("not strongly hyperbolic at double point: {0}")]
    DoublePoint(String),

    #[error("Gaussian wrap-around: lambda * L^2 = {0:.3} is too small for the periodic domain")]
    WrapAround(f64),

    #[error("non-finite value during evolution at t = {t}")]
    Blowup { t: f64 },

    #[error("did not converge: {0}")]
    Convergence(String),

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
