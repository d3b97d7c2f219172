use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M†| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("trace is {trace}, expected 1 (|Tr - 1| = {:e})", (trace - 1.0).abs())]
    NotUnitTrace { trace: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("invalid X-state parameters: {0}")]
    InvalidParams(String),
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("measurement axis must be a unit vector, got norm {norm}")]
    BadAxis { norm: f64 },
    #[error("argument {0} outside the function domain")]
    DomainError(f64),
    #[error("no real solution of the population constraints at k = {k}")]
    NoRealSolution { k: f64 },
    #[error("{which} is not unitary: ‖U†U - I‖ = {defect:e}")]
    NotUnitary { which: &'static str, defect: f64 },
    #[error("rejection sampler gave up after {attempts} attempts")]
    SamplerExhausted { attempts: u64 },
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}
