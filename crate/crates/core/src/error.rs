use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-Hermitian term set: coefficient of (a={alpha:?}, b={beta:?}) is not the conjugate of its partner")]
    NonHermitian { alpha: Vec<u32>, beta: Vec<u32> },

    #[error("variable index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("point lies outside the domain: rho = {rho:e}")]
    OutsideDomain { rho: f64 },

    #[error("Levi matrix is singular at this point (rank {rank} of {dim}); use the extended gradient")]
    SingularHessian { rank: usize, dim: usize },

    #[error("gradient of rho vanishes at this point")]
    ZeroGradient,

    #[error("empty sample set")]
    EmptySamples,

    #[error("integration failed at t = {time}: {message}")]
    Integration { time: f64, message: String },

    #[error("finite-difference stencil leaves the domain at sample {index}")]
    StencilOutside { index: usize },

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}
