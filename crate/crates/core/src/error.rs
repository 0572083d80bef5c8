use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("field has {found} samples but the grid has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("requested {requested} states but at most {max} exist on this grid")]
    TooManyStates { requested: usize, max: usize },
    #[error("eigen-iteration did not converge (residual norm {residual:e})")]
    EigenNoConvergence { residual: f64 },
    #[error("variational minimization of state {state} did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    VariationalNoConvergence {
        state: usize,
        iterations: usize,
        gradient_norm: f64,
    },
    #[error("field is not normalized: ∫|ψ|² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("wavefield has nodes (|ψ| below threshold) at indices {indices:?}")]
    Nodes { indices: Vec<usize> },
    #[error("operation requires visibility mode `{expected}`")]
    WrongMode { expected: &'static str },
}
