use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("{routine} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{n} qubits exceeds the dense memory cap of {cap} qubits")]
    TooManyQubits { n: usize, cap: usize },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Pauli strings shared between groups: {0:?}")]
    OverlappingSupport(Vec<String>),

    #[error("formula order {0} is not supported (use 1 or an even order)")]
    UnsupportedOrder(usize),

    #[error("invalid ordering {0:?}")]
    InvalidOrdering(Vec<usize>),

    #[error("{count} items exceeds the cap of {cap}; use random sampling instead")]
    CapExceeded { count: usize, cap: usize },

    #[error("weights must be non-negative and sum to one (sum = {sum})")]
    InvalidWeights { sum: f64 },

    #[error("Richardson extrapolation error {relative:.3e} exceeds {threshold:.1e}; try a smaller t0")]
    ExtrapolationInaccurate { relative: f64, threshold: f64 },

    #[error("symmetry element {index} does not commute with the Hamiltonian (residual {residual:.3e})")]
    SymmetryViolated { index: usize, residual: f64 },

    #[error("{0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
