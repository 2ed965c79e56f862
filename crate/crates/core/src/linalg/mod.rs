//! Dense complex linear algebra: matrices, Hermitian eigendecomposition,
//! exact evolution, norms, truncated SVD and Haar sampling.

mod eigen;
mod haar;
mod matrix;
mod norms;
mod svd;

pub use eigen::{
    evolve_unitary, evolve_with, hermitian_eigen, imaginary_evolve_with, HermitianEigen,
    HERMITIAN_TOL,
};
pub use haar::{haar_state, haar_su2, haar_su2_from, haar_state_from, StateVector};
pub use matrix::{dot, norm_sqr, Matrix, C64, I, ONE, ZERO};
pub use norms::{norm, spectral_norm, NormKind};
pub use svd::{svd_gram, svd_truncate, Svd, GRAM_RESOLUTION};

/// Matrices that play the role of operators on `d = 2^n` dimensional spaces.
pub type DenseOperator = Matrix;
