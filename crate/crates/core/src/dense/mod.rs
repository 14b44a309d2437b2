//! Self-contained dense kernels: storage, products, seeded Gaussian
//! generation, Householder QR, and Jacobi eigen/singular value solvers.

mod eig;
mod matrix;
mod ops;
mod qr;
mod rng;
mod svd;

pub use eig::{sym_eig, SymEig};
pub use matrix::{DenseMatrix, Permutation};
pub use ops::{
    frobenius_norm, matmul, matmul_serial, mul, mul_nt, mul_tn, spectral_norm_est, vector_norm,
    Trans,
};
pub use qr::{
    compact_qr, orth, pivoted_qr_partial, upper_tri_solve, PivotedQr, QrFactors, TriangularSolve,
    MAX_COEFFICIENT, STABILIZE_RATIO,
};
pub use rng::{gaussian_matrix, RngState};
pub use svd::{small_svd, SmallSvd};
