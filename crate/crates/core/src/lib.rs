//! Randomized low-rank matrix factorizations.
//!
//! The crate provides randomized SVD, adaptive and blocked QB, one- and
//! two-sided interpolative decompositions, and CUR, together with dense
//! deterministic routines (Jacobi SVD, column-pivoted QR) that serve as
//! reference oracles for every randomized result.

pub mod cli;
pub mod dense;
pub mod error;
pub mod interp;
pub mod io;
pub mod qb;
pub mod rsvd;
pub mod sketch;
mod truncation;

pub use dense::{DenseMatrix, Permutation, RngState};
pub use error::{Error, Result};
pub use truncation::Truncation;
