use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("triangular solve: zero diagonal entry at position {index}")]
    ZeroDiagonal { index: usize },

    #[error("sym_eig: matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("{op}: no convergence after {sweeps} sweeps (off-diagonal measure {off:e})")]
    NoConvergence {
        op: &'static str,
        sweeps: usize,
        off: f64,
    },

    #[error(
        "rank {rank} exceeds numerical rank for v1 (eigenvalue {eigenvalue:e} of B*B'); use v2"
    )]
    NumericalRank { rank: usize, eigenvalue: f64 },

    #[error("least squares: skeleton row {row} is linearly dependent to working precision")]
    DeficientSkeleton { row: usize },

    #[error("dense oracle limited to min(m,n) <= {limit} (got {m}x{n}); use the randomized routines")]
    TooLarge { m: usize, n: usize, limit: usize },

    #[error("{path}: {msg} (byte offset {offset})")]
    Format {
        path: PathBuf,
        offset: u64,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
