//! Randomized range samplers with the power scheme.
//!
//! The orthonormalization schedule follows the power loop: for iteration
//! `j = 1..=q`, the sample is re-orthonormalized before the multiplication
//! by `A'` when `(2j - 2) % s == 0` and before the multiplication by `A`
//! when `(2j - 1) % s == 0`. `s = 1` orthonormalizes before every product.

use crate::dense::{gaussian_matrix, mul, mul_tn, orth, DenseMatrix, RngState};
use crate::error::{Error, Result};
use crate::truncation::Truncation;

pub const DEFAULT_OVERSAMPLING: usize = 5;
pub const DEFAULT_POWER: usize = 1;
pub const DEFAULT_ORTH_PERIOD: usize = 1;

/// Finishing method applied to `B = Q'A` when building an SVD.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SvdMethod {
    /// Eigendecomposition of `B B'`.
    Bbt,
    /// Compact QR of `B'` followed by an SVD of the small triangular factor.
    Qr,
}

/// Knobs shared by the randomized routines.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchParams {
    /// Target rank; 0 selects tolerance mode where supported.
    pub k: usize,
    /// Oversampling.
    pub p: usize,
    /// Power iterations.
    pub q: usize,
    /// Orthonormalization period.
    pub s: usize,
    /// Absolute Frobenius tolerance (0 in fixed-rank mode).
    pub tol: f64,
    /// Block size of the blocked QB routines.
    pub block: usize,
    /// Maximum number of blocks.
    pub max_blocks: usize,
    pub method: SvdMethod,
    pub seed: u64,
}

impl Default for SketchParams {
    fn default() -> Self {
        SketchParams {
            k: 10,
            p: DEFAULT_OVERSAMPLING,
            q: DEFAULT_POWER,
            s: DEFAULT_ORTH_PERIOD,
            tol: 0.0,
            block: 10,
            max_blocks: 10,
            method: SvdMethod::Qr,
            seed: 0,
        }
    }
}

impl SketchParams {
    pub fn sample_size(&self) -> usize {
        self.k + self.p
    }

    pub fn truncation(&self) -> Result<Truncation> {
        Truncation::from_pair(self.k, self.tol)
    }

    /// Checks the parameter invariants against an `m x n` input.
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.s == 0 {
            return Err(Error::invalid("orthonormalization period s must be >= 1"));
        }
        if self.block == 0 || self.max_blocks == 0 {
            return Err(Error::invalid("block size and block count must be >= 1"));
        }
        self.truncation()?;
        if self.k >= 1 && self.sample_size() > m.min(n) {
            return Err(Error::invalid(format!(
                "k + p = {} exceeds min(m, n) = {}",
                self.sample_size(),
                m.min(n)
            )));
        }
        Ok(())
    }
}

fn check_sample(a: &DenseMatrix, l: usize, s: usize) -> Result<()> {
    if l == 0 || l > a.min_dim() {
        return Err(Error::invalid(format!(
            "sample size {l} must lie in 1..={} for a {}x{} matrix",
            a.min_dim(),
            a.rows(),
            a.cols()
        )));
    }
    if s == 0 {
        return Err(Error::invalid("orthonormalization period s must be >= 1"));
    }
    Ok(())
}

/// `Y = (A A')^q A Omega` for an `n x l` Gaussian `Omega`; `Y` is `m x l`.
pub fn sample_right(
    a: &DenseMatrix,
    l: usize,
    q: usize,
    s: usize,
    rng: &mut RngState,
) -> Result<DenseMatrix> {
    check_sample(a, l, s)?;
    let omega = gaussian_matrix(a.cols(), l, rng);
    let mut y = mul(a, &omega)?;
    for j in 1..=q {
        if (2 * j - 2) % s == 0 {
            y = orth(&y)?;
        }
        let mut z = mul_tn(a, &y)?;
        if (2 * j - 1) % s == 0 {
            z = orth(&z)?;
        }
        y = mul(a, &z)?;
    }
    Ok(y)
}

/// `Y = Omega A (A'A)^q` for an `l x m` Gaussian `Omega`; `Y` is `l x n`.
///
/// Computed as the transpose of [`sample_right`] on `A'`, which consumes the
/// generator identically and applies the orthonormalizations to `Y'`.
pub fn sample_left(
    a: &DenseMatrix,
    l: usize,
    q: usize,
    s: usize,
    rng: &mut RngState,
) -> Result<DenseMatrix> {
    Ok(sample_right(&a.transpose(), l, q, s, rng)?.transpose())
}
