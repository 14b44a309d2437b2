//! Storage counts and accuracy reports for computed factorizations.

use serde::Serialize;

use crate::dense::{spectral_norm_est, DenseMatrix, RngState};
use crate::error::{Error, Result};
use crate::interp::{CurFactors, IdFactors, Side, TwoSidedIdFactors};
use crate::qb::QbFactors;
use crate::rsvd::SvdFactors;

/// Seed of the power iteration behind the reported spectral errors.
const SPECTRAL_SEED: u64 = 0x5eed;
const SPECTRAL_ITERS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Svd,
    ColumnId,
    RowId,
    TwoSidedId,
    Cur,
    Qb,
}

impl FactorKind {
    pub fn name(self) -> &'static str {
        match self {
            FactorKind::Svd => "svd",
            FactorKind::ColumnId => "id",
            FactorKind::RowId => "row_id",
            FactorKind::TwoSidedId => "two_sided_id",
            FactorKind::Cur => "cur",
            FactorKind::Qb => "qb",
        }
    }
}

/// Storage model for the factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Density {
    /// Every stored entry counts.
    Dense,
    /// Parts copied out of `A` (skeleton columns and rows) are assumed to
    /// hold this fraction of nonzeros; computed parts stay dense.
    Sparse(f64),
}

/// Nonzero counts per stored part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NnzCounts {
    pub parts: Vec<(&'static str, u64)>,
    pub total: u64,
}

impl NnzCounts {
    fn new(parts: Vec<(&'static str, u64)>) -> Self {
        let total = parts.iter().map(|p| p.1).sum();
        NnzCounts { parts, total }
    }

    pub fn describe(&self) -> String {
        self.parts
            .iter()
            .map(|(name, v)| format!("{name}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Stored entries for a rank-`k` factorization of an `m x n` matrix.
///
/// * SVD: `U` (km), `sigma` (k), `V` (kn): `k(m + n + 1)`.
/// * column ID: `C` (km), the non-identity block of `V` (k(n - k)), and
///   `k` skeleton indices. A row ID swaps the roles of `m` and `n`.
/// * two-sided ID: non-identity blocks of `W` and `V`, the `k x k` core,
///   and `2k` indices.
/// * CUR: `C` (km), `U` (k^2), `R` (kn): `k(m + n + k)`.
/// * QB: `Q` (mk) and `B` (kn).
///
/// In sparse mode `C`, `R`, and the two-sided core are counted at
/// `round(f * size)`.
pub fn nnz_counts(kind: FactorKind, m: usize, n: usize, k: usize, density: Density) -> NnzCounts {
    let (m, n, k) = (m as u64, n as u64, k as u64);
    let copied = |size: u64| match density {
        Density::Dense => size,
        Density::Sparse(f) => (f * size as f64).round() as u64,
    };
    NnzCounts::new(match kind {
        FactorKind::Svd => vec![("U", k * m), ("S", k), ("V", k * n)],
        FactorKind::ColumnId => vec![("C", copied(k * m)), ("V", k * (n - k)), ("J", k)],
        FactorKind::RowId => vec![("W", k * (m - k)), ("R", copied(k * n)), ("I", k)],
        FactorKind::TwoSidedId => vec![
            ("W", k * (m - k)),
            ("core", copied(k * k)),
            ("V", k * (n - k)),
            ("IJ", 2 * k),
        ],
        FactorKind::Cur => vec![("C", copied(k * m)), ("U", k * k), ("R", copied(k * n))],
        FactorKind::Qb => vec![("Q", m * k), ("B", k * n)],
    })
}

/// A computed low-rank approximation of some `A`.
pub trait Factorization {
    fn kind(&self) -> FactorKind;
    fn rank(&self) -> usize;
    /// The dense approximation. Skeleton factorizations read their columns
    /// and rows from `a`.
    fn approximate(&self, a: &DenseMatrix) -> Result<DenseMatrix>;
}

impl Factorization for SvdFactors {
    fn kind(&self) -> FactorKind {
        FactorKind::Svd
    }
    fn rank(&self) -> usize {
        self.rank
    }
    fn approximate(&self, _: &DenseMatrix) -> Result<DenseMatrix> {
        self.reconstruct()
    }
}

impl Factorization for IdFactors {
    fn kind(&self) -> FactorKind {
        match self.side {
            Side::Column => FactorKind::ColumnId,
            Side::Row => FactorKind::RowId,
        }
    }
    fn rank(&self) -> usize {
        self.rank
    }
    fn approximate(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        self.reconstruct(a)
    }
}

impl Factorization for TwoSidedIdFactors {
    fn kind(&self) -> FactorKind {
        FactorKind::TwoSidedId
    }
    fn rank(&self) -> usize {
        self.rank
    }
    fn approximate(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        self.reconstruct(a)
    }
}

impl Factorization for CurFactors {
    fn kind(&self) -> FactorKind {
        FactorKind::Cur
    }
    fn rank(&self) -> usize {
        self.rank
    }
    fn approximate(&self, _: &DenseMatrix) -> Result<DenseMatrix> {
        self.reconstruct()
    }
}

impl Factorization for QbFactors {
    fn kind(&self) -> FactorKind {
        FactorKind::Qb
    }
    fn rank(&self) -> usize {
        self.rank
    }
    fn approximate(&self, _: &DenseMatrix) -> Result<DenseMatrix> {
        self.reconstruct()
    }
}

pub fn nnz_report(f: &dyn Factorization, m: usize, n: usize, density: Density) -> NnzCounts {
    nnz_counts(f.kind(), m, n, f.rank(), density)
}

/// Accuracy and storage summary; one CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub method: String,
    pub k: usize,
    pub params: String,
    pub m: usize,
    pub n: usize,
    pub rel_frobenius_error: f64,
    pub rel_spectral_error: f64,
    /// `sqrt(sum_{j > k} sigma_j^2)`, the best possible Frobenius error.
    pub tail_floor: Option<f64>,
    /// `tail_floor / ||A||_F`.
    pub rel_tail_floor: Option<f64>,
    pub sigma_next: Option<f64>,
    /// `sqrt(k n) sigma_{k+1}`.
    pub bound_sqrt_kn: Option<f64>,
    /// `(k n)^(1 / (2(2q + 1))) sigma_{k+1}`.
    pub bound_power: Option<f64>,
    pub nnz_total: u64,
    pub nnz_parts: String,
    pub wall_seconds: f64,
}

/// Options of [`verify`] beyond the matrix and the factors.
#[derive(Clone, Debug)]
pub struct VerifyContext<'a> {
    pub method: String,
    pub params: String,
    /// Known singular values of `A`, descending.
    pub sigma: Option<&'a [f64]>,
    /// Power-iteration count behind the factors, for the power bound.
    pub q: Option<usize>,
    pub density: Density,
    pub wall_seconds: f64,
}

impl Default for VerifyContext<'_> {
    fn default() -> Self {
        VerifyContext {
            method: String::new(),
            params: String::new(),
            sigma: None,
            q: None,
            density: Density::Dense,
            wall_seconds: 0.0,
        }
    }
}

/// Recomputes the approximation densely and fills an [`ErrorReport`].
pub fn verify(a: &DenseMatrix, f: &dyn Factorization, ctx: &VerifyContext) -> Result<ErrorReport> {
    let (m, n) = a.shape();
    let approx = f.approximate(a)?;
    if approx.shape() != a.shape() {
        return Err(Error::DimensionMismatch {
            op: "verify",
            left: a.shape(),
            right: approx.shape(),
        });
    }
    let resid = a.sub(&approx)?;
    let fro = a.frobenius_norm();
    let rel = |x: f64| if fro > 0.0 { x / fro } else { x };
    let mut rng = RngState::new(SPECTRAL_SEED);
    let a2 = spectral_norm_est(a, SPECTRAL_ITERS, &mut rng);
    let mut rng = RngState::new(SPECTRAL_SEED);
    let r2 = spectral_norm_est(&resid, SPECTRAL_ITERS, &mut rng);
    let k = f.rank();

    let (tail, next) = match ctx.sigma {
        Some(s) => (
            Some(s.iter().skip(k).map(|x| x * x).sum::<f64>().sqrt()),
            Some(s.get(k).copied().unwrap_or(0.0)),
        ),
        None => (None, None),
    };
    let kn = (k * n) as f64;
    let nnz = nnz_report(f, m, n, ctx.density);
    Ok(ErrorReport {
        method: if ctx.method.is_empty() { f.kind().name().to_string() } else { ctx.method.clone() },
        k,
        params: ctx.params.clone(),
        m,
        n,
        rel_frobenius_error: rel(resid.frobenius_norm()),
        rel_spectral_error: if a2 > 0.0 { r2 / a2 } else { r2 },
        tail_floor: tail,
        rel_tail_floor: tail.map(rel),
        sigma_next: next,
        bound_sqrt_kn: next.map(|s| kn.sqrt() * s),
        bound_power: next
            .zip(ctx.q)
            .map(|(s, q)| kn.powf(1.0 / (2.0 * (2 * q + 1) as f64)) * s),
        nnz_total: nnz.total,
        nnz_parts: nnz.describe(),
        wall_seconds: ctx.wall_seconds,
    })
}
