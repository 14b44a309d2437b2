//! Interpolative decompositions and CUR.
//!
//! A column ID writes `A ~ A(:, J(1:k)) V'` where `V` (n x k) contains the
//! identity on the skeleton rows `J(1:k)`; a row ID writes
//! `A ~ W A(I(1:k), :)` with `W` (m x k). CUR keeps actual columns and rows
//! and solves for the small linkage matrix by least squares.

use crate::dense::{
    compact_qr, mul, mul_tn, pivoted_qr_partial, upper_tri_solve, DenseMatrix, Permutation,
    PivotedQr, RngState,
};
use crate::error::{Error, Result};
use crate::qb::{qb_blocked, QbFactors};
use crate::sketch::{sample_left, SketchParams};
use crate::truncation::Truncation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `A ~ A(:, J(1:k)) V'`
    Column,
    /// `A ~ W A(J(1:k), :)`
    Row,
}

/// One-sided ID. `coeffs` is `V` for a column ID and `W` for a row ID.
#[derive(Clone, Debug)]
pub struct IdFactors {
    pub perm: Permutation,
    pub coeffs: DenseMatrix,
    pub rank: usize,
    pub side: Side,
    /// `||S22||_F` of the pivoted QR the ID was built from, when that QR
    /// was taken of `A` itself.
    pub residual: Option<f64>,
    /// Some interpolation coefficient hit the stabilization clamp.
    pub clamped: bool,
    pub tolerance_reached: bool,
}

impl IdFactors {
    pub fn skeleton(&self) -> &[usize] {
        self.perm.prefix(self.rank)
    }

    /// The skeleton columns (or rows) of `a`.
    pub fn skeleton_of(&self, a: &DenseMatrix) -> DenseMatrix {
        match self.side {
            Side::Column => a.select_columns(self.skeleton()),
            Side::Row => a.select_rows(self.skeleton()),
        }
    }

    pub fn reconstruct(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        let skel = self.skeleton_of(a);
        match self.side {
            Side::Column => mul(&skel, &self.coeffs.transpose()),
            Side::Row => mul(&self.coeffs, &skel),
        }
    }
}

/// `A ~ W A(I(1:k), J(1:k)) V'`.
#[derive(Clone, Debug)]
pub struct TwoSidedIdFactors {
    pub row_perm: Permutation,
    pub col_perm: Permutation,
    pub w: DenseMatrix,
    pub v: DenseMatrix,
    pub rank: usize,
    /// Residual of the underlying column ID, when known.
    pub residual: Option<f64>,
    pub clamped: bool,
    pub tolerance_reached: bool,
}

impl TwoSidedIdFactors {
    pub fn rows(&self) -> &[usize] {
        self.row_perm.prefix(self.rank)
    }

    pub fn cols(&self) -> &[usize] {
        self.col_perm.prefix(self.rank)
    }

    pub fn core(&self, a: &DenseMatrix) -> DenseMatrix {
        a.select_rows(self.rows()).select_columns(self.cols())
    }

    pub fn reconstruct(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        mul(&mul(&self.w, &self.core(a))?, &self.v.transpose())
    }
}

/// `A ~ C U R` with `C = A(:, J(1:k))` and `R = A(I(1:k), :)`.
#[derive(Clone, Debug)]
pub struct CurFactors {
    pub c: DenseMatrix,
    pub u: DenseMatrix,
    pub r: DenseMatrix,
    pub row_perm: Permutation,
    pub col_perm: Permutation,
    pub rank: usize,
    /// `||A - CUR||_F`.
    pub residual: f64,
    pub tolerance_reached: bool,
}

impl CurFactors {
    pub fn reconstruct(&self) -> Result<DenseMatrix> {
        mul(&mul(&self.c, &self.u)?, &self.r)
    }
}

/// `V = P [I_k; T']`: row `perm[i]` is `e_i` for `i < k` and row
/// `perm[k + r]` is column `r` of `T`.
fn interpolation_matrix(perm: &Permutation, t: &DenseMatrix, k: usize) -> DenseMatrix {
    let n = perm.len();
    let idx = perm.as_slice();
    let mut v = DenseMatrix::zeros(n, k);
    for i in 0..k {
        v[(idx[i], i)] = 1.0;
    }
    for r in 0..n - k {
        for i in 0..k {
            v[(idx[k + r], i)] = t[(i, r)];
        }
    }
    v
}

/// Builds the column ID from the first `k` rows of a pivoted QR.
fn id_from_pivoted(qr: &PivotedQr, k: usize) -> Result<(DenseMatrix, bool)> {
    let n = qr.perm.len();
    if k == 0 {
        return Ok((DenseMatrix::zeros(n, 0), false));
    }
    let s11 = qr.s1.block(0..k, 0..k);
    let s12 = qr.s1.block(0..k, k..n);
    let solve = upper_tri_solve(&s11, &s12)?;
    Ok((interpolation_matrix(&qr.perm, &solve.t, k), solve.clamped))
}

/// Deterministic column ID from a partial pivoted QR.
pub fn id_column(a: &DenseMatrix, mode: Truncation) -> Result<IdFactors> {
    let qr = pivoted_qr_partial(a, mode)?;
    let (v, clamped) = id_from_pivoted(&qr, qr.rank)?;
    Ok(IdFactors {
        rank: qr.rank,
        perm: qr.perm,
        coeffs: v,
        side: Side::Column,
        residual: Some(qr.residual),
        clamped,
        tolerance_reached: qr.tolerance_reached,
    })
}

/// Row ID: the column ID of `A'` read with rows and columns exchanged.
pub fn id_row(a: &DenseMatrix, mode: Truncation) -> Result<IdFactors> {
    let mut f = id_column(&a.transpose(), mode)?;
    f.side = Side::Row;
    Ok(f)
}

/// Column ID of `A`, then a full-rank row ID of the skeleton columns `C`.
/// The second step is exact, so the error is that of the column ID.
pub fn id_two_sided(a: &DenseMatrix, mode: Truncation) -> Result<TwoSidedIdFactors> {
    let col = id_column(a, mode)?;
    two_sided_from_column(a, col)
}

fn two_sided_from_column(a: &DenseMatrix, col: IdFactors) -> Result<TwoSidedIdFactors> {
    let k = col.rank;
    let (row_perm, w, row_clamped) = if k == 0 {
        (Permutation::identity(a.rows()), DenseMatrix::zeros(a.rows(), 0), false)
    } else {
        let row = id_row(&col.skeleton_of(a), Truncation::Rank(k))?;
        (row.perm, row.coeffs, row.clamped)
    };
    Ok(TwoSidedIdFactors {
        row_perm,
        col_perm: col.perm,
        w,
        v: col.coeffs,
        rank: k,
        residual: col.residual,
        clamped: col.clamped || row_clamped,
        tolerance_reached: col.tolerance_reached,
    })
}

/// CUR from a two-sided ID: `C` and `R` are extracted from `A` and `U`
/// minimizes `||R' U' - V||_F` through a compact QR of `R'`.
pub fn cur(a: &DenseMatrix, mode: Truncation) -> Result<CurFactors> {
    cur_from_two_sided(a, id_two_sided(a, mode)?)
}

fn cur_from_two_sided(a: &DenseMatrix, ts: TwoSidedIdFactors) -> Result<CurFactors> {
    let c = a.select_columns(ts.cols());
    let r = a.select_rows(ts.rows());
    let u = if ts.rank == 0 {
        DenseMatrix::zeros(0, 0)
    } else {
        linkage(&r, &ts.v, ts.rows())?
    };
    let residual = a.sub(&mul(&mul(&c, &u)?, &r)?)?.frobenius_norm();
    Ok(CurFactors {
        c,
        u,
        r,
        row_perm: ts.row_perm,
        col_perm: ts.col_perm,
        rank: ts.rank,
        residual,
        tolerance_reached: ts.tolerance_reached,
    })
}

/// `U = V' R^+` via `R' = Q_r S_r`, `U' = S_r^{-1} Q_r' V`.
fn linkage(r: &DenseMatrix, v: &DenseMatrix, rows: &[usize]) -> Result<DenseMatrix> {
    let rt = r.transpose();
    let qr = compact_qr(&rt)?;
    let k = qr.r.rows();
    let dmax = (0..k).map(|j| qr.r[(j, j)].abs()).fold(0.0, f64::max);
    let floor = f64::EPSILON * rt.rows() as f64 * dmax;
    for j in 0..k {
        if qr.r[(j, j)].abs() <= floor {
            return Err(Error::DeficientSkeleton { row: rows[j] });
        }
    }
    let mut ut = mul_tn(&qr.q, v)?;
    for c in 0..ut.cols() {
        let col = ut.col_mut(c);
        for i in (0..k).rev() {
            let mut s = col[i];
            for l in i + 1..k {
                s -= qr.r[(i, l)] * col[l];
            }
            col[i] = s / qr.r[(i, i)];
        }
    }
    Ok(ut.transpose())
}

fn check_sizes(a: &DenseMatrix, k: usize, p: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("rank k must be at least 1"));
    }
    if k + p > a.min_dim() {
        return Err(Error::invalid(format!(
            "k + p = {} exceeds min(m, n) = {}",
            k + p,
            a.min_dim()
        )));
    }
    Ok(())
}

/// Randomized column ID: pivoted QR of the `(k + p) x n` sample
/// `Omega A (A'A)^q`, truncated to `k` steps. The skeleton is chosen from
/// the sample, so no residual is reported.
pub fn id_rand(
    a: &DenseMatrix,
    k: usize,
    p: usize,
    q: usize,
    s: usize,
    rng: &mut RngState,
) -> Result<IdFactors> {
    check_sizes(a, k, p)?;
    let y = sample_left(a, k + p, q, s, rng)?;
    let full = pivoted_qr_partial(&y, Truncation::Rank(y.min_dim()))?;
    let (v, clamped) = id_from_pivoted(&full, k)?;
    Ok(IdFactors {
        perm: full.perm,
        coeffs: v,
        rank: k,
        side: Side::Column,
        residual: None,
        clamped,
        tolerance_reached: true,
    })
}

/// Column ID of `B = Q'A`, whose skeleton and coefficients are used for `A`.
///
/// Fixed rank `k` must not exceed the rows of `B`; in tolerance mode the
/// pivoted QR of `B` runs until `||S22||_F <= tol`.
pub fn id_from_qb(qb: &QbFactors, mode: Truncation) -> Result<IdFactors> {
    if let Truncation::Rank(k) = mode {
        if k > qb.b.rows() {
            return Err(Error::invalid(format!(
                "rank {k} exceeds the {} rows of B",
                qb.b.rows()
            )));
        }
    }
    if qb.b.rows() == 0 {
        return Ok(IdFactors {
            perm: Permutation::identity(qb.b.cols()),
            coeffs: DenseMatrix::zeros(qb.b.cols(), 0),
            rank: 0,
            side: Side::Column,
            residual: None,
            clamped: false,
            tolerance_reached: qb.tolerance_reached,
        });
    }
    let mut f = id_column(&qb.b, mode)?;
    f.residual = None;
    Ok(f)
}

/// Randomized CUR: one randomized column ID, then a deterministic row ID of
/// the skeleton columns.
pub fn cur_rand(
    a: &DenseMatrix,
    k: usize,
    p: usize,
    q: usize,
    s: usize,
    rng: &mut RngState,
) -> Result<CurFactors> {
    let col = id_rand(a, k, p, q, s, rng)?;
    cur_from_two_sided(a, two_sided_from_column(a, col)?)
}

/// Number of blocks for a fixed-rank block-randomized run: enough blocks of
/// `block` columns to reach `k + p`, capped by `min(m, n)`.
fn blocks_for(params: &SketchParams, a: &DenseMatrix) -> usize {
    let l = (params.k + params.p).min(a.min_dim());
    l.div_ceil(params.block).max(1)
}

/// Block-randomized QB of `a` configured from `params`: to rank about
/// `k + p` when `k >= 1`, otherwise until `||A - QB||_F < tol` (at most
/// `max_blocks` blocks).
pub fn blockrand_qb(a: &DenseMatrix, params: &SketchParams, rng: &mut RngState) -> Result<QbFactors> {
    match params.truncation()? {
        Truncation::Rank(_) => qb_blocked(a, params.block, blocks_for(params, a), 0.0, params.q, 1, rng),
        Truncation::Tolerance(t) => qb_blocked(a, params.block, params.max_blocks, t, params.q, 1, rng),
    }
}

/// Block-randomized ID: QB, then [`id_from_qb`] with rank `k` or, in
/// tolerance mode, with the tolerance applied to the pivoted QR of `B`.
pub fn id_blockrand(a: &DenseMatrix, params: &SketchParams, rng: &mut RngState) -> Result<IdFactors> {
    let mode = params.truncation()?;
    let qb = blockrand_qb(a, params, rng)?;
    let mut f = id_from_qb(&qb, mode)?;
    f.tolerance_reached &= qb.tolerance_reached;
    Ok(f)
}

pub fn cur_blockrand(a: &DenseMatrix, params: &SketchParams, rng: &mut RngState) -> Result<CurFactors> {
    let col = id_blockrand(a, params, rng)?;
    cur_from_two_sided(a, two_sided_from_column(a, col)?)
}
