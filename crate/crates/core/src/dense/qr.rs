//! Householder QR: compact (unpivoted) and column-pivoted partial.

use super::ops::{dot, frobenius_norm, vector_norm};
use super::{DenseMatrix, Permutation};
use crate::error::{Error, Result};
use crate::truncation::Truncation;

// Columns whose remaining norm falls below this get an identity reflector.
const UNDERFLOW: f64 = 1e-300;
// Downdated pivot norms are recomputed once they shrink below this fraction
// of the value they were last computed at.
const NORM_RECOMPUTE: f64 = 1e-3;

struct Reflector {
    v: Vec<f64>,
    beta: f64,
}

impl Reflector {
    /// Reflector mapping `x` onto `alpha * e1`. Returns `None` for a vector
    /// that is numerically zero.
    fn new(x: &[f64]) -> (Option<Reflector>, f64) {
        let norm = vector_norm(x);
        if norm < UNDERFLOW {
            return (None, x.first().copied().unwrap_or(0.0));
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vv = dot(&v, &v);
        if vv == 0.0 {
            return (None, x[0]);
        }
        (Some(Reflector { v, beta: 2.0 / vv }), alpha)
    }

    /// Applies `H = I - beta v v'` to `y` (the tail of a column).
    #[inline]
    fn apply(&self, y: &mut [f64]) {
        let s = self.beta * dot(&self.v, y);
        if s != 0.0 {
            for (yi, vi) in y.iter_mut().zip(&self.v) {
                *yi -= s * vi;
            }
        }
    }
}

/// Explicit `m x k` product of the reflectors applied to `I(:, 0..k)`.
fn form_q(m: usize, k: usize, reflectors: &[Option<Reflector>]) -> DenseMatrix {
    let mut q = DenseMatrix::from_fn(m, k, |i, j| if i == j { 1.0 } else { 0.0 });
    for (j, h) in reflectors.iter().enumerate().rev() {
        if let Some(h) = h {
            for c in j..k {
                h.apply(&mut q.col_mut(c)[j..]);
            }
        }
    }
    q
}

/// Result of [`compact_qr`].
#[derive(Clone, Debug)]
pub struct QrFactors {
    /// `m x n` with orthonormal columns.
    pub q: DenseMatrix,
    /// `n x n` upper triangular with nonnegative diagonal.
    pub r: DenseMatrix,
    /// Steps at which the remaining column was numerically zero; the
    /// corresponding column of `q` is a unit vector orthogonal to the others.
    pub degenerate: Vec<usize>,
}

/// Economy Householder QR of a tall (`rows >= cols`) matrix.
pub fn compact_qr(a: &DenseMatrix) -> Result<QrFactors> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::invalid(format!(
            "compact QR needs rows >= cols, got {m}x{n}"
        )));
    }
    let mut w = a.clone();
    let mut reflectors = Vec::with_capacity(n);
    let mut degenerate = Vec::new();
    for j in 0..n {
        let (h, alpha) = Reflector::new(&w.col(j)[j..]);
        match &h {
            Some(h) => {
                for c in j + 1..n {
                    h.apply(&mut w.col_mut(c)[j..]);
                }
                let col = w.col_mut(j);
                col[j] = alpha;
                col[j + 1..].iter_mut().for_each(|x| *x = 0.0);
            }
            None => degenerate.push(j),
        }
        reflectors.push(h);
    }
    let mut q = form_q(m, n, &reflectors);
    let mut r = DenseMatrix::from_fn(n, n, |i, j| if i <= j { w[(i, j)] } else { 0.0 });
    normalize_signs(&mut q, &mut r);
    Ok(QrFactors { q, r, degenerate })
}

/// Orthonormal basis for the range of a tall matrix (`[Q, ~] = qr(A, 0)`).
pub fn orth(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(compact_qr(a)?.q)
}

/// Flips signs so that every diagonal entry of `r` is nonnegative.
fn normalize_signs(q: &mut DenseMatrix, r: &mut DenseMatrix) {
    for j in 0..r.rows().min(r.cols()) {
        if r[(j, j)] < 0.0 {
            for c in 0..r.cols() {
                r[(j, c)] = -r[(j, c)];
            }
            q.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Result of [`pivoted_qr_partial`]: `A(:, perm) = q1 * s1 + remainder`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    /// `m x rank`, orthonormal columns.
    pub q1: DenseMatrix,
    /// `rank x n`, upper trapezoidal with nonnegative diagonal.
    pub s1: DenseMatrix,
    /// Column order; the first `rank` entries are the pivots.
    pub perm: Permutation,
    /// Number of elimination steps performed.
    pub rank: usize,
    /// Frobenius norm of the trailing block `S22`.
    pub residual: f64,
    /// False only in tolerance mode when every step was taken and the
    /// residual is still above the tolerance.
    pub tolerance_reached: bool,
}

/// Businger-Golub column-pivoted Householder QR, stopped after a fixed number
/// of steps or once the trailing block's Frobenius norm is within tolerance.
pub fn pivoted_qr_partial(a: &DenseMatrix, mode: Truncation) -> Result<PivotedQr> {
    let (m, n) = a.shape();
    let kmax = m.min(n);
    let mode = mode.check_rank(kmax)?;
    let (target, tol) = match mode {
        Truncation::Rank(k) => (k, None),
        Truncation::Tolerance(t) => (kmax, Some(t)),
    };

    let mut w = a.clone();
    let mut perm = Permutation::identity(n);
    let mut norms: Vec<f64> = (0..n).map(|c| vector_norm(w.col(c))).collect();
    let mut ref_norms = norms.clone();
    let mut reflectors: Vec<Option<Reflector>> = Vec::with_capacity(target);
    let mut tolerance_reached = tol.is_none();

    let mut step = 0;
    loop {
        if let Some(t) = tol {
            let est = norms[step..].iter().map(|x| x * x).sum::<f64>().sqrt();
            if est <= t {
                // Confirm against the exact trailing block before halting.
                let exact = trailing_norm(&w, step);
                if exact <= t {
                    tolerance_reached = true;
                    break;
                }
                for c in step..n {
                    norms[c] = vector_norm(&w.col(c)[step..]);
                    ref_norms[c] = norms[c];
                }
            }
        }
        if step == target {
            break;
        }
        let j = step;
        let pivot = (j..n).fold(j, |best, c| if norms[c] > norms[best] { c } else { best });
        if pivot != j {
            w.swap_columns(j, pivot);
            perm.swap(j, pivot);
            norms.swap(j, pivot);
            ref_norms.swap(j, pivot);
        }
        let (h, alpha) = Reflector::new(&w.col(j)[j..]);
        if let Some(h) = &h {
            for c in j + 1..n {
                h.apply(&mut w.col_mut(c)[j..]);
            }
            let col = w.col_mut(j);
            col[j] = alpha;
            col[j + 1..].iter_mut().for_each(|x| *x = 0.0);
        }
        reflectors.push(h);
        for c in j + 1..n {
            let top = w[(j, c)];
            let down = (norms[c] * norms[c] - top * top).max(0.0).sqrt();
            if down < NORM_RECOMPUTE * ref_norms[c] {
                norms[c] = vector_norm(&w.col(c)[j + 1..]);
                ref_norms[c] = norms[c];
            } else {
                norms[c] = down;
            }
        }
        step += 1;
    }

    let rank = step;
    let residual = trailing_norm(&w, rank);
    let mut q1 = form_q(m, rank, &reflectors);
    let mut s1 = DenseMatrix::from_fn(rank, n, |i, j| if i <= j { w[(i, j)] } else { 0.0 });
    normalize_signs(&mut q1, &mut s1);
    Ok(PivotedQr {
        q1,
        s1,
        perm,
        rank,
        residual,
        tolerance_reached,
    })
}

fn trailing_norm(w: &DenseMatrix, k: usize) -> f64 {
    let (m, n) = w.shape();
    if k >= m || k >= n {
        return 0.0;
    }
    frobenius_norm(&w.block(k..m, k..n))
}

/// Solution of `S11 T = S12` with the interpolation-coefficient guard.
#[derive(Clone, Debug)]
pub struct TriangularSolve {
    pub t: DenseMatrix,
    /// Set when some entry of `t` was clamped to `±MAX_COEFFICIENT`.
    pub clamped: bool,
}

/// Largest interpolation coefficient magnitude kept after stabilization.
pub const MAX_COEFFICIENT: f64 = 1e4;
/// Diagonal dynamic range of `S11` above which stabilization is applied.
pub const STABILIZE_RATIO: f64 = 1e12;

/// Back substitution for upper triangular `S11` (`k x k`) against `S12`
/// (`k x r`). When the diagonal of `S11` spans more than twelve orders of
/// magnitude the coefficients are clamped to `±1e4`.
pub fn upper_tri_solve(s11: &DenseMatrix, s12: &DenseMatrix) -> Result<TriangularSolve> {
    let k = s11.rows();
    if s11.cols() != k || s12.rows() != k {
        return Err(Error::DimensionMismatch {
            op: "upper_tri_solve",
            left: s11.shape(),
            right: s12.shape(),
        });
    }
    let mut dmax = 0.0_f64;
    let mut dmin = f64::INFINITY;
    for i in 0..k {
        let d = s11[(i, i)].abs();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::ZeroDiagonal { index: i });
        }
        dmax = dmax.max(d);
        dmin = dmin.min(d);
    }
    let mut t = s12.clone();
    for c in 0..t.cols() {
        let col = t.col_mut(c);
        for i in (0..k).rev() {
            let mut s = col[i];
            for l in i + 1..k {
                s -= s11[(i, l)] * col[l];
            }
            col[i] = s / s11[(i, i)];
        }
    }
    let mut clamped = false;
    if k > 0 && dmax / dmin > STABILIZE_RATIO {
        for x in t.as_mut_slice() {
            if x.abs() > MAX_COEFFICIENT {
                *x = MAX_COEFFICIENT.copysign(*x);
                clamped = true;
            }
        }
    }
    Ok(TriangularSolve { t, clamped })
}
