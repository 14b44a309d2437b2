//! Adaptive and blocked QB factorizations `A ~ QB` with `Q` orthonormal.

use rayon::prelude::*;

use crate::dense::{
    gaussian_matrix, mul, mul_tn, orth, vector_norm, DenseMatrix, RngState,
};
use crate::error::{Error, Result};

/// `A ~ QB`. `residual` is `||A - QB||_F` at exit and `history` holds the
/// residual after each appended column (single-vector) or block.
#[derive(Clone, Debug)]
pub struct QbFactors {
    pub q: DenseMatrix,
    pub b: DenseMatrix,
    pub rank: usize,
    pub residual: f64,
    pub history: Vec<f64>,
    /// `false` when a tolerance was requested but not met.
    pub tolerance_reached: bool,
}

impl QbFactors {
    pub fn reconstruct(&self) -> Result<DenseMatrix> {
        mul(&self.q, &self.b)
    }
}

fn empty(m: usize, n: usize) -> (DenseMatrix, DenseMatrix) {
    (DenseMatrix::zeros(m, 0), DenseMatrix::zeros(0, n))
}

fn subtract_outer(a: &mut DenseMatrix, q: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    let qb = mul(q, b)?;
    for (x, y) in a.as_mut_slice().iter_mut().zip(qb.as_slice()) {
        *x -= y;
    }
    Ok(())
}

/// Removes the components of `x` along the orthonormal columns of `q`.
fn project_out(x: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    if q.cols() == 0 {
        return Ok(x.clone());
    }
    x.sub(&mul(q, &mul_tn(q, x)?)?)
}

/// Single-vector adaptive range finder.
///
/// Each step samples the current residual with one Gaussian vector,
/// orthogonalizes the sample against the accumulated basis (twice), appends
/// `q_j` and `b_j = q_j' A^(j)`, and deflates. Stops when the residual drops
/// strictly below `tol` or `max_rank` columns have been taken.
pub fn qb_single(a: &DenseMatrix, tol: f64, max_rank: usize, rng: &mut RngState) -> Result<QbFactors> {
    let (m, n) = a.shape();
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid("qb_single needs a positive finite tolerance"));
    }
    if max_rank > a.min_dim() {
        return Err(Error::invalid(format!(
            "max_rank {max_rank} exceeds min(m, n) = {}",
            a.min_dim()
        )));
    }
    let mut r = a.clone();
    let (mut q, mut b) = empty(m, n);
    let mut history = Vec::new();
    let mut residual = r.frobenius_norm();
    while residual >= tol && q.cols() < max_rank {
        let omega = gaussian_matrix(n, 1, rng);
        let mut y = mul(&r, &omega)?;
        for _ in 0..2 {
            y = project_out(&y, &q)?;
        }
        let ny = vector_norm(y.as_slice());
        if ny == 0.0 {
            break;
        }
        let qj = y.scale(1.0 / ny);
        let bj = mul_tn(&qj, &r)?;
        subtract_outer(&mut r, &qj, &bj)?;
        q = q.hcat(&qj)?;
        b = b.vcat(&bj)?;
        residual = r.frobenius_norm();
        history.push(residual);
    }
    Ok(QbFactors {
        rank: q.cols(),
        q,
        b,
        residual,
        history,
        tolerance_reached: residual < tol,
    })
}

/// Blocked randomized QB on a copy of `a`; see [`qb_blocked_in_place`].
pub fn qb_blocked(
    a: &DenseMatrix,
    block: usize,
    max_blocks: usize,
    tol: f64,
    q: usize,
    reorth_period: usize,
    rng: &mut RngState,
) -> Result<QbFactors> {
    let mut work = a.clone();
    qb_blocked_in_place(&mut work, block, max_blocks, tol, q, reorth_period, rng)
}

fn check_blocks(block: usize, max_blocks: usize) -> Result<()> {
    if block == 0 || max_blocks == 0 {
        return Err(Error::invalid("block size and block count must be >= 1"));
    }
    Ok(())
}

/// Gaussian test matrix for block `i` (0-based). Every block owns a
/// substream of one base seed, so the draws do not depend on the order in
/// which blocks are processed.
fn block_omega(base: u64, i: usize, n: usize, b: usize) -> DenseMatrix {
    gaussian_matrix(n, b, &mut RngState::with_stream(base, i as u64 + 1))
}

/// Blocked randomized QB. Overwrites `a` with the residual `A - QB`.
///
/// Per block: `Q_i = orth(A Omega_i)`, `q` rounds of
/// `Q_i = orth(A' Q_i); Q_i = orth(A Q_i)`, reorthogonalization against the
/// accumulated basis when `(i - 1) % reorth_period == 0`, then
/// `B_i = Q_i' A` and `A -= Q_i B_i`. The loop stops after `max_blocks`
/// blocks or as soon as `||A||_F < tol`; `tol = 0` always runs every block.
/// The final block is shortened if it would exceed `min(m, n)` columns.
pub fn qb_blocked_in_place(
    a: &mut DenseMatrix,
    block: usize,
    max_blocks: usize,
    tol: f64,
    q: usize,
    reorth_period: usize,
    rng: &mut RngState,
) -> Result<QbFactors> {
    check_blocks(block, max_blocks)?;
    if reorth_period == 0 {
        return Err(Error::invalid("reorthogonalization period must be >= 1"));
    }
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::invalid("tolerance must be finite and nonnegative"));
    }
    let (m, n) = a.shape();
    let base = rng.next_u64();
    let (mut qbar, mut bbar) = empty(m, n);
    let mut history = Vec::new();
    let mut residual = a.frobenius_norm();
    for i in 1..=max_blocks {
        let b = block.min(a.min_dim() - qbar.cols());
        if b == 0 || residual < tol {
            break;
        }
        let omega = block_omega(base, i - 1, n, b);
        let mut qi = orth(&mul(a, &omega)?)?;
        for _ in 0..q {
            qi = orth(&mul_tn(a, &qi)?)?;
            qi = orth(&mul(a, &qi)?)?;
        }
        if (i - 1) % reorth_period == 0 {
            qi = orth(&project_out(&qi, &qbar)?)?;
        }
        let bi = mul_tn(&qi, a)?;
        subtract_outer(a, &qi, &bi)?;
        qbar = qbar.hcat(&qi)?;
        bbar = bbar.vcat(&bi)?;
        residual = a.frobenius_norm();
        history.push(residual);
        if residual < tol {
            break;
        }
    }
    Ok(QbFactors {
        rank: qbar.cols(),
        q: qbar,
        b: bbar,
        residual,
        history,
        tolerance_reached: tol == 0.0 || residual < tol,
    })
}

/// Approximate parallel QB with fixed rank `block * max_blocks`.
///
/// The sampling loop runs once per block independently (and concurrently);
/// the blocks are then orthonormalized, projected against the accumulated
/// basis one after another, and `B = Q'A` is formed with one product.
pub fn qb_parallel(
    a: &DenseMatrix,
    block: usize,
    max_blocks: usize,
    q: usize,
    rng: &mut RngState,
) -> Result<QbFactors> {
    check_blocks(block, max_blocks)?;
    let (m, n) = a.shape();
    if block * max_blocks > a.min_dim() {
        return Err(Error::invalid(format!(
            "block * max_blocks = {} exceeds min(m, n) = {}",
            block * max_blocks,
            a.min_dim()
        )));
    }
    let base = rng.next_u64();
    let samples: Vec<DenseMatrix> = (0..max_blocks)
        .into_par_iter()
        .map(|i| -> Result<DenseMatrix> {
            let omega = block_omega(base, i, n, block);
            let mut y = mul(a, &omega)?;
            for _ in 0..q {
                let qi = orth(&y)?;
                y = mul_tn(a, &qi)?;
                let qi = orth(&y)?;
                y = mul(a, &qi)?;
            }
            Ok(y)
        })
        .collect::<Result<_>>()?;
    let blocks: Vec<DenseMatrix> = samples.par_iter().map(orth).collect::<Result<_>>()?;

    let mut qbar = DenseMatrix::zeros(m, 0);
    for qi in &blocks {
        // independent blocks overlap heavily; one projection leaves ~1e-10
        let qi = project_out(&project_out(qi, &qbar)?, &qbar)?;
        let qi = orth(&qi)?;
        qbar = qbar.hcat(&qi)?;
    }
    let b = mul_tn(&qbar, a)?;
    let residual = a.sub(&mul(&qbar, &b)?)?.frobenius_norm();
    Ok(QbFactors {
        rank: qbar.cols(),
        q: qbar,
        b,
        residual,
        history: vec![residual],
        tolerance_reached: true,
    })
}

/// Row-partitioned QB.
///
/// `A` is split into `num_row_blocks` (a power of two) horizontal slabs, the
/// last absorbing any remainder rows. Each slab gets a fixed-rank
/// [`qb_blocked`]; sibling results are merged pairwise by stacking their `B`
/// factors and taking a QB of the stack, so that
/// `[Q_a 0; 0 Q_b] [B_a; B_b] ~ [Q_a 0; 0 Q_b] Q_ab B_ab`. The orthonormal
/// factor is materialized at every level.
pub fn qb_hierarchical(
    a: &DenseMatrix,
    num_row_blocks: usize,
    block: usize,
    max_blocks: usize,
    q: usize,
    rng: &mut RngState,
) -> Result<QbFactors> {
    check_blocks(block, max_blocks)?;
    if num_row_blocks < 2 || !num_row_blocks.is_power_of_two() {
        return Err(Error::invalid(format!(
            "number of row blocks must be a power of two >= 2, got {num_row_blocks}"
        )));
    }
    let (m, n) = a.shape();
    let height = m / num_row_blocks;
    if height == 0 {
        return Err(Error::invalid(format!(
            "{m} rows cannot be split into {num_row_blocks} blocks"
        )));
    }
    let base = rng.next_u64();
    let leaf_qb = |slab: &DenseMatrix, stream: u64| -> Result<(DenseMatrix, DenseMatrix)> {
        let mut r = RngState::with_stream(base, stream);
        let f = qb_blocked(slab, block, max_blocks, 0.0, q, 1, &mut r)?;
        Ok((f.q, f.b))
    };

    let mut level: Vec<(DenseMatrix, DenseMatrix)> = (0..num_row_blocks)
        .into_par_iter()
        .map(|i| {
            let end = if i + 1 == num_row_blocks { m } else { (i + 1) * height };
            leaf_qb(&a.row_range(i * height, end), i as u64 + 1)
        })
        .collect::<Result<_>>()?;

    let mut stream = num_row_blocks as u64;
    while level.len() > 1 {
        let first = stream;
        stream += level.len() as u64 / 2;
        level = level
            .par_chunks(2)
            .enumerate()
            .map(|(j, pair)| {
                let (qa, ba) = &pair[0];
                let (qb, bb) = &pair[1];
                let stacked = ba.vcat(bb)?;
                let (qab, bab) = leaf_qb(&stacked, first + j as u64 + 1)?;
                let top = mul(qa, &qab.row_range(0, qa.cols()))?;
                let bottom = mul(qb, &qab.row_range(qa.cols(), qab.rows()))?;
                Ok((top.vcat(&bottom)?, bab))
            })
            .collect::<Result<_>>()?;
    }
    let (qbar, b) = level.pop().unwrap();
    let residual = a.sub(&mul(&qbar, &b)?)?.frobenius_norm();
    debug_assert_eq!(qbar.rows(), m);
    debug_assert_eq!(b.cols(), n);
    Ok(QbFactors {
        rank: qbar.cols(),
        q: qbar,
        b,
        residual,
        history: vec![residual],
        tolerance_reached: true,
    })
}
