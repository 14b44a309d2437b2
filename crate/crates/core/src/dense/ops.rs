use rayon::prelude::*;

use super::{gaussian_matrix, DenseMatrix, RngState};
use crate::error::{Error, Result};

/// Whether an operand enters a product as-is or transposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trans {
    No,
    Yes,
}

// Products below this many multiply-adds stay on the calling thread.
const PAR_THRESHOLD: usize = 1 << 16;

/// `op(A) * op(B)`.
///
/// Every output column is computed by the same sequential kernel, so the
/// result is bit-identical whether columns are distributed over threads or
/// not. See [`matmul_serial`] for the single-threaded reference path.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix, ta: Trans, tb: Trans) -> Result<DenseMatrix> {
    matmul_impl(a, b, ta, tb, true)
}

pub fn matmul_serial(
    a: &DenseMatrix,
    b: &DenseMatrix,
    ta: Trans,
    tb: Trans,
) -> Result<DenseMatrix> {
    matmul_impl(a, b, ta, tb, false)
}

/// `A * B`
pub fn mul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    matmul(a, b, Trans::No, Trans::No)
}

/// `A' * B`
pub fn mul_tn(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    matmul(a, b, Trans::Yes, Trans::No)
}

/// `A * B'`
pub fn mul_nt(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    matmul(a, b, Trans::No, Trans::Yes)
}

fn op_shape(x: &DenseMatrix, t: Trans) -> (usize, usize) {
    match t {
        Trans::No => x.shape(),
        Trans::Yes => (x.cols(), x.rows()),
    }
}

fn matmul_impl(
    a: &DenseMatrix,
    b: &DenseMatrix,
    ta: Trans,
    tb: Trans,
    parallel: bool,
) -> Result<DenseMatrix> {
    let (m, ka) = op_shape(a, ta);
    let (kb, n) = op_shape(b, tb);
    if ka != kb {
        return Err(Error::DimensionMismatch {
            op: "matmul",
            left: (m, ka),
            right: (kb, n),
        });
    }
    let inner = ka;
    // Both kernels read B column-wise, so a transposed B is materialized once.
    let b_owned;
    let b_cols: &DenseMatrix = match tb {
        Trans::No => b,
        Trans::Yes => {
            b_owned = b.transpose();
            &b_owned
        }
    };

    let mut out = DenseMatrix::zeros(m, n);
    if m == 0 || n == 0 {
        return Ok(out);
    }
    let kernel = |j: usize, c: &mut [f64]| {
        let bj = b_cols.col(j);
        match ta {
            Trans::No => {
                for (p, &bpj) in bj.iter().enumerate() {
                    if bpj == 0.0 {
                        continue;
                    }
                    for (ci, &ai) in c.iter_mut().zip(a.col(p)) {
                        *ci += ai * bpj;
                    }
                }
            }
            Trans::Yes => {
                for (i, ci) in c.iter_mut().enumerate() {
                    *ci = dot(a.col(i), bj);
                }
            }
        }
    };

    let data = out.as_mut_slice();
    if parallel && m * n * inner >= PAR_THRESHOLD && rayon::current_num_threads() > 1 {
        data.par_chunks_mut(m)
            .enumerate()
            .for_each(|(j, c)| kernel(j, c));
    } else {
        for (j, c) in data.chunks_mut(m).enumerate() {
            kernel(j, c);
        }
    }
    Ok(out)
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Neumaier-compensated sum of squares.
fn compensated_sum_sq(xs: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for &x in xs {
        let v = x * x;
        let t = sum + v;
        if sum.abs() >= v {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    compensated_sum_sq(a.as_slice()).sqrt()
}

pub fn vector_norm(x: &[f64]) -> f64 {
    compensated_sum_sq(x).sqrt()
}

/// Power-iteration estimate of the largest singular value.
///
/// Reporting aid only: the estimate never exceeds the true norm and is
/// within 1% of it at 100 iterations when `sigma_1 / sigma_2 >= 1.1`.
/// Fewer than 20 iterations are rounded up to 20.
pub fn spectral_norm_est(a: &DenseMatrix, iters: usize, rng: &mut RngState) -> f64 {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return 0.0;
    }
    let mut x = gaussian_matrix(n, 1, rng);
    let mut est = 0.0;
    for _ in 0..iters.max(20) {
        let nx = vector_norm(x.as_slice());
        if nx == 0.0 {
            return 0.0;
        }
        x = x.scale(1.0 / nx);
        let y = mul(a, &x).expect("shapes agree");
        est = vector_norm(y.as_slice());
        x = mul_tn(a, &y).expect("shapes agree");
    }
    est
}
