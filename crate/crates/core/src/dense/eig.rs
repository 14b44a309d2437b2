use super::DenseMatrix;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 30;
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigendecomposition `T = U diag(d) U'` with `d` in descending order.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub vectors: DenseMatrix,
    pub values: Vec<f64>,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn sym_eig(t: &DenseMatrix) -> Result<SymEig> {
    let n = t.rows();
    if t.cols() != n {
        return Err(Error::invalid(format!(
            "sym_eig needs a square matrix, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    let scale = t.frobenius_norm();
    let asym = t.sub(&t.transpose())?.frobenius_norm();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric {
            asymmetry: asym / scale,
        });
    }
    let mut a = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (t[(i, j)] + t[(j, i)]));
    let mut v = DenseMatrix::identity(n);

    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                op: "sym_eig",
                sweeps,
                off: off_norm(&a),
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if apq.abs() <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let tan = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (tan * tan + 1.0).sqrt();
                let s = tan * c;
                a[(p, p)] = app - tan * apq;
                a[(q, q)] = aqq + tan * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let np = c * arp - s * arq;
                        let nq = s * arp + c * arq;
                        a[(r, p)] = np;
                        a[(p, r)] = np;
                        a[(r, q)] = nq;
                        a[(q, r)] = nq;
                    }
                }
                let (vp, vq) = two_columns(&mut v, p, q);
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let xp = *x;
                    let xq = *y;
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
        converged = !rotated;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    Ok(SymEig {
        values: order.iter().map(|&i| a[(i, i)]).collect(),
        vectors: v.select_columns(&order),
    })
}

fn off_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Mutable views of two distinct columns.
pub(crate) fn two_columns(m: &mut DenseMatrix, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let rows = m.rows();
    let (left, right) = m.as_mut_slice().split_at_mut(q * rows);
    (&mut left[p * rows..(p + 1) * rows], &mut right[..rows])
}
