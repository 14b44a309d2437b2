use super::eig::two_columns;
use super::ops::{dot, vector_norm};
use super::DenseMatrix;
use crate::error::{Error, Result};

pub const MAX_SVD_SWEEPS: usize = 60;
const ROTATION_TOL: f64 = 1e-15;

/// Thin SVD `M = U diag(sigma) V'` with `r = min(m, n)` terms.
#[derive(Clone, Debug)]
pub struct SmallSvd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Wide inputs are handled through their transpose. Singular values come
/// back sorted descending; columns of `U` belonging to exactly zero singular
/// values are completed to an orthonormal set.
pub fn small_svd(m: &DenseMatrix) -> Result<SmallSvd> {
    if m.rows() < m.cols() {
        let t = small_svd(&m.transpose())?;
        return Ok(SmallSvd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let (rows, n) = m.shape();
    let mut w = m.clone();
    let mut v = DenseMatrix::identity(n);

    let mut sweeps = 0;
    loop {
        let mut off = 0.0_f64;
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (wp, wq) = two_columns(&mut w, p, q);
                let alpha = dot(wp, wp);
                let beta = dot(wq, wq);
                let gamma = dot(wp, wq);
                if gamma == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let ratio = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                off = off.max(ratio);
                if ratio <= ROTATION_TOL {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(wp, wq, c, s);
                let (vp, vq) = two_columns(&mut v, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SVD_SWEEPS {
            return Err(Error::NoConvergence {
                op: "small_svd",
                sweeps,
                off,
            });
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| vector_norm(w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = DenseMatrix::zeros(rows, n);
    let mut sigma = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > f64::MIN_POSITIVE {
            let inv = 1.0 / s;
            for (x, &y) in u.col_mut(dst).iter_mut().zip(w.col(src)) {
                *x = y * inv;
            }
        } else {
            missing.push(dst);
        }
    }
    complete_orthonormal(&mut u, &missing);
    Ok(SmallSvd {
        u,
        sigma,
        v: v.select_columns(&order),
    })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let xa = *a;
        let yb = *b;
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Fills the listed (zero) columns of `u` with unit vectors orthogonal to
/// every other column, drawn from the canonical basis.
fn complete_orthonormal(u: &mut DenseMatrix, missing: &[usize]) {
    let (m, n) = u.shape();
    let mut filled: Vec<usize> = (0..n).filter(|j| !missing.contains(j)).collect();
    let mut candidate = 0;
    for &j in missing {
        while candidate < m {
            let mut x = vec![0.0; m];
            x[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &c in &filled {
                    let proj = dot(u.col(c), &x);
                    for (xi, ui) in x.iter_mut().zip(u.col(c)) {
                        *xi -= proj * ui;
                    }
                }
            }
            let nx = vector_norm(&x);
            if nx > 0.5 {
                for (dst, xi) in u.col_mut(j).iter_mut().zip(&x) {
                    *dst = xi / nx;
                }
                filled.push(j);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::eig::sym_eig;
    use crate::dense::ops::{mul, mul_nt, mul_tn};
    use crate::dense::{gaussian_matrix, orth, RngState};

    fn check_factors(m: &DenseMatrix, f: &SmallSvd) {
        let r = m.min_dim();
        assert_eq!(f.sigma.len(), r);
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(f.sigma.iter().all(|&s| s >= 0.0));
        for q in [&f.u, &f.v] {
            let e = mul_tn(q, q).unwrap().sub(&DenseMatrix::identity(r)).unwrap();
            assert!(e.frobenius_norm() <= 1e-12 * (r as f64).sqrt(), "{}", e.frobenius_norm());
        }
        let rec = mul_nt(&f.u.scale_columns(&f.sigma), &f.v).unwrap();
        let err = rec.sub(m).unwrap().frobenius_norm();
        assert!(err <= 1e-11 * m.frobenius_norm().max(f64::MIN_POSITIVE), "{err}");
        let ss: f64 = f.sigma.iter().map(|s| s * s).sum();
        let ff = m.frobenius_norm().powi(2);
        assert!((ss - ff).abs() <= 1e-11 * ff);
    }

    #[test]
    fn diagonal_with_negative_entry() {
        let m = DenseMatrix::from_diag(&[2.0, -3.0]);
        let f = small_svd(&m).unwrap();
        assert_eq!(f.sigma, vec![3.0, 2.0]);
        check_factors(&m, &f);
    }

    #[test]
    fn orthonormal_input_has_unit_values() {
        let q = orth(&gaussian_matrix(20, 6, &mut RngState::new(4))).unwrap();
        let f = small_svd(&q).unwrap();
        for s in &f.sigma {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tall_and_wide_random() {
        let mut rng = RngState::new(10);
        for (m, n) in [(30, 20), (20, 30), (1, 5), (7, 1), (40, 40)] {
            let a = gaussian_matrix(m, n, &mut rng);
            check_factors(&a, &small_svd(&a).unwrap());
        }
    }

    #[test]
    fn gram_matrix_oracle() {
        let a = gaussian_matrix(30, 20, &mut RngState::new(6));
        let f = small_svd(&a).unwrap();
        let e = sym_eig(&mul_tn(&a, &a).unwrap()).unwrap();
        for (s, d) in f.sigma.iter().zip(&e.values) {
            assert!((s * s - d).abs() <= 1e-10 * d, "{} vs {d}", s * s);
        }
    }

    #[test]
    fn rank_deficient_completes_u() {
        let mut rng = RngState::new(1);
        let a = mul(&gaussian_matrix(12, 3, &mut rng), &gaussian_matrix(3, 8, &mut rng)).unwrap();
        let f = small_svd(&a).unwrap();
        check_factors(&a, &f);
        assert!(f.sigma[3] <= 1e-14 * f.sigma[0]);

        let z = DenseMatrix::zeros(5, 3);
        let f = small_svd(&z).unwrap();
        assert_eq!(f.sigma, vec![0.0; 3]);
        let e = mul_tn(&f.u, &f.u).unwrap().sub(&DenseMatrix::identity(3)).unwrap();
        assert!(e.frobenius_norm() < 1e-15);
    }
}
