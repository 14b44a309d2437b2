//! Truncated SVD: the dense oracle and the randomized variants.

use crate::dense::{
    compact_qr, mul, mul_nt, mul_tn, orth, small_svd, sym_eig, DenseMatrix, RngState,
};
use crate::error::{Error, Result};
use crate::qb::QbFactors;
use crate::sketch::{sample_right, SvdMethod};
use crate::truncation::Truncation;

/// Largest `min(m, n)` accepted by [`svd_truncated`].
pub const DENSE_ORACLE_LIMIT: usize = 2000;

/// Eigenvalues of `B B'` below this multiple of the largest are treated as
/// numerically zero by the BB' finishing method.
pub const BBT_RELATIVE_FLOOR: f64 = 1e-28;

/// `A ~ U diag(sigma) V'` with `rank` terms.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
    pub rank: usize,
}

impl SvdFactors {
    fn from_parts(u: DenseMatrix, sigma: Vec<f64>, v: DenseMatrix) -> Self {
        let rank = sigma.len();
        SvdFactors { u, sigma, v, rank }
    }

    fn truncate(self, k: usize) -> Self {
        SvdFactors::from_parts(
            self.u.column_range(0, k),
            self.sigma[..k].to_vec(),
            self.v.column_range(0, k),
        )
    }

    pub fn reconstruct(&self) -> Result<DenseMatrix> {
        mul_nt(&self.u.scale_columns(&self.sigma), &self.v)
    }
}

/// Full one-sided Jacobi SVD truncated by rank or by `sigma_{k+1} < tol`.
pub fn svd_truncated(a: &DenseMatrix, mode: Truncation) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    if a.min_dim() > DENSE_ORACLE_LIMIT {
        return Err(Error::TooLarge {
            m,
            n,
            limit: DENSE_ORACLE_LIMIT,
        });
    }
    let mode = mode.check_rank(a.min_dim())?;
    let f = small_svd(a)?;
    let k = match mode {
        Truncation::Rank(k) => k,
        Truncation::Tolerance(tol) => f.sigma.iter().take_while(|&&s| s >= tol).count(),
    };
    Ok(SvdFactors::from_parts(f.u, f.sigma, f.v).truncate(k))
}

fn check_sizes(a: &DenseMatrix, k: usize, p: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("rank k must be at least 1"));
    }
    if k + p > a.min_dim() {
        return Err(Error::invalid(format!(
            "k + p = {} exceeds min(m, n) = {} for a {}x{} matrix",
            k + p,
            a.min_dim(),
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// The basic scheme: `Y = AG`, `Q = orth(Y)`, `B = Q'A`, SVD of `B`, lift.
pub fn rsvd_basic(a: &DenseMatrix, k: usize, p: usize, rng: &mut RngState) -> Result<SvdFactors> {
    check_sizes(a, k, p)?;
    let y = sample_right(a, k + p, 0, 1, rng)?;
    let q = orth(&y)?;
    let b = mul_tn(&q, a)?;
    let f = small_svd(&b)?;
    Ok(SvdFactors::from_parts(mul(&q, &f.u)?, f.sigma, f.v).truncate(k))
}

/// Power-scheme sample, then the eigendecomposition of `B B'`.
pub fn rsvd_v1(
    a: &DenseMatrix,
    k: usize,
    p: usize,
    q: usize,
    s: usize,
    rng: &mut RngState,
) -> Result<SvdFactors> {
    check_sizes(a, k, p)?;
    let basis = orth(&sample_right(a, k + p, q, s, rng)?)?;
    let b = mul_tn(&basis, a)?;
    finish_bbt(&basis, &b, k)
}

/// Power-scheme sample, then a compact QR of `B'` and an SVD of `R`.
pub fn rsvd_v2(
    a: &DenseMatrix,
    k: usize,
    p: usize,
    q: usize,
    s: usize,
    rng: &mut RngState,
) -> Result<SvdFactors> {
    check_sizes(a, k, p)?;
    let basis = orth(&sample_right(a, k + p, q, s, rng)?)?;
    let bt = mul_tn(a, &basis)?;
    finish_qr(&basis, &bt, k)
}

/// SVD of `QB`, keeping `k` terms (all of `B`'s rows when `None`).
pub fn svd_from_qb(qb: &QbFactors, k: Option<usize>, method: SvdMethod) -> Result<SvdFactors> {
    let l = qb.b.rows();
    let k = k.unwrap_or(l);
    if k > l {
        return Err(Error::invalid(format!(
            "rank {k} exceeds the {l} rows of B"
        )));
    }
    if k == 0 {
        return Ok(SvdFactors::from_parts(
            DenseMatrix::zeros(qb.q.rows(), 0),
            Vec::new(),
            DenseMatrix::zeros(qb.b.cols(), 0),
        ));
    }
    match method {
        SvdMethod::Bbt => finish_bbt(&qb.q, &qb.b, k),
        SvdMethod::Qr => finish_qr(&qb.q, &qb.b.transpose(), k),
    }
}

fn finish_bbt(q: &DenseMatrix, b: &DenseMatrix, k: usize) -> Result<SvdFactors> {
    let t = mul_nt(b, b)?;
    let e = sym_eig(&t)?;
    let d_max = e.values[0].max(0.0);
    for (i, &d) in e.values[..k].iter().enumerate() {
        if !(d > 0.0) || d < BBT_RELATIVE_FLOOR * d_max {
            return Err(Error::NumericalRank {
                rank: i + 1,
                eigenvalue: d,
            });
        }
    }
    let uhat = e.vectors.column_range(0, k);
    let sigma: Vec<f64> = e.values[..k].iter().map(|d| d.sqrt()).collect();
    let inv: Vec<f64> = sigma.iter().map(|s| 1.0 / s).collect();
    let u = mul(q, &uhat)?;
    let v = mul_tn(b, &uhat)?.scale_columns(&inv);
    Ok(SvdFactors::from_parts(u, sigma, v))
}

fn finish_qr(q: &DenseMatrix, bt: &DenseMatrix, k: usize) -> Result<SvdFactors> {
    let qr = compact_qr(bt)?;
    let f = small_svd(&qr.r)?;
    let u = mul(q, &f.v.column_range(0, k))?;
    let v = mul(&qr.q, &f.u.column_range(0, k))?;
    Ok(SvdFactors::from_parts(u, f.sigma[..k].to_vec(), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{gaussian_matrix, spectral_norm_est};
    use crate::io::testmat::{gen_test_matrix, SpectrumSpec};
    use crate::qb::qb_blocked;
    use proptest::prelude::*;

    fn orth_defect(q: &DenseMatrix) -> f64 {
        mul_tn(q, q)
            .unwrap()
            .sub(&DenseMatrix::identity(q.cols()))
            .unwrap()
            .frobenius_norm()
    }

    fn check_typed(f: &SvdFactors, tol: f64) {
        assert_eq!(f.rank, f.sigma.len());
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(f.sigma.iter().all(|&s| s >= 0.0));
        let bound = tol * (f.rank.max(1) as f64).sqrt();
        assert!(orth_defect(&f.u) <= bound, "U defect {}", orth_defect(&f.u));
        assert!(orth_defect(&f.v) <= bound, "V defect {}", orth_defect(&f.v));
    }

    fn err_fro(a: &DenseMatrix, f: &SvdFactors) -> f64 {
        a.sub(&f.reconstruct().unwrap()).unwrap().frobenius_norm()
    }

    fn exact_rank(m: usize, n: usize, k: usize, seed: u64) -> DenseMatrix {
        let mut rng = RngState::new(seed);
        mul(&gaussian_matrix(m, k, &mut rng), &gaussian_matrix(k, n, &mut rng)).unwrap()
    }

    fn tail(sigma: &[f64], k: usize) -> f64 {
        sigma[k..].iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    #[test]
    fn truncated_diag() {
        let a = DenseMatrix::from_diag(&[5.0, 3.0, 1.0]);
        let f = svd_truncated(&a, Truncation::Rank(2)).unwrap();
        assert_eq!(f.sigma, vec![5.0, 3.0]);
        let e = small_svd(&a.sub(&f.reconstruct().unwrap()).unwrap()).unwrap();
        assert!((e.sigma[0] - 1.0).abs() < 1e-15);

        let f = svd_truncated(&a, Truncation::Tolerance(2.0)).unwrap();
        assert_eq!(f.rank, 2);
        let f = svd_truncated(&a, Truncation::Tolerance(0.5)).unwrap();
        assert_eq!(f.rank, 3);
        assert!(svd_truncated(&a, Truncation::Rank(4)).is_err());
    }

    #[test]
    fn truncated_matches_logspace_tail() {
        let (a, _) = gen_test_matrix(100, 100, &SpectrumSpec::TypeII, &mut RngState::new(1)).unwrap();
        let f = svd_truncated(&a, Truncation::Rank(10)).unwrap();
        let oracle: f64 = (11..=100)
            .map(|j| 10f64.powf(-2.0 * (j - 1) as f64 / 99.0).powi(2))
            .sum::<f64>()
            .sqrt();
        let err = err_fro(&a, &f);
        assert!((err - oracle).abs() <= 1e-10 * oracle, "{err} vs {oracle}");
        check_typed(&f, 1e-11);
    }

    #[test]
    fn oracle_size_guard() {
        let a = DenseMatrix::zeros(2001, 2001);
        assert!(matches!(
            svd_truncated(&a, Truncation::Rank(1)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn basic_exact_rank() {
        let a = exact_rank(60, 40, 6, 2);
        let f = rsvd_basic(&a, 6, 4, &mut RngState::new(3)).unwrap();
        assert!(err_fro(&a, &f) <= 1e-10 * a.frobenius_norm());
        check_typed(&f, 1e-11);
    }

    #[test]
    fn basic_rank_one() {
        let mut rng = RngState::new(9);
        let u = orth(&gaussian_matrix(30, 1, &mut rng)).unwrap();
        let v = orth(&gaussian_matrix(20, 1, &mut rng)).unwrap();
        let a = mul_nt(&u.scale(7.5), &v).unwrap();
        let f = rsvd_basic(&a, 1, 2, &mut rng).unwrap();
        assert!((f.sigma[0] - 7.5).abs() <= 1e-10 * 7.5);
    }

    #[test]
    fn basic_hard_bound_type_iii() {
        let (a, sigma) = gen_test_matrix(300, 300, &SpectrumSpec::TypeIII, &mut RngState::new(5)).unwrap();
        let (k, n) = (20usize, 300usize);
        let bound = ((k * n) as f64).sqrt() * sigma[k];
        let mut worst_ratio = 0.0f64;
        for seed in 0..20 {
            let f = rsvd_basic(&a, k, 5, &mut RngState::new(100 + seed)).unwrap();
            let r = a.sub(&f.reconstruct().unwrap()).unwrap();
            let e2 = small_svd(&r).unwrap().sigma[0];
            assert!(e2 <= bound, "seed {seed}: {e2} > {bound}");
            worst_ratio = worst_ratio.max(e2 / sigma[k]);
        }
        assert!(worst_ratio <= 5.0, "worst error / sigma_(k+1) = {worst_ratio}");
    }

    #[test]
    fn v1_exact_rank_and_orthonormality() {
        let a = exact_rank(50, 40, 5, 4);
        let f = rsvd_v1(&a, 5, 5, 1, 1, &mut RngState::new(6)).unwrap();
        assert!(err_fro(&a, &f) <= 1e-9 * a.frobenius_norm());

        let (a, _) = gen_test_matrix(200, 150, &SpectrumSpec::TypeII, &mut RngState::new(7)).unwrap();
        let f = rsvd_v1(&a, 15, 5, 1, 1, &mut RngState::new(8)).unwrap();
        assert!(orth_defect(&f.v) <= 1e-8);
    }

    /// The sampled values can only undershoot (interlacing), and the BB'
    /// finish reproduces the exact SVD of `Q'A` on the same subspace.
    #[test]
    fn v1_sigma_against_oracles() {
        let (a, _) = gen_test_matrix(200, 150, &SpectrumSpec::TypeII, &mut RngState::new(11)).unwrap();
        let oracle = svd_truncated(&a, Truncation::Rank(10)).unwrap();
        for seed in 0..10 {
            let f = rsvd_v1(&a, 10, 5, 2, 1, &mut RngState::new(seed)).unwrap();
            let basis = orth(&sample_right(&a, 15, 2, 1, &mut RngState::new(seed)).unwrap()).unwrap();
            let exact = small_svd(&mul_tn(&basis, &a).unwrap()).unwrap();
            for i in 0..10 {
                assert!(f.sigma[i] <= oracle.sigma[i] * (1.0 + 1e-12));
                let d = (f.sigma[i] - exact.sigma[i]).abs();
                assert!(d <= 1e-10 * exact.sigma[i], "seed {seed} mode {i}: {d:e}");
            }
        }
    }

    #[test]
    fn v2_exact_rank() {
        let a = exact_rank(45, 70, 8, 12);
        let f = rsvd_v2(&a, 8, 3, 1, 1, &mut RngState::new(13)).unwrap();
        assert!(err_fro(&a, &f) <= 1e-11 * a.frobenius_norm());
        check_typed(&f, 1e-11);
    }

    #[test]
    fn v1_and_v2_agree_on_type_i() {
        let (a, _) = gen_test_matrix(120, 100, &SpectrumSpec::TypeI, &mut RngState::new(14)).unwrap();
        let f1 = rsvd_v1(&a, 10, 5, 1, 1, &mut RngState::new(15)).unwrap();
        let f2 = rsvd_v2(&a, 10, 5, 1, 1, &mut RngState::new(15)).unwrap();
        for (x, y) in f1.sigma.iter().zip(&f2.sigma) {
            assert!((x - y).abs() <= 1e-6 * y);
        }
    }

    /// `B = G diag(1, 1e-12) V'` with `G` a 45 degree rotation: forming
    /// `BB'` rounds the second eigenvalue (1e-24) away entirely, while the QR
    /// route keeps it to about four digits.
    #[test]
    fn tiny_trailing_value_separates_v1_and_v2() {
        let mut rng = RngState::new(16);
        let q = orth(&gaussian_matrix(30, 2, &mut rng)).unwrap();
        let v = orth(&gaussian_matrix(20, 2, &mut rng)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = DenseMatrix::from_rows(&[&[h, -h], &[h, h]]);
        let b = mul_nt(&g.scale_columns(&[1.0, 1e-12]), &v).unwrap();
        let qb = QbFactors {
            q,
            b,
            rank: 2,
            residual: 0.0,
            history: vec![],
            tolerance_reached: true,
        };

        let f2 = svd_from_qb(&qb, Some(2), SvdMethod::Qr).unwrap();
        assert!((f2.sigma[1] - 1e-12).abs() <= 1e-2 * 1e-12, "QR route {}", f2.sigma[1]);

        match svd_from_qb(&qb, Some(2), SvdMethod::Bbt) {
            Err(Error::NumericalRank { rank: 2, .. }) => {}
            Ok(f1) => assert!(
                (f1.sigma[1] - 1e-12).abs() > 1e-2 * 1e-12,
                "BB' route unexpectedly resolved {}",
                f1.sigma[1]
            ),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn from_qb_untruncated_and_truncated() {
        let a = exact_rank(50, 45, 7, 18);
        let qb = qb_blocked(&a, 4, 3, 1e-9, 0, 1, &mut RngState::new(19)).unwrap();
        for method in [SvdMethod::Qr, SvdMethod::Bbt] {
            let f = svd_from_qb(&qb, Some(7), method).unwrap();
            assert!(err_fro(&a, &f) <= 1e-10 * a.frobenius_norm(), "{method:?}");
        }

        let (a, _) = gen_test_matrix(80, 60, &SpectrumSpec::TypeI, &mut RngState::new(20)).unwrap();
        let qb = qb_blocked(&a, 10, 2, 0.0, 1, 1, &mut RngState::new(21)).unwrap();
        assert_eq!(qb.b.rows(), 20);
        let f = svd_from_qb(&qb, Some(5), SvdMethod::Qr).unwrap();
        let dense = svd_truncated(&qb.reconstruct().unwrap(), Truncation::Rank(5)).unwrap();
        let diff = f.reconstruct().unwrap().sub(&dense.reconstruct().unwrap()).unwrap();
        assert!(diff.frobenius_norm() <= 1e-9 * a.frobenius_norm());
        assert!(svd_from_qb(&qb, Some(21), SvdMethod::Qr).is_err());
        assert_eq!(svd_from_qb(&qb, None, SvdMethod::Qr).unwrap().rank, 20);
    }

    #[test]
    fn from_tolerance_qb_meets_tolerance() {
        let (a, _) = gen_test_matrix(200, 200, &SpectrumSpec::TypeII, &mut RngState::new(22)).unwrap();
        let qb = qb_blocked(&a, 10, 20, 1e-2, 1, 1, &mut RngState::new(23)).unwrap();
        assert!(qb.tolerance_reached);
        for method in [SvdMethod::Qr, SvdMethod::Bbt] {
            let f = svd_from_qb(&qb, None, method).unwrap();
            assert!(err_fro(&a, &f) < 1e-2, "{method:?}");
        }
    }

    #[test]
    fn power_scheme_helps_on_type_i() {
        let (a, _) = gen_test_matrix(200, 200, &SpectrumSpec::TypeI, &mut RngState::new(24)).unwrap();
        let mut by_q = [Vec::new(), Vec::new(), Vec::new()];
        let mut est = RngState::new(0);
        for seed in 0..20 {
            for (q, errs) in by_q.iter_mut().enumerate() {
                let f = rsvd_v2(&a, 10, 5, q, 1, &mut RngState::new(seed)).unwrap();
                let r = a.sub(&f.reconstruct().unwrap()).unwrap();
                errs.push(spectral_norm_est(&r, 50, &mut est));
            }
        }
        let wins = (0..20).filter(|&i| by_q[2][i] <= by_q[0][i]).count();
        assert!(wins >= 18, "q=2 beat q=0 in {wins}/20");
        let med = |v: &Vec<f64>| {
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            0.5 * (s[9] + s[10])
        };
        assert!(med(&by_q[1]) < med(&by_q[0]) && med(&by_q[2]) < med(&by_q[1]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn randomized_never_beats_eckart_young(seed in 0u64..1000, k in 1usize..8, q in 0usize..3) {
            let (a, sigma) = gen_test_matrix(40, 30, &SpectrumSpec::TypeI, &mut RngState::new(seed)).unwrap();
            let mut rng = RngState::new(seed + 1);
            for f in [
                rsvd_basic(&a, k, 3, &mut rng).unwrap(),
                rsvd_v2(&a, k, 3, q, 1, &mut rng).unwrap(),
                rsvd_v1(&a, k, 3, q, 1, &mut rng).unwrap(),
            ] {
                check_typed(&f, 1e-10);
                prop_assert!(err_fro(&a, &f) >= (1.0 - 1e-10) * tail(&sigma, k));
            }
        }
    }
}
