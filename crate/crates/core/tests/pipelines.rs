//! Cross-module flows: a shared QB feeding each finishing method.

use rlra::dense::{mul_tn, pivoted_qr_partial};
use rlra::interp::{cur_blockrand, id_blockrand, id_from_qb, id_rand};
use rlra::io::{gen_test_matrix, load_binary, save_binary, SpectrumSpec};
use rlra::qb::{qb_blocked, qb_hierarchical, qb_parallel};
use rlra::rsvd::{svd_from_qb, svd_truncated};
use rlra::sketch::{SketchParams, SvdMethod};
use rlra::{DenseMatrix, RngState, Truncation};

fn err(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm()
}

#[test]
fn every_qb_variant_feeds_svd() {
    let (a, sigma) = gen_test_matrix(96, 64, &SpectrumSpec::TypeIII, &mut RngState::new(1)).unwrap();
    let k = 12;
    let tail: f64 = sigma[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
    let qbs = [
        qb_blocked(&a, 4, 5, 0.0, 1, 1, &mut RngState::new(2)).unwrap(),
        qb_parallel(&a, 4, 5, 1, &mut RngState::new(2)).unwrap(),
        qb_hierarchical(&a, 4, 4, 5, 1, &mut RngState::new(2)).unwrap(),
    ];
    for qb in &qbs {
        let ortho = mul_tn(&qb.q, &qb.q).unwrap().sub(&DenseMatrix::identity(qb.rank)).unwrap();
        assert!(ortho.frobenius_norm() < 1e-12, "{}", ortho.frobenius_norm());
        for m in [SvdMethod::Qr, SvdMethod::Bbt] {
            let f = svd_from_qb(qb, Some(k), m).unwrap();
            let e = err(&a, &f.reconstruct().unwrap());
            assert!(e >= tail * (1.0 - 1e-9) && e < 1.5 * tail, "{m:?}: {e} vs {tail}");
        }
    }
}

#[test]
fn id_from_exact_qb_matches_deterministic_id() {
    // Exact-rank input: B has the same column dependencies as A.
    let mut rng = RngState::new(3);
    let a = rlra::dense::mul(
        &rlra::dense::gaussian_matrix(50, 8, &mut rng),
        &rlra::dense::gaussian_matrix(8, 40, &mut rng),
    )
    .unwrap();
    let qb = qb_blocked(&a, 4, 3, 0.0, 0, 1, &mut RngState::new(4)).unwrap();
    let id = id_from_qb(&qb, Truncation::Rank(8)).unwrap();
    assert!(err(&a, &id.reconstruct(&a).unwrap()) < 1e-9 * a.frobenius_norm());
    let r = id_rand(&a, 8, 2, 1, 1, &mut RngState::new(5)).unwrap();
    assert!(err(&a, &r.reconstruct(&a).unwrap()) < 1e-9 * a.frobenius_norm());
}

#[test]
fn blockrand_tolerance_paths_track_deterministic_floors() {
    let (a, _) = gen_test_matrix(80, 70, &SpectrumSpec::TypeII, &mut RngState::new(6)).unwrap();
    let tol = 0.05 * a.frobenius_norm();
    let params = SketchParams { k: 0, tol, block: 5, max_blocks: 14, ..SketchParams::default() };
    let id = id_blockrand(&a, &params, &mut RngState::new(7)).unwrap();
    let det = pivoted_qr_partial(&a, Truncation::Rank(id.rank)).unwrap();
    let e = err(&a, &id.reconstruct(&a).unwrap());
    assert!(e >= det.residual * 0.5 && e < 4.0 * det.residual.max(tol), "{e} {}", det.residual);

    let c = cur_blockrand(&a, &params, &mut RngState::new(7)).unwrap();
    let svd = svd_truncated(&a, Truncation::Rank(c.rank)).unwrap();
    let floor = err(&a, &svd.reconstruct().unwrap());
    let ec = err(&a, &c.reconstruct().unwrap());
    assert!(ec >= floor * (1.0 - 1e-9), "{ec} < {floor}");
}

#[test]
fn factors_survive_the_file_format() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = gen_test_matrix(30, 20, &SpectrumSpec::TypeI, &mut RngState::new(8)).unwrap();
    let f = svd_truncated(&a, Truncation::Rank(5)).unwrap();
    let path = dir.path().join("u.bin");
    save_binary(&path, &f.u).unwrap();
    assert_eq!(load_binary(&path).unwrap(), f.u);
}
