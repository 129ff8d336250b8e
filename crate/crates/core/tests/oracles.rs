//! Cross-checks of the in-house linear algebra against nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use psd_blocks::matrix::{HermitianMatrix, C64};

fn to_nalgebra(m: &HermitianMatrix) -> DMatrix<C64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m.get(i, j))
}

fn oracle_eigenvalues(m: &HermitianMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(to_nalgebra(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn hermitian(max_n: usize) -> impl Strategy<Value = HermitianMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |raw| {
            HermitianMatrix::from_upper(n, |i, j| {
                let (re, im) = raw[i * n + j];
                if i == j {
                    C64::new(re, 0.0)
                } else {
                    C64::new(re, im)
                }
            })
        })
    })
}

/// `B B*` with `B` of size `n x rank`.
fn psd(max_n: usize) -> impl Strategy<Value = HermitianMatrix> {
    (1..=max_n, 1..=max_n).prop_flat_map(|(n, rank)| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * rank).prop_map(move |raw| {
            HermitianMatrix::from_upper(n, |i, j| {
                (0..rank).map(|r| {
                    let (a, b) = raw[i * rank + r];
                    let (c, d) = raw[j * rank + r];
                    C64::new(a, b) * C64::new(c, -d)
                }).sum()
            })
        })
    })
}

proptest! {
    #[test]
    fn eigenvalues_match_nalgebra(m in hermitian(8)) {
        let ours = m.eigenvalues().unwrap();
        let theirs = oracle_eigenvalues(&m);
        let scale = m.max_abs_entry().max(1.0) * m.dim() as f64;
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() <= 1e-10 * scale, "{ours:?} vs {theirs:?}");
        }
    }

    #[test]
    fn determinant_matches_nalgebra(m in hermitian(6)) {
        let theirs = to_nalgebra(&m).determinant().re;
        let scale = m.max_abs_entry().max(1e-300).powi(m.dim() as i32) * 720.0;
        prop_assert!((m.determinant() - theirs).abs() <= 1e-10 * scale);
    }

    #[test]
    fn schur_complement_matches_explicit_inverse(m in psd(6), ridge in 0.1f64..1.0) {
        let n = m.dim();
        prop_assume!(n >= 2);
        let m = m.add(&HermitianMatrix::identity(n).scale(ridge)).unwrap();
        let block: Vec<usize> = (0..n / 2).collect();
        let rest: Vec<usize> = (n / 2..n).collect();
        let full = to_nalgebra(&m);
        let bb = full.select_rows(&block).select_columns(&block);
        let rb = full.select_rows(&rest).select_columns(&block);
        let br = full.select_rows(&block).select_columns(&rest);
        let rr = full.select_rows(&rest).select_columns(&rest);
        let expected = rr - rb * bb.try_inverse().unwrap() * br;
        let ours = m.schur_complement(&block).unwrap();
        for i in 0..rest.len() {
            for j in 0..rest.len() {
                prop_assert!((ours.get(i, j) - expected[(i, j)]).norm() <= 1e-10 * m.max_abs_entry().max(1.0) / ridge);
            }
        }
    }

    #[test]
    fn kron_matches_nalgebra(a in hermitian(3), b in hermitian(3)) {
        let ours = a.kron(&b);
        let theirs = to_nalgebra(&a).kronecker(&to_nalgebra(&b));
        for i in 0..ours.dim() {
            for j in 0..ours.dim() {
                prop_assert_eq!(ours.get(i, j), theirs[(i, j)]);
            }
        }
    }

    #[test]
    fn psd_report_agrees_with_oracle(m in psd(7), shift in -0.5f64..0.5) {
        let m = m.add(&HermitianMatrix::identity(m.dim()).scale(shift)).unwrap();
        let theirs = oracle_eigenvalues(&m);
        let (lo, hi) = (theirs[0], *theirs.last().unwrap());
        let tol = 1e-9;
        // Away from the threshold both must agree.
        let threshold = -tol * hi.abs().max(1.0);
        prop_assume!((lo - threshold).abs() > 1e-8);
        prop_assert_eq!(m.is_psd(tol).unwrap().is_psd, lo >= threshold);
    }
}

#[test]
fn extreme_examples() {
    let ones = HermitianMatrix::ones(4);
    let ev = ones.eigenvalues().unwrap();
    assert!(ev[..3].iter().all(|v| v.abs() < 1e-12));
    assert!((ev[3] - 4.0).abs() < 1e-12);
    // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
    let m = HermitianMatrix::symmetrize(&[
        vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
        vec![C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
    ])
    .unwrap();
    let ev = m.eigenvalues().unwrap();
    assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    assert_eq!(oracle_eigenvalues(&m).len(), 2);
}
