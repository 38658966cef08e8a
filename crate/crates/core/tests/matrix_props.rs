mod common;

use ptbreak::matrix::{eig, eigenvalues, nullspace};
use ptbreak::{ComplexMatrix, Tolerances, C64};
use rand::Rng;

#[test]
fn eig_residuals_hold_on_random_matrices() {
    let tol = Tolerances::default();
    let mut rng = common::rng(11);
    for trial in 0..500 {
        let n = rng.random_range(1..=12);
        let m = common::random_complex(&mut rng, n);
        let e = eig(&m).unwrap();
        assert_eq!(e.values.len(), n);
        let norm = m.frobenius_norm();
        for (l, v) in e.values.iter().zip(&e.vectors) {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            let r = (m.mul_vec(v) - v * *l).norm();
            assert!(r <= tol.residual * norm, "trial {trial}: residual {r:e}");
        }
        // Trace oracle.
        let trace: C64 = (0..n).map(|k| m.get(k, k)).sum();
        let sum: C64 = e.values.iter().sum();
        assert!(
            (trace - sum).norm() <= 1e-10 * (1.0 + norm),
            "trial {trial}"
        );
    }
}

#[test]
fn hermitian_spectra_are_real() {
    let tol = Tolerances::default();
    let mut rng = common::rng(12);
    for _ in 0..500 {
        let n = rng.random_range(1..=12);
        let m = common::random_hermitian(&mut rng, n);
        for l in eigenvalues(&m).unwrap() {
            assert!(l.im.abs() <= tol.residual * m.frobenius_norm());
        }
    }
}

#[test]
fn nullspace_of_planted_rank_deficiency() {
    let tol = Tolerances::default();
    let mut rng = common::rng(13);
    for trial in 0..500 {
        let n = rng.random_range(1..=12);
        let rank = rng.random_range(0..=n);
        let left = common::random_complex(&mut rng, n);
        let right = common::random_complex(&mut rng, n);
        let d: Vec<C64> = (0..n)
            .map(|k| C64::new(if k < rank { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let m = &(&left * &ComplexMatrix::from_diagonal(&d)) * &right;
        let basis = nullspace(&m, &tol).unwrap();
        let s_max = m.singular_values()[0];
        if rank > 0 && left.condition_number() < 1e4 && right.condition_number() < 1e4 {
            assert_eq!(basis.len(), n - rank, "trial {trial}");
        }
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((u.dotc(v) - C64::new(expect, 0.0)).norm() <= tol.residual);
            }
            assert!(m.mul_vec(u).norm() <= 10.0 * tol.rank_cut * s_max * u.norm());
        }
    }
}
