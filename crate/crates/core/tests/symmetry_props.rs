mod common;

use ptbreak::matrix::eigenvalues;
use ptbreak::symmetry::{h_to_a, is_pt_symmetric, is_pt_symmetric_generator, ParityOperator};
use ptbreak::Tolerances;
use rand::Rng;

#[test]
fn both_pt_tests_agree() {
    let tol = Tolerances::default();
    let mut rng = common::rng(21);
    for trial in 0..500 {
        let n = rng.random_range(1..=8);
        let p = common::random_real_involution(&mut rng, n);
        let parity = ParityOperator::new(p.clone(), &tol).unwrap();
        let h = if trial % 2 == 0 {
            common::pt_project(&common::random_complex(&mut rng, n), &p)
        } else {
            common::random_complex(&mut rng, n)
        };
        let by_h = is_pt_symmetric(&h, &parity, &tol).unwrap();
        let by_a = is_pt_symmetric_generator(&h_to_a(&h), &parity, &tol).unwrap();
        assert_eq!(by_h, by_a, "trial {trial}");
        if trial % 2 == 0 {
            assert!(by_h);
        }
    }
}

#[test]
fn pt_symmetric_spectra_are_closed_under_conjugation() {
    let tol = Tolerances::default();
    let mut rng = common::rng(22);
    for trial in 0..500 {
        let n = rng.random_range(1..=8);
        let (h, _) = common::random_pt_hamiltonian(&mut rng, n);
        let values = eigenvalues(&h).unwrap();
        let scale = h.frobenius_norm();
        // Conjugation pairing via greedy matching; spectra here are simple.
        let mut unused = values.clone();
        for l in &values {
            let (k, d) = unused
                .iter()
                .enumerate()
                .map(|(k, m)| (k, (m - l.conj()).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(
                d <= 1e-6 * scale.max(1.0),
                "trial {trial}: {l} has no conjugate ({d:e})"
            );
            unused.remove(k);
        }
        let _ = tol;
    }
}
