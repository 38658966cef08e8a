mod common;

use ptbreak::krein::{action, classify_mode, is_strongly_stable, mode_records, signature, Kind};
use ptbreak::matrix::{eigenvalues, CVector};
use ptbreak::{ComplexMatrix, Tolerances, C64};
use rand::Rng;

/// `A = Q⁻¹ diag(iy) Q` with `G = Q* D Q`. Equal `y` share the sign of `D`,
/// so every eigenvalue is definite and its kind is the sign of `D`.
fn definite_construction(
    rng: &mut rand_chacha::ChaCha8Rng,
) -> (ComplexMatrix, ComplexMatrix, usize, usize) {
    let n = rng.random_range(1..=8);
    let mut ys: Vec<(f64, f64)> = Vec::new();
    for _ in 0..n {
        let y = rng.random_range(-4..=4) as f64;
        let sign = match ys.iter().find(|(v, _)| *v == y) {
            Some(&(_, s)) => s,
            None => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        ys.push((y, sign));
    }
    let q = common::well_conditioned(rng, n, 3.0);
    let diag_a: Vec<C64> = ys.iter().map(|&(y, _)| C64::new(0.0, y)).collect();
    let diag_g: Vec<C64> = ys.iter().map(|&(_, s)| C64::new(s, 0.0)).collect();
    let a = &(&q.inverse().unwrap() * &ComplexMatrix::from_diagonal(&diag_a)) * &q;
    let g = (&(&q.adjoint() * &ComplexMatrix::from_diagonal(&diag_g)) * &q).hermitian_part();
    let p = ys.iter().filter(|y| y.1 > 0.0).count();
    (a, g, p, n - p)
}

#[test]
fn kind_counts_match_signature() {
    let tol = Tolerances::default();
    let mut rng = common::rng(31);
    for trial in 0..500 {
        let (a, g, p, q) = definite_construction(&mut rng);
        assert_eq!(signature(&g, &tol).unwrap(), (p, q), "trial {trial}");
        let (mut first, mut second) = (0, 0);
        for (rec, mult) in mode_records(&a, &g, &tol).unwrap() {
            assert_eq!(rec.dim(), mult, "trial {trial}: semisimple");
            match rec.kind {
                Kind::First => first += mult,
                Kind::Second => second += mult,
                k => panic!("trial {trial}: kind {k:?} at {}", rec.lambda),
            }
        }
        assert_eq!((first, second), (p, q), "trial {trial}");
        assert!(is_strongly_stable(&a, &g, &tol).unwrap());
    }
}

#[test]
fn action_is_phase_invariant_and_quadratic() {
    let tol = Tolerances::default();
    let mut rng = common::rng(32);
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let g = common::random_hermitian(&mut rng, n);
        let psi = CVector::from_fn(n, |_, _| common::cgauss(&mut rng));
        let base = action(&g, &psi, &tol).unwrap();
        let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let c = common::cgauss(&mut rng);
        let rotated = action(&g, &(&psi * phase), &tol).unwrap();
        let scaled = action(&g, &(&psi * c), &tol).unwrap();
        let bound = 1e-12 * g.frobenius_norm() * psi.norm_squared() * (1.0 + c.norm_sqr());
        assert!((rotated - base).abs() <= bound);
        assert!((scaled - c.norm_sqr() * base).abs() <= bound);
    }
}

#[test]
fn kind_ignores_eigenvector_scaling() {
    // Kind is read from the eigen-subspace, so any representative gives the same answer.
    let tol = Tolerances::default();
    let mut rng = common::rng(33);
    for _ in 0..200 {
        let (a, g, _, _) = definite_construction(&mut rng);
        for l in eigenvalues(&a).unwrap() {
            let rec = classify_mode(&a, &g, l, &tol).unwrap();
            let v = &rec.subspace[0];
            let sign = action(&g, v, &tol).unwrap().signum();
            let c = common::cgauss(&mut rng);
            assert_eq!(action(&g, &(v * c), &tol).unwrap().signum(), sign);
            let expected = if sign > 0.0 {
                Kind::First
            } else {
                Kind::Second
            };
            assert_eq!(rec.kind, expected);
        }
    }
}

#[test]
fn positive_metric_makes_stability_an_axis_test() {
    let tol = Tolerances::default();
    let mut rng = common::rng(34);
    for trial in 0..300 {
        let n = rng.random_range(1..=8);
        let r = common::well_conditioned(&mut rng, n, 3.0);
        let g = (&r.adjoint() * &r).hermitian_part();
        // A = iG⁻¹S is a G-Hamiltonian for Hermitian S.
        let s = common::random_hermitian(&mut rng, n);
        let a = (&g.inverse().unwrap() * &s).scale(C64::new(0.0, 1.0));
        for (rec, _) in mode_records(&a, &g, &tol).unwrap() {
            assert_eq!(rec.kind, Kind::First, "trial {trial}");
        }
        let on_axis = eigenvalues(&a)
            .unwrap()
            .iter()
            .all(|l| l.re.abs() <= tol.axis * a.frobenius_norm());
        assert_eq!(is_strongly_stable(&a, &g, &tol).unwrap(), on_axis);
    }
}

#[test]
fn planted_g_hamiltonian_spectra_are_mirror_symmetric() {
    let tol = Tolerances::default();
    let mut rng = common::rng(35);
    for trial in 0..500 {
        let plant = common::planted_g_hamiltonian(&mut rng, 8, 2);
        let values = eigenvalues(&plant.a).unwrap();
        let scale = plant.a.frobenius_norm();
        for l in &values {
            let d = values
                .iter()
                .map(|m| (m + l.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            // Double blocks split by about sqrt(ε).
            assert!(d <= 1e-6 * scale, "trial {trial}: {l} unmirrored ({d:e})");
        }
        let _ = tol;
    }
}
