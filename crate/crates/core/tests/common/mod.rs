#![allow(dead_code)]

use nalgebra::DMatrix;
use ptbreak::family::{Convention, FamilySpec, PathSpec};
use ptbreak::matrix::{ComplexMatrix, Tolerances, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn cgauss(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(gauss(rng), gauss(rng))
}

pub fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| cgauss(rng))
}

pub fn random_real(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| C64::new(gauss(rng), 0.0))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    random_complex(rng, n).hermitian_part()
}

pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let m = random_complex(rng, n).into_dmatrix();
    ComplexMatrix::from_dmatrix(m.qr().q()).unwrap()
}

/// `U·diag(s)·V` with singular values in `[1, cond]`.
pub fn well_conditioned(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let s: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.random_range(1.0..cond), 0.0))
        .collect();
    &(&u * &ComplexMatrix::from_diagonal(&s)) * &v
}

pub fn jordan_block(lambda: C64, size: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(size, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[derive(Clone, Debug)]
pub struct Plant {
    pub a: ComplexMatrix,
    /// Planted `(λ, block size)` list.
    pub blocks: Vec<(C64, usize)>,
}

impl Plant {
    /// Planted partition of each distinct eigenvalue, sizes descending.
    pub fn partitions(&self) -> Vec<(C64, Vec<usize>)> {
        let mut out: Vec<(C64, Vec<usize>)> = Vec::new();
        for &(l, s) in &self.blocks {
            match out.iter_mut().find(|(m, _)| (*m - l).norm() < 1e-12) {
                Some((_, p)) => p.push(s),
                None => out.push((l, vec![s])),
            }
        }
        for (_, p) in &mut out {
            p.sort_unstable_by(|a, b| b.cmp(a));
        }
        out
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.blocks.iter().all(|b| b.1 == 1)
    }
}

/// A random G-Hamiltonian with planted Jordan structure: on-axis blocks
/// `J(iy)` and mirrored pairs `J(λ) ⊕ J(−λ̄)`, eigenvalues on a unit grid.
pub fn planted_g_hamiltonian(rng: &mut ChaCha8Rng, n_max: usize, max_block: usize) -> Plant {
    let n = rng.random_range(1..=n_max);
    let mut blocks: Vec<(C64, usize)> = Vec::new();
    let mut used: Vec<C64> = Vec::new();
    let mut filled = 0;
    let pick_free = |rng: &mut ChaCha8Rng, used: &[C64], on_axis: bool| -> Option<C64> {
        for _ in 0..50 {
            let y = rng.random_range(-3..=3) as f64;
            let l = if on_axis {
                C64::new(0.0, y)
            } else {
                C64::new(rng.random_range(1..=2) as f64, y)
            };
            let mirror = -l.conj();
            if !used
                .iter()
                .any(|u| (*u - l).norm() < 0.5 || (*u - mirror).norm() < 0.5)
            {
                return Some(l);
            }
        }
        None
    };
    while filled < n {
        let room = n - filled;
        let pair = room >= 2 && rng.random_bool(0.5);
        if pair {
            let s = rng.random_range(1..=max_block.min(room / 2));
            if let Some(l) = pick_free(rng, &used, false) {
                used.push(l);
                used.push(-l.conj());
                blocks.push((l, s));
                blocks.push((-l.conj(), s));
                filled += 2 * s;
                continue;
            }
        }
        let s = rng.random_range(1..=max_block.min(room));
        let reuse = blocks.iter().find(|(l, _)| l.re == 0.0).map(|b| b.0);
        let l = match reuse {
            Some(l) if rng.random_bool(0.2) => Some(l),
            _ => pick_free(rng, &used, true),
        };
        let l = l.unwrap_or(C64::new(0.0, 10.0 + filled as f64));
        used.push(l);
        blocks.push((l, s));
        filled += s;
    }
    let parts: Vec<ComplexMatrix> = blocks.iter().map(|&(l, s)| jordan_block(l, s)).collect();
    let j = ComplexMatrix::block_diagonal(&parts);
    let q = well_conditioned(rng, n, 3.0);
    let a = &(&q.inverse().unwrap() * &j) * &q;
    Plant { a, blocks }
}

/// Real involution `S·diag(±1)·S⁻¹`.
pub fn random_real_involution(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    loop {
        let s = random_real(rng, n);
        if s.condition_number() > 50.0 {
            continue;
        }
        let d: Vec<C64> = (0..n)
            .map(|_| C64::new(if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0))
            .collect();
        return &(&s * &ComplexMatrix::from_diagonal(&d)) * &s.inverse().unwrap();
    }
}

/// Real symmetric involution `I − 2UUᵀ` with `U` having orthonormal columns.
pub fn random_symmetric_involution(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let k = rng.random_range(0..=n);
    let m = DMatrix::<f64>::from_fn(n, n, |_, _| gauss(rng));
    let q = m.qr().q();
    let u = q.columns(0, k);
    let p = DMatrix::<f64>::identity(n, n) - (u * u.transpose()) * 2.0;
    ComplexMatrix::from_fn(n, |i, j| C64::new(p[(i, j)], 0.0))
}

/// `(H + P H̄ P) / 2`, PT-symmetric for real involutive `P`.
pub fn pt_project(h: &ComplexMatrix, p: &ComplexMatrix) -> ComplexMatrix {
    (h + &(&(p * &h.conj()) * p)).scale(C64::new(0.5, 0.0))
}

pub fn random_pt_hamiltonian(rng: &mut ChaCha8Rng, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    let p = random_real_involution(rng, n);
    let h = pt_project(&random_complex(rng, n), &p);
    (h, p)
}

/// A real `H` commuting with a real involution `P`, carrying a planted real
/// Jordan block of size 2 on one eigenspace of `P`.
pub fn defective_pt_hamiltonian(rng: &mut ChaCha8Rng, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    assert!(n >= 2);
    let plus = rng.random_range(2..=n);
    let lambda = rng.random_range(-3..=3) as f64;
    let mut core = ComplexMatrix::zeros(n);
    core.set_block(0, 0, &jordan_block(C64::new(lambda, 0.0), 2));
    for k in 2..n {
        let v = lambda + if k % 2 == 0 { 1.0 } else { -1.0 } * (1 + k / 2) as f64;
        core.set(k, k, C64::new(v, 0.0));
    }
    // Mix within each eigenspace of diag(1,…,1,−1,…,−1).
    let mix = |rng: &mut ChaCha8Rng, size: usize| loop {
        let m = random_real(rng, size);
        if m.condition_number() < 20.0 {
            return m;
        }
    };
    let plus_mix = mix(rng, plus);
    let mut r = ComplexMatrix::zeros(n);
    r.set_block(0, 0, &plus_mix);
    if plus < n {
        r.set_block(plus, plus, &mix(rng, n - plus));
    }
    let d: Vec<C64> = (0..n)
        .map(|k| C64::new(if k < plus { 1.0 } else { -1.0 }, 0.0))
        .collect();
    let d = ComplexMatrix::from_diagonal(&d);
    let core = &(&r * &core) * &r.inverse().unwrap();
    let s = loop {
        let s = random_real(rng, n);
        if s.condition_number() < 20.0 {
            break s;
        }
    };
    let s_inv = s.inverse().unwrap();
    let h = &(&s * &core) * &s_inv;
    let p = &(&s * &d) * &s_inv;
    (h, p)
}

fn number(x: f64) -> String {
    format!("({x:e})")
}

/// `H(t) = −G⁻¹(S₀ + t S₁)` with `G`, `S₀`, `S₁` projected onto the
/// PT-compatible Hermitian matrices of a real symmetric involution `P`.
pub fn random_pt_family(
    rng: &mut ChaCha8Rng,
    n: usize,
    steps: usize,
) -> (FamilySpec, PathSpec, ComplexMatrix) {
    let p = random_symmetric_involution(rng, n);
    let g = loop {
        let g = pt_project(&random_hermitian(rng, n), &p).hermitian_part();
        if g.condition_number() < 30.0 {
            break g;
        }
    };
    let s0 = pt_project(&random_hermitian(rng, n), &p).hermitian_part();
    let s1 = pt_project(&random_hermitian(rng, n), &p).hermitian_part();
    let g_inv = g.inverse().unwrap();
    let m0 = (&g_inv * &s0).scale(C64::new(-1.0, 0.0));
    let m1 = (&g_inv * &s1).scale(C64::new(-1.0, 0.0));
    let entries: Vec<Vec<String>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (a, b) = (m0.get(i, j), m1.get(i, j));
                    format!(
                        "{}+{}*i+t*({}+{}*i)",
                        number(a.re),
                        number(a.im),
                        number(b.re),
                        number(b.im)
                    )
                })
                .collect()
        })
        .collect();
    let spec = FamilySpec::new(
        "random",
        entries,
        [("t".to_string(), 0.0)].into_iter().collect(),
        Some(p),
        Convention::H,
        &Tolerances::default(),
    )
    .unwrap();
    let path = PathSpec::linear("t", -2.0, 2.0, steps).unwrap();
    (spec, path, g)
}
