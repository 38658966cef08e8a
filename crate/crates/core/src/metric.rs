//! Hermitian metrics `G` with `A*G + GA = 0`.
//!
//! [`construct_metric`] follows the constructive proof that any `A` similar
//! to `−Ā` is G-Hamiltonian: each Jordan block on the imaginary axis (F₁) or
//! each pair `J(λ) ⊕ J(−λ̄)` off the axis (F₂) gets an anti-diagonal
//! metric, and the block-diagonal `G′` is carried back by congruence,
//! `G = Q*G′Q`, `S = Q*S′Q` with `S′ = −iG′J`.

use nalgebra::DMatrix;

use crate::dense;
use crate::error::{Error, Result};
use crate::jordan::{
    cluster_radius, jordan_decompose, mirror_matching, JordanBlockSpec, JordanStructure,
};
use crate::matrix::{eigenvalues, is_hermitian, ComplexMatrix, Tolerances, C64, I};

/// `G` Hermitian nonsingular, `S` Hermitian, `A = iG⁻¹S`.
#[derive(Clone, Debug)]
pub struct MetricPair {
    pub g: ComplexMatrix,
    pub s: ComplexMatrix,
}

/// Which block family a metric block is built for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BlockFamily {
    /// `J(ia)` of size `m`.
    F1(JordanBlockSpec),
    /// `J(λ) ⊕ J(−λ̄)`, both of size `l`, `Re λ ≠ 0`.
    F2(JordanBlockSpec, JordanBlockSpec),
}

const PAIRING_SLACK: f64 = 1e-8;

/// Anti-diagonal metric of one block family.
///
/// F₁ with odd `m`: anti-diagonal `K₁ = [[0,1],[−1,0]]` blocks ending in a
/// scalar 1, i.e. entries `(−1)^r` along the anti-diagonal. F₁ with even `m`
/// and F₂: anti-diagonal `K₂ = [[0,i],[−i,0]]` blocks, entries `i(−1)^r`.
pub fn block_metric(family: BlockFamily) -> Result<ComplexMatrix> {
    match family {
        BlockFamily::F1(b) => {
            if b.size == 0 {
                return Err(Error::InvalidPairing("block size must be positive".into()));
            }
            if b.lambda.re.abs() > PAIRING_SLACK * (1.0 + b.lambda.norm()) {
                return Err(Error::InvalidPairing(format!(
                    "F1 block needs a purely imaginary eigenvalue, got {}",
                    b.lambda
                )));
            }
            Ok(anti_diagonal(b.size, b.size % 2 == 1))
        }
        BlockFamily::F2(x, y) => {
            if x.size != y.size || x.size == 0 {
                return Err(Error::InvalidPairing(format!(
                    "F2 block sizes differ: {} vs {}",
                    x.size, y.size
                )));
            }
            let scale = 1.0 + x.lambda.norm().max(y.lambda.norm());
            if (y.lambda + x.lambda.conj()).norm() > PAIRING_SLACK * scale {
                return Err(Error::InvalidPairing(format!(
                    "{} and {} are not mirror images across the imaginary axis",
                    x.lambda, y.lambda
                )));
            }
            if x.lambda.re.abs() <= PAIRING_SLACK * scale {
                return Err(Error::InvalidPairing(
                    "F2 pair lies on the imaginary axis; use F1".into(),
                ));
            }
            Ok(anti_diagonal(2 * x.size, false))
        }
    }
}

fn anti_diagonal(size: usize, real_signs: bool) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(size);
    for r in 0..size {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let z = if real_signs {
            C64::new(sign, 0.0)
        } else {
            I * sign
        };
        g.set(r, size - 1 - r, z);
    }
    g
}

/// The assembled `G′` and symmetrized `J` in the ordering of a
/// [`JordanStructure`].
#[derive(Clone, Debug)]
pub struct CanonicalMetric {
    pub g_prime: ComplexMatrix,
    pub s_prime: ComplexMatrix,
    pub j: ComplexMatrix,
    pub families: Vec<BlockFamily>,
}

/// Pairs the blocks of `js` into F₁/F₂ families and builds `G′`, `S′`.
pub fn canonical_metric(js: &JordanStructure, radius: f64) -> Result<CanonicalMetric> {
    let items: Vec<(C64, Vec<usize>)> =
        js.blocks.iter().map(|b| (b.lambda, vec![b.size])).collect();
    let mates = mirror_matching(&items, radius).ok_or_else(|| {
        Error::PairingFailure(format!(
            "blocks {:?} do not pair under λ ↦ −λ̄",
            js.blocks
                .iter()
                .map(|b| (b.lambda, b.size))
                .collect::<Vec<_>>()
        ))
    })?;
    let n = js.j.n();
    let offsets = js.block_offsets();
    let mut g = ComplexMatrix::zeros(n);
    let mut j = js.j.clone();
    let mut families = Vec::new();
    for (k, &mate) in mates.iter().enumerate() {
        let b = js.blocks[k];
        if mate == k {
            // Put the eigenvalue exactly on the axis.
            let lambda = C64::new(0.0, b.lambda.im);
            let spec = JordanBlockSpec {
                lambda,
                size: b.size,
            };
            g.set_block(
                offsets[k],
                offsets[k],
                &block_metric(BlockFamily::F1(spec))?,
            );
            for r in 0..b.size {
                j.set(offsets[k] + r, offsets[k] + r, lambda);
            }
            families.push(BlockFamily::F1(spec));
        } else if k < mate {
            let other = js.blocks[mate];
            // Symmetrize the pair so that μ = −λ̄ holds exactly.
            let lambda = (b.lambda - other.lambda.conj()) * 0.5;
            let mu = -lambda.conj();
            let x = JordanBlockSpec {
                lambda,
                size: b.size,
            };
            let y = JordanBlockSpec {
                lambda: mu,
                size: other.size,
            };
            let full = block_metric(BlockFamily::F2(x, y))?;
            let l = b.size;
            let (o1, o2) = (offsets[k], offsets[mate]);
            for r in 0..l {
                for c in 0..l {
                    g.set(o1 + r, o2 + c, full.get(r, l + c));
                    g.set(o2 + r, o1 + c, full.get(l + r, c));
                }
            }
            for r in 0..l {
                j.set(o1 + r, o1 + r, lambda);
                j.set(o2 + r, o2 + r, mu);
            }
            families.push(BlockFamily::F2(x, y));
        }
    }
    let s = (&g * &j).scale(-I);
    Ok(CanonicalMetric {
        g_prime: g,
        s_prime: s,
        j,
        families,
    })
}

/// Metric construction for any `A` similar to `−Ā`.
pub fn construct_metric(a: &ComplexMatrix, tol: &Tolerances) -> Result<MetricPair> {
    let js = jordan_decompose(a, tol)?;
    let values = eigenvalues(a)?;
    let radius = cluster_radius(&values, tol);
    let mirrored: Vec<(C64, Vec<usize>)> = js
        .staircases
        .iter()
        .map(|s| (s.lambda, s.partition.clone()))
        .collect();
    if mirror_matching(&mirrored, radius).is_none() {
        return Err(Error::NotGHamiltonian(
            "spectrum with Jordan structure is not symmetric about the imaginary axis".into(),
        ));
    }
    let canon = canonical_metric(&js, radius)?;
    if !is_hermitian(&canon.s_prime, tol)? {
        return Err(Error::NumericalFailure("block S′ is not Hermitian".into()));
    }
    let q_adj = js.q.adjoint();
    let g = (&(&q_adj * &canon.g_prime) * &js.q).hermitian_part();
    let s = (&(&q_adj * &canon.s_prime) * &js.q).hermitian_part();
    check_metric(&g, tol)?;
    Ok(MetricPair { g, s })
}

/// Errors if `G` is numerically singular.
pub fn check_metric(g: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    g.check_finite()?;
    let s = g.singular_values();
    let (hi, lo) = (s[0], s[s.len() - 1]);
    let cutoff = tol.rank_cut * hi;
    if hi == 0.0 || lo <= cutoff {
        return Err(Error::SingularMetric { min_sv: lo, cutoff });
    }
    Ok(())
}

/// `‖A*G + GA‖_F / (‖A‖_F ‖G‖_F)`
pub fn verify_metric(a: &ComplexMatrix, g: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    if a.n() != g.n() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            a.n(),
            g.n()
        )));
    }
    a.check_finite()?;
    check_metric(g, tol)?;
    let defect = (&(&a.adjoint() * g) + &(g * a)).frobenius_norm();
    let denom = a.frobenius_norm() * g.frobenius_norm();
    Ok(if denom == 0.0 { 0.0 } else { defect / denom })
}

/// `‖A − iG⁻¹S‖_F / ‖A‖_F`
pub fn decomposition_residual(a: &ComplexMatrix, pair: &MetricPair) -> Result<f64> {
    let recon = (&pair.g.inverse()? * &pair.s).scale(I);
    let norm = a.frobenius_norm();
    let defect = (a - &recon).frobenius_norm();
    Ok(if norm == 0.0 { defect } else { defect / norm })
}

/// Orthonormal (Frobenius) basis of the Hermitian matrices; diagonal units,
/// then `(E_jk + E_kj)/√2` and `i(E_jk − E_kj)/√2` for `j < k`.
pub fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut m = ComplexMatrix::zeros(n);
        m.set(j, j, C64::new(1.0, 0.0));
        out.push(m);
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut m = ComplexMatrix::zeros(n);
            m.set(j, k, C64::new(h, 0.0));
            m.set(k, j, C64::new(h, 0.0));
            out.push(m);
            let mut m = ComplexMatrix::zeros(n);
            m.set(j, k, C64::new(0.0, h));
            m.set(k, j, C64::new(0.0, -h));
            out.push(m);
        }
    }
    out
}

/// Basis of the real vector space of Hermitian `G` with `A*G + GA = 0` for
/// every `A` in `generators`. The basis is orthonormal in the Frobenius inner
/// product.
pub fn admissible_metrics(
    generators: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    let Some(first) = generators.first() else {
        return Err(Error::InsufficientData("no generators".into()));
    };
    let n = first.n();
    if generators.iter().any(|a| a.n() != n) {
        return Err(Error::InvalidInput("generators differ in dimension".into()));
    }
    let basis = hermitian_basis(n);
    let dim = basis.len();
    let rows_per = 2 * n * n;
    let mut lin = DMatrix::<f64>::zeros(rows_per * generators.len().max(1), dim);
    for (g_idx, a) in generators.iter().enumerate() {
        let a_norm = a.frobenius_norm().max(f64::MIN_POSITIVE);
        let a_adj = a.adjoint();
        for (col, e) in basis.iter().enumerate() {
            let img = &(&a_adj * e) + &(e * a);
            for r in 0..n {
                for c in 0..n {
                    let z = img.get(r, c) / a_norm;
                    let row = g_idx * rows_per + 2 * (r * n + c);
                    lin[(row, col)] = z.re;
                    lin[(row + 1, col)] = z.im;
                }
            }
        }
    }
    // Square rows count so the SVD returns all right singular vectors.
    let lin = if lin.nrows() < dim {
        let mut padded = DMatrix::<f64>::zeros(dim, dim);
        padded.view_mut((0, 0), (lin.nrows(), dim)).copy_from(&lin);
        padded
    } else {
        lin
    };
    let (sv, v) = dense::real_right_singular(&lin)?;
    let cut = tol.residual * 10.0;
    let mut out = Vec::new();
    for k in (0..sv.len()).rev() {
        if sv[k] > cut {
            break;
        }
        let mut g = ComplexMatrix::zeros(n);
        for (c, e) in basis.iter().enumerate() {
            let w = v[(c, k)];
            if w != 0.0 {
                g = &g + &e.scale(C64::new(w, 0.0));
            }
        }
        out.push(g);
    }
    Ok(out)
}

/// `Σ w_k G_k`
pub fn combine(basis: &[ComplexMatrix], weights: &[f64]) -> ComplexMatrix {
    let n = basis[0].n();
    basis
        .iter()
        .zip(weights)
        .fold(ComplexMatrix::zeros(n), |acc, (g, &w)| {
            &acc + &g.scale(C64::new(w, 0.0))
        })
}

/// Smallest |eigenvalue| of a Hermitian matrix over its Frobenius norm.
pub fn conditioning(g: &ComplexMatrix) -> f64 {
    let norm = g.frobenius_norm();
    if norm == 0.0 {
        return 0.0;
    }
    g.hermitian_eigenvalues()
        .iter()
        .map(|x| x.abs())
        .fold(f64::INFINITY, f64::min)
        / norm
}

/// A well-conditioned nonsingular element of `span(basis)`, chosen by a
/// fixed deterministic search over combination weights.
pub fn nonsingular_element(basis: &[ComplexMatrix], tol: &Tolerances) -> Option<ComplexMatrix> {
    if basis.is_empty() {
        return None;
    }
    let d = basis.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |w: Vec<f64>| {
        let score = conditioning(&combine(basis, &w));
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, w));
        }
    };
    for k in 0..d {
        consider((0..d).map(|i| (i == k) as u8 as f64).collect());
    }
    // Low-discrepancy weights in [-1, 1].
    let phi = 0.618_033_988_749_894_9_f64;
    for trial in 1..=64 {
        consider(
            (0..d)
                .map(|i| (trial as f64 * phi * (i as f64 + 1.0).sqrt()).fract() * 2.0 - 1.0)
                .collect(),
        );
    }
    let (score, w) = best?;
    if score <= tol.rank_cut * 10.0 {
        return None;
    }
    let g = combine(basis, &w);
    let norm = g.frobenius_norm();
    Some(g.scale(C64::new(1.0 / norm, 0.0)))
}
