//! Krein actions and eigenvalue kinds.
//!
//! For a G-Hamiltonian `A`, an eigenmode `ψ` on the imaginary axis carries
//! the real action `ψ*Gψ`. An eigenvalue is of the first kind when its whole
//! eigen-subspace has positive action, second kind when negative, and mixed
//! otherwise.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::jordan::cluster_eigenvalues;
use crate::matrix::{
    eigenvalues, is_hermitian, nullspace_scaled, CVector, ComplexMatrix, Tolerances, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    First,
    Second,
    Mixed,
    OffAxis,
}

impl Kind {
    pub fn is_definite(self) -> bool {
        matches!(self, Kind::First | Kind::Second)
    }

    /// Kind of a `(n₊, n₋, n₀)` signature on the axis.
    pub fn from_signature(sig: (usize, usize, usize)) -> Kind {
        match sig {
            (p, 0, 0) if p > 0 => Kind::First,
            (0, q, 0) if q > 0 => Kind::Second,
            _ => Kind::Mixed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollisionClass {
    SameSign,
    OppositeSign,
    NotApplicable,
}

#[derive(Clone, Debug)]
pub struct ModeRecord {
    pub lambda: C64,
    /// Orthonormal basis of `V_λ`.
    pub subspace: Vec<CVector>,
    /// `(n₊, n₋, n₀)` of `V*GV`.
    pub gram_signature: (usize, usize, usize),
    pub kind: Kind,
}

impl ModeRecord {
    pub fn dim(&self) -> usize {
        self.subspace.len()
    }
}

/// `ψ*Gψ`
pub fn action(g: &ComplexMatrix, psi: &CVector, tol: &Tolerances) -> Result<f64> {
    if psi.len() != g.n() {
        return Err(Error::InvalidInput(format!(
            "vector has length {}, metric is {}x{}",
            psi.len(),
            g.n(),
            g.n()
        )));
    }
    let norm2 = psi.norm_squared();
    if norm2 == 0.0 {
        return Err(Error::InvalidInput("action of the zero vector".into()));
    }
    let z = psi.dotc(&g.mul_vec(psi));
    if z.im.abs() > tol.residual * g.frobenius_norm() * norm2 {
        return Err(Error::NonHermitianMetric(z.im));
    }
    Ok(z.re)
}

fn hermitian_check(g: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    if !is_hermitian(g, tol)? {
        return Err(Error::NonHermitianMetric(
            (g - &g.adjoint()).frobenius_norm(),
        ));
    }
    Ok(())
}

/// Signature `(n₊, n₋, n₀)` of the restricted form `V*GV` for orthonormal
/// `V`, with `|μ| ≤ zero_action·‖G‖_F` counted as zero.
pub fn gram_signature(
    g: &ComplexMatrix,
    basis: &[CVector],
    tol: &Tolerances,
) -> (usize, usize, usize) {
    let k = basis.len();
    if k == 0 {
        return (0, 0, 0);
    }
    let gv: Vec<CVector> = basis.iter().map(|v| g.mul_vec(v)).collect();
    let m = DMatrix::from_fn(k, k, |r, c| basis[r].dotc(&gv[c]));
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let zero = tol.zero_action * g.frobenius_norm();
    let mut sig = (0, 0, 0);
    for mu in dense::hermitian_eigenvalues(&m).unwrap_or_else(|_| vec![0.0; k]) {
        if mu > zero {
            sig.0 += 1;
        } else if mu < -zero {
            sig.1 += 1;
        } else {
            sig.2 += 1;
        }
    }
    sig
}

fn off_axis(a: &ComplexMatrix, lambda: C64, tol: &Tolerances) -> bool {
    lambda.re.abs() > tol.axis * a.frobenius_norm()
}

/// Eigen-subspace and kind of `λ`.
pub fn classify_mode(
    a: &ComplexMatrix,
    g: &ComplexMatrix,
    lambda: C64,
    tol: &Tolerances,
) -> Result<ModeRecord> {
    if a.n() != g.n() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            a.n(),
            g.n()
        )));
    }
    hermitian_check(g, tol)?;
    let mut subspace = nullspace_scaled(&a.shifted(lambda), a.frobenius_norm(), tol)?;
    if subspace.is_empty() {
        subspace.push(crate::matrix::eigenvector(a, lambda)?);
    }
    let gram_signature = gram_signature(g, &subspace, tol);
    let kind = if off_axis(a, lambda, tol) {
        Kind::OffAxis
    } else {
        Kind::from_signature(gram_signature)
    };
    Ok(ModeRecord {
        lambda,
        subspace,
        gram_signature,
        kind,
    })
}

/// One record per eigenvalue cluster of `A`, with the algebraic multiplicity.
pub fn mode_records(
    a: &ComplexMatrix,
    g: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Vec<(ModeRecord, usize)>> {
    let values = eigenvalues(a)?;
    cluster_eigenvalues(&values, tol)
        .into_iter()
        .map(|c| Ok((classify_mode(a, g, c.representative, tol)?, c.multiplicity)))
        .collect()
}

/// `(p, q)`: numbers of positive and negative eigenvalues of `G`.
pub fn signature(g: &ComplexMatrix, tol: &Tolerances) -> Result<(usize, usize)> {
    g.check_finite()?;
    hermitian_check(g, tol)?;
    let eig = g.hermitian_eigenvalues();
    let s_max = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cut = tol.rank_cut * s_max;
    let min = eig.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    if s_max == 0.0 || min <= cut {
        return Err(Error::SingularMetric {
            min_sv: min,
            cutoff: cut,
        });
    }
    let p = eig.iter().filter(|&&x| x > cut).count();
    Ok((p, eig.len() - p))
}

/// Every eigenvalue on the imaginary axis and of definite kind.
pub fn is_strongly_stable(a: &ComplexMatrix, g: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    for (rec, _) in mode_records(a, g, tol)? {
        if !rec.kind.is_definite() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sign class of the modes merging at a collision.
pub fn collision_sign_class(records: &[ModeRecord]) -> Result<CollisionClass> {
    if records.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a collision needs at least two merging modes, got {}",
            records.len()
        )));
    }
    let first = records.iter().any(|r| r.kind == Kind::First);
    let second = records.iter().any(|r| r.kind == Kind::Second);
    Ok(if first && second {
        CollisionClass::OppositeSign
    } else {
        CollisionClass::SameSign
    })
}

/// Point of smallest Euclidean norm in the convex hull of `points`, with its
/// convex weights. Exact: every support set is tried.
pub fn min_norm_point(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let k = points.len();
    assert!(k > 0 && k <= 16, "min_norm_point supports 1..=16 points");
    let d = points[0].len();
    let gram = DMatrix::from_fn(k, k, |i, j| {
        points[i]
            .iter()
            .zip(&points[j])
            .map(|(x, y)| x * y)
            .sum::<f64>()
    });
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
        let m = idx.len();
        // min wᵀKw subject to Σw = 1 on the support.
        let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                kkt[(r, c)] = gram[(i, j)];
            }
            kkt[(r, m)] = 1.0;
            kkt[(m, r)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(m + 1);
        rhs[m] = 1.0;
        // Singular systems are affinely dependent supports, whose optimum
        // is also reached on a smaller support.
        let Some(sol) = kkt.full_piv_lu().solve(&rhs) else {
            continue;
        };
        let local: Vec<f64> = (0..m).map(|r| sol[r]).collect();
        let total: f64 = local.iter().sum();
        if local.iter().any(|&w| w < -1e-12) || (total - 1.0).abs() > 1e-8 {
            continue;
        }
        let mut w = vec![0.0; k];
        for (r, &i) in idx.iter().enumerate() {
            w[i] = local[r].max(0.0);
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let val: f64 = (0..k)
            .map(|i| (0..k).map(|j| w[i] * gram[(i, j)] * w[j]).sum::<f64>())
            .sum();
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            best = Some((val, w));
        }
    }
    let (_, w) = best.expect("a single vertex is always feasible");
    let x = (0..d)
        .map(|c| (0..k).map(|i| w[i] * points[i][c]).sum())
        .collect();
    (x, w)
}

/// Coefficients of a metric in `span(basis)` under which every mode in
/// `modes` has strictly positive action, if one exists.
pub fn definite_witness(basis: &[ComplexMatrix], modes: &[CVector]) -> Option<Vec<f64>> {
    if basis.is_empty() || modes.is_empty() {
        return None;
    }
    let pts: Vec<Vec<f64>> = modes
        .iter()
        .map(|v| {
            let v = v / C64::new(v.norm(), 0.0);
            basis.iter().map(|b| v.dotc(&b.mul_vec(&v)).re).collect()
        })
        .collect();
    let scale = pts
        .iter()
        .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let (x, _) = min_norm_point(&pts);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (norm > 1e-6 * scale).then_some(x)
}
