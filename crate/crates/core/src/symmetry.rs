//! Parity, PT-symmetry and pseudo-Hermiticity predicates.
//!
//! `T` is complex conjugation; it is never stored as data. In matrix form
//! PT-symmetry of `H` reads `PH̄ = HP`, or `PA + ĀP = 0` for `A = -iH`.

use crate::error::{Error, Result};
use crate::matrix::{is_hermitian, ComplexMatrix, Tolerances, I};

/// An involution `P² = I` used as the parity operator.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityOperator(ComplexMatrix);

impl ParityOperator {
    pub fn new(p: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if is_involution(&p, tol) {
            Ok(ParityOperator(p))
        } else {
            Err(Error::ParityInvalid)
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

pub fn is_involution(p: &ComplexMatrix, tol: &Tolerances) -> bool {
    if !p.is_finite() {
        return false;
    }
    let p_norm = p.frobenius_norm();
    let defect = (&(p * p) - &ComplexMatrix::identity(p.n())).frobenius_norm();
    defect <= tol.residual * (1.0 + p_norm * p_norm)
}

/// `‖PH̄ − HP‖_F ≤ residual·‖H‖_F·‖P‖_F`
pub fn is_pt_symmetric(h: &ComplexMatrix, p: &ParityOperator, tol: &Tolerances) -> Result<bool> {
    let p = p.matrix();
    check_shapes(h, p)?;
    let defect = (&(p * &h.conj()) - &(h * p)).frobenius_norm();
    Ok(defect <= tol.residual * h.frobenius_norm() * p.frobenius_norm())
}

/// Same test written through `A`: `‖PA + ĀP‖_F ≤ residual·‖A‖_F·‖P‖_F`.
pub fn is_pt_symmetric_generator(
    a: &ComplexMatrix,
    p: &ParityOperator,
    tol: &Tolerances,
) -> Result<bool> {
    let p = p.matrix();
    check_shapes(a, p)?;
    let defect = (&(p * a) + &(&a.conj() * p)).frobenius_norm();
    Ok(defect <= tol.residual * a.frobenius_norm() * p.frobenius_norm())
}

/// `A = -iH`
pub fn h_to_a(h: &ComplexMatrix) -> ComplexMatrix {
    h.scale(-I)
}

/// `H = iA`
pub fn a_to_h(a: &ComplexMatrix) -> ComplexMatrix {
    a.scale(I)
}

/// True iff `S := −GH` is Hermitian, i.e. `H = −G⁻¹S` with `G` the given
/// metric.
pub fn is_pseudo_hermitian(h: &ComplexMatrix, g: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    check_shapes(h, g)?;
    crate::metric::check_metric(g, tol)?;
    let s = -&(g * h);
    let defect = (&s - &s.adjoint()).frobenius_norm();
    Ok(defect <= tol.residual * h.frobenius_norm().max(f64::MIN_POSITIVE) * g.frobenius_norm())
}

/// Hermitian test re-exported here for the symmetry-centric API.
pub fn is_hermitian_matrix(m: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    is_hermitian(m, tol)
}

fn check_shapes(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    a.check_finite()?;
    b.check_finite()
}
