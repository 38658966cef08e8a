//! Dense decompositions.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::C64;

fn to_faer(m: &DMatrix<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn svd_failed<E: std::fmt::Debug>(e: E) -> Error {
    Error::NumericalFailure(format!("SVD did not converge: {e:?}"))
}

fn evd_failed<E: std::fmt::Debug>(e: E) -> Error {
    Error::NumericalFailure(format!("eigenvalue iteration did not converge: {e:?}"))
}

/// Singular values in descending order and the matching right singular
/// vectors as columns of `v`.
pub(crate) struct Svd {
    pub s: Vec<f64>,
    pub v: DMatrix<C64>,
}

pub(crate) fn svd(m: &DMatrix<C64>) -> Result<Svd> {
    let f = to_faer(m);
    let d = f.thin_svd().map_err(svd_failed)?;
    let s = d.S().column_vector().iter().map(|z| z.re).collect();
    Ok(Svd {
        s,
        v: from_faer(d.V()),
    })
}

/// Descending.
pub(crate) fn singular_values(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    to_faer(m).singular_values().map_err(svd_failed)
}

/// Right singular vectors of a real matrix with at least as many rows as
/// columns, as columns, with singular values descending.
pub(crate) fn real_right_singular(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let f = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let d = f.thin_svd().map_err(svd_failed)?;
    let s = d.S().column_vector().iter().copied().collect();
    let v = d.V();
    Ok((s, DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)])))
}

pub(crate) fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    to_faer(m).eigenvalues().map_err(evd_failed)
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    to_faer(m)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(evd_failed)
}
