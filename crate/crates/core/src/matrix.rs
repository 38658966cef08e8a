//! Dense complex matrices and the tolerance-aware kernels built on them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical thresholds. Every one is relative to the Frobenius norm of the
/// matrix it is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eig_cluster: f64,
    pub rank_cut: f64,
    pub residual: f64,
    pub axis: f64,
    pub zero_action: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig_cluster: 1e-6,
            rank_cut: 1e-10,
            residual: 1e-8,
            axis: 1e-8,
            zero_action: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("eig_cluster", self.eig_cluster),
            ("rank_cut", self.rank_cut),
            ("residual", self.residual),
            ("axis", self.axis),
            ("zero_action", self.zero_action),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Square dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.n(), self.n())?;
        for i in 0..self.n() {
            write!(f, "  ")?;
            for j in 0..self.n() {
                let z = self.data[(i, j)];
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix {
            data: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix {
            data: DMatrix::identity(n, n),
        }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        ComplexMatrix {
            data: DMatrix::from_fn(n, n, f),
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) })
    }

    /// Builds a matrix from rows, rejecting ragged, empty or non-finite input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("matrix has no rows".into()));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        let m = Self::from_fn(n, |i, j| rows[i][j]);
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_dmatrix(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "expected a nonempty square matrix, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let m = ComplexMatrix { data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[(i, j)] = z;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.data[(i, j)]).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput("matrix has non-finite entries".into()))
        }
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix {
            data: self.data.adjoint(),
        }
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            data: self.data.map(|z| z.conj()),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        ComplexMatrix {
            data: self.data.map(|z| z * c),
        }
    }

    /// `self - λI`
    pub fn shifted(&self, lambda: C64) -> Self {
        let mut m = self.clone();
        for k in 0..self.n() {
            m.data[(k, k)] -= lambda;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        &self.data * v
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.n());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn inverse(&self) -> Result<Self> {
        self.data
            .clone()
            .try_inverse()
            .filter(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .map(|data| ComplexMatrix { data })
            .ok_or_else(|| Error::NumericalFailure("matrix is singular".into()))
    }

    /// Singular values in descending order; all NaN if the SVD fails.
    pub fn singular_values(&self) -> Vec<f64> {
        dense::singular_values(&self.data).unwrap_or_else(|_| vec![f64::NAN; self.n()])
    }

    /// 2-norm condition number; infinite for singular matrices.
    pub fn condition_number(&self) -> f64 {
        let s = self.singular_values();
        let (hi, lo) = (s[0], s[s.len() - 1]);
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Eigenvalues of the Hermitian part `(M + M*)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        dense::hermitian_eigenvalues(&h).unwrap_or_else(|_| vec![f64::NAN; self.n()])
    }

    /// `(M + M*)/2`
    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix {
            data: (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    /// Embeds `block` at offset `(r, c)`.
    pub fn set_block(&mut self, r: usize, c: usize, block: &ComplexMatrix) {
        for i in 0..block.n() {
            for j in 0..block.n() {
                self.data[(r + i, c + j)] = block.data[(i, j)];
            }
        }
    }

    pub fn block_diagonal(blocks: &[ComplexMatrix]) -> Self {
        let n = blocks.iter().map(|b| b.n()).sum();
        let mut out = Self::zeros(n);
        let mut off = 0;
        for b in blocks {
            out.set_block(off, off, b);
            off += b.n();
        }
        out
    }

    pub fn column(&self, j: usize) -> CVector {
        self.data.column(j).into_owned()
    }

    pub fn from_columns(cols: &[CVector]) -> Result<Self> {
        let n = cols.len();
        if n == 0 || cols.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInput(
                "columns do not form a square matrix".into(),
            ));
        }
        Ok(ComplexMatrix {
            data: DMatrix::from_columns(cols),
        })
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data * &rhs.data,
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { data: -&self.data }
    }
}

/// `‖M − M*‖_F ≤ residual·(1 + ‖M‖_F)`
pub fn is_hermitian(m: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    m.check_finite()?;
    let diff = (m - &m.adjoint()).frobenius_norm();
    Ok(diff <= tol.residual * (1.0 + m.frobenius_norm()))
}

/// Eigenvalues (with multiplicity) and unit right eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: Vec<CVector>,
}

/// Eigenvalues only, sorted by real then imaginary part.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    m.check_finite()?;
    let mut values = dense::eigenvalues(&m.data)?;
    if values
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::NumericalFailure(
            "eigenvalue iteration produced non-finite values".into(),
        ));
    }
    sort_spectrum(&mut values);
    Ok(values)
}

/// Sorts by real part, then imaginary part. Real parts within rounding of
/// zero count as zero so that spectra on the imaginary axis order stably.
pub fn sort_spectrum(values: &mut [C64]) {
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let key = |z: &C64| {
        if z.re.abs() <= 1e-12 * scale {
            0.0
        } else {
            z.re
        }
    };
    values.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.im.total_cmp(&b.im)));
}

/// Full eigendecomposition. Each eigenvector is the right singular vector of
/// `M − λI` for its smallest singular value, normalized to unit length with
/// the first significant component real and positive.
pub fn eig(m: &ComplexMatrix) -> Result<Eigen> {
    let values = eigenvalues(m)?;
    let vectors = values
        .iter()
        .map(|&l| eigenvector(m, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(Eigen { values, vectors })
}

/// Unit vector minimizing `‖(M − λI)v‖`.
pub fn eigenvector(m: &ComplexMatrix, lambda: C64) -> Result<CVector> {
    let svd = dense::svd(&m.shifted(lambda).data)?;
    let v: CVector = svd.v.column(m.n() - 1).into_owned();
    Ok(normalize_phase(v))
}

/// Unit norm, first significant component rotated onto the positive real axis.
pub fn normalize_phase(v: CVector) -> CVector {
    let norm = v.norm();
    if norm == 0.0 {
        return v;
    }
    let v = v / C64::new(norm, 0.0);
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead = v
        .iter()
        .find(|z| z.norm() > 1e-8 * max)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    v.map(|z| z * phase)
}

/// Orthonormal basis of the numerical kernel: right singular vectors whose
/// singular values are at most `rank_cut·σ_max`.
pub fn nullspace(m: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<CVector>> {
    nullspace_scaled(m, 0.0, tol)
}

/// As [`nullspace`], with the cutoff `rank_cut·max(σ_max, reference)`.
/// Useful for `A − λI`, whose own norm can vanish.
pub fn nullspace_scaled(
    m: &ComplexMatrix,
    reference: f64,
    tol: &Tolerances,
) -> Result<Vec<CVector>> {
    m.check_finite()?;
    let n = m.n();
    let svd = dense::svd(&m.data)?;
    let s_max = svd.s[0];
    if s_max == 0.0 {
        return Ok((0..n)
            .map(|k| CVector::from_fn(n, |i, _| C64::new((i == k) as u8 as f64, 0.0)))
            .collect());
    }
    let cut = tol.rank_cut * s_max.max(reference);
    Ok((0..n)
        .rev()
        .filter(|&k| svd.s[k] <= cut)
        .map(|k| svd.v.column(k).into_owned())
        .collect())
}

/// Dimension of the numerical kernel.
pub fn nullity(m: &ComplexMatrix, tol: &Tolerances) -> Result<usize> {
    m.check_finite()?;
    let s = m.singular_values();
    if s[0] == 0.0 {
        return Ok(m.n());
    }
    Ok(s.iter().filter(|&&x| x <= tol.rank_cut * s[0]).count())
}

pub fn vec_inner(u: &CVector, v: &CVector) -> C64 {
    u.dotc(v)
}
