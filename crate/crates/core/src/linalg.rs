//! Dense Hermitian helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvalues (ascending order not guaranteed) and unitary eigenvectors.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(DVector<f64>, CMatrix)> {
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::numerical("eigendecomposition input has non-finite entries"));
    }
    let eig = m.clone().symmetric_eigen();
    if !eig.eigenvalues.iter().all(|x| x.is_finite()) {
        return Err(Error::numerical("eigendecomposition produced non-finite eigenvalues"));
    }
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Moore–Penrose inverse of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianPinv {
    pub pinv: CMatrix,
    /// Absolute eigenvalue cutoff that was applied.
    pub cutoff: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub rank: usize,
}

/// Default relative cutoff `max(dim, 16) · ε_mach`.
pub fn default_pinv_rtol(dim: usize) -> f64 {
    dim.max(16) as f64 * f64::EPSILON
}

/// Eigenvalues with `|λ| ≤ rtol · max|λ|` are treated as zero.
pub fn pinv_hermitian(m: &CMatrix, rtol: f64) -> Result<HermitianPinv> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let scale = vals.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let cutoff = rtol * scale;
    let inv: Vec<f64> = vals
        .iter()
        .map(|&x| if x.abs() > cutoff { 1.0 / x } else { 0.0 })
        .collect();
    let rank = inv.iter().filter(|&&x| x != 0.0).count();
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::new(inv[k], 0.0);
    }
    let pinv = scaled * vecs.adjoint();
    if !pinv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::numerical("pseudoinverse has non-finite entries"));
    }
    Ok(HermitianPinv {
        pinv,
        cutoff,
        min_eigenvalue: vals.iter().cloned().fold(f64::INFINITY, f64::min),
        max_eigenvalue: vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        rank,
    })
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let (vals, _) = hermitian_eigen(m)?;
    Ok(vals.iter().fold(0.0f64, |a, &x| a.max(x.abs())))
}

/// Spectral norm of an arbitrary matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn max_abs_hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

pub fn all_finite(v: impl IntoIterator<Item = Complex64>) -> bool {
    v.into_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
