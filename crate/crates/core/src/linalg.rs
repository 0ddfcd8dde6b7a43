//! Shared dense linear-algebra helpers: numeric rank via SVD, minimal-norm
//! least squares, spectral radius.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff used when counting the numeric rank of a
/// matrix. Singular values at or below `tau * sigma_max` are treated as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTolerance {
    pub tau: f64,
}

impl RankTolerance {
    pub fn new(tau: f64) -> Self {
        assert!(tau >= 0.0, "rank tolerance must be nonnegative");
        Self { tau }
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self { tau: 1e-9 }
    }
}

/// Number of singular values above `tau * sigma_max`. The zero matrix has
/// rank 0 regardless of the tolerance.
pub fn numeric_rank(m: &DMatrix<f64>, tol: RankTolerance) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let sv = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or(Error::SvdFailed {
            rows: m.nrows(),
            cols: m.ncols(),
        })?
        .singular_values;
    let sigma_max = sv.max();
    if sigma_max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol.tau * sigma_max).count())
}

/// Minimal-norm least-squares solution of `A X = B` via the SVD
/// pseudoinverse, truncating singular values below `tau * sigma_max`.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    assert_eq!(a.nrows(), b.nrows(), "lstsq: row counts must agree");
    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::SvdFailed {
            rows: a.nrows(),
            cols: a.ncols(),
        })?;
    let sigma_max = svd.singular_values.max();
    let cutoff = tau * sigma_max;
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    // X = V * Sigma^+ * U^T * B
    let mut ut_b = u.transpose() * b;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let inv = if s > cutoff { 1.0 / s } else { 0.0 };
        ut_b.row_mut(i).scale_mut(inv);
    }
    Ok(v_t.transpose() * ut_b)
}

/// Moore-Penrose pseudoinverse with relative cutoff `tau`.
pub fn pinv(a: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    lstsq_min_norm(a, &DMatrix::identity(a.nrows(), a.nrows()), tau)
}

/// Largest eigenvalue modulus, computed from the real Schur form.
pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    assert_eq!(a.nrows(), a.ncols(), "spectral radius needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    if let Some(schur) = a.clone().try_schur(f64::EPSILON, 10_000) {
        return Ok(schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max));
    }
    // The QR iteration can stall on degenerate matrices (e.g. the zero
    // matrix). Shifting by c moves every eigenvalue to lambda + c without
    // changing the eigenvectors, so retry on A + cI and shift back.
    let shift = 1.0 + a.norm();
    let shifted = a + DMatrix::identity(n, n) * shift;
    let schur = shifted
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(Error::EigenvaluesFailed { rows: n, cols: n })?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| (z - nalgebra::Complex::new(shift, 0.0)).norm())
        .fold(0.0, f64::max))
}

/// Residual of membership of `v` in the column space of `m`, relative to
/// `1 + |v|`. Small values mean `v` lies in the image of `m`.
pub fn image_membership_residual(m: &DMatrix<f64>, v: &DVector<f64>, tau: f64) -> Result<f64> {
    let b = DMatrix::from_column_slice(v.len(), 1, v.as_slice());
    let x = lstsq_min_norm(m, &b, tau)?;
    let r = (m * x - b).norm();
    Ok(r / (1.0 + v.norm()))
}
