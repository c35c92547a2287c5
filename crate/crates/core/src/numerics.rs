//! Dense complex linear algebra shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const POLAR_TOL: f64 = 1e-12;
pub const POLAR_MAX_ITER: usize = 100;
pub const RANK_REL_TOL: f64 = 1e-8;

/// Smallest accepted sigma_min / sigma_max for the polar factor.
const INVERTIBLE_RATIO: f64 = 1e-12;

pub fn check_finite(a: &CMatrix) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Empty);
    }
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Unitary polar factor by the Newton iteration X <- (X + X^{-H}) / 2.
pub fn polar_unitary(a: &CMatrix, tol: f64, max_iter: usize) -> Result<CMatrix> {
    check_finite(a)?;
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let s = singular_values(a);
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if hi == 0.0 || lo <= INVERTIBLE_RATIO * hi {
        return Err(Error::SingularInput {
            ratio: if hi == 0.0 { 0.0 } else { lo / hi },
        });
    }

    let n = a.nrows();
    let mut x = a.clone();
    let mut last_step = f64::INFINITY;
    for _ in 0..max_iter {
        let inv = x
            .clone()
            .try_inverse()
            .ok_or(Error::SingularInput { ratio: 0.0 })?;
        let next = (&x + inv.adjoint()).scale(0.5);
        last_step = frobenius(&(&next - &x));
        x = next;
        if last_step < tol {
            let defect = frobenius(&(x.adjoint() * &x - CMatrix::identity(n, n)));
            if defect > 10.0 * tol {
                break;
            }
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_step,
    })
}

/// Number of singular values below `rel_tol` times the largest one.
pub fn null_space_dim(a: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let hi = s.first().copied().unwrap_or(0.0);
    // Rank deficiency counts missing singular values of a wide matrix too.
    let missing = a.ncols().saturating_sub(s.len());
    if hi == 0.0 {
        return a.ncols();
    }
    missing + s.iter().filter(|&&v| v < rel_tol * hi).count()
}

/// Euclidean distance from `target` to span(basis).
pub fn span_distance(target: &[Complex64], basis: &[Vec<Complex64>]) -> Result<f64> {
    if basis.is_empty() || target.is_empty() {
        return Err(Error::Empty);
    }
    let n = target.len();
    for v in basis {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let b = CMatrix::from_fn(n, basis.len(), |i, j| basis[j][i]);
    check_finite(&b)?;
    let q = b.qr().q();
    let mut r = CVector::from_column_slice(target);
    // Two passes of projection keep the residual orthogonal when the basis is
    // close to dependent.
    for _ in 0..2 {
        let coef = q.adjoint() * &r;
        r -= &q * coef;
    }
    Ok(r.norm())
}
