//! Truncated Taylor-coefficient model of H^2.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::Moebius;

/// Coefficients of z^0, ..., z^{N-1}. Serializes as a JSON array of `[re, im]`
/// pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct HardyVec {
    coeffs: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for HardyVec {
    type Error = Error;
    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        HardyVec::new(v)
    }
}

impl From<HardyVec> for Vec<Complex64> {
    fn from(h: HardyVec) -> Self {
        h.coeffs
    }
}

fn same_dim(f: &HardyVec, g: &HardyVec) -> Result<()> {
    if f.dim() == g.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        })
    }
}

impl HardyVec {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Empty);
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(HardyVec { coeffs })
    }

    pub fn zeros(n: usize) -> Self {
        HardyVec {
            coeffs: vec![Complex64::new(0.0, 0.0); n.max(1)],
        }
    }

    pub fn constant(value: Complex64, n: usize) -> Self {
        let mut v = HardyVec::zeros(n);
        v.coeffs[0] = value;
        v
    }

    /// z^k truncated to dimension n (zero if k >= n).
    pub fn monomial(k: usize, n: usize) -> Self {
        let mut v = HardyVec::zeros(n);
        if k < v.dim() {
            v.coeffs[k] = Complex64::new(1.0, 0.0);
        }
        v
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> Complex64) -> Self {
        HardyVec {
            coeffs: (0..n.max(1)).map(f).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn norm(&self) -> f64 {
        crate::numerics::vec_norm(&self.coeffs)
    }

    /// Copy truncated or zero-padded to dimension n.
    pub fn resized(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n.max(1), Complex64::new(0.0, 0.0));
        HardyVec { coeffs }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        HardyVec {
            coeffs: self.coeffs.iter().map(|z| z * s).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        HardyVec {
            coeffs: self.coeffs.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Sum of a_k conj(b_k).
    pub fn inner(&self, other: &HardyVec) -> Result<Complex64> {
        same_dim(self, other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// First derivative of the truncated series.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (k, &c)| acc * z + c * k as f64)
    }

    pub fn cauchy_product(&self, other: &HardyVec) -> Result<HardyVec> {
        same_dim(self, other)?;
        let n = self.dim();
        let f = &self.coeffs;
        let g = &other.coeffs;
        Ok(HardyVec::from_fn(n, |k| (0..=k).map(|j| f[j] * g[k - j]).sum()))
    }

    /// exp(f) via g_0 = e^{f_0}, k g_k = sum_{j=1}^k j f_j g_{k-j}.
    pub fn series_exp(&self) -> HardyVec {
        let n = self.dim();
        let f = &self.coeffs;
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        g[0] = f[0].exp();
        for k in 1..n {
            let s: Complex64 = (1..=k).map(|j| f[j] * g[k - j] * j as f64).sum();
            g[k] = s / k as f64;
        }
        HardyVec { coeffs: g }
    }
}

impl Add for &HardyVec {
    type Output = HardyVec;
    fn add(self, rhs: &HardyVec) -> HardyVec {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in addition");
        HardyVec::from_fn(self.dim(), |k| self.coeffs[k] + rhs.coeffs[k])
    }
}

impl Sub for &HardyVec {
    type Output = HardyVec;
    fn sub(self, rhs: &HardyVec) -> HardyVec {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in subtraction");
        HardyVec::from_fn(self.dim(), |k| self.coeffs[k] - rhs.coeffs[k])
    }
}

impl Mul<Complex64> for &HardyVec {
    type Output = HardyVec;
    fn mul(self, rhs: Complex64) -> HardyVec {
        self.scale(rhs)
    }
}

/// Reproducing kernel for the n-th derivative at omega:
/// <f, K> = f^{(n)}(omega).
pub fn kernel(omega: Complex64, n: usize, dim: usize) -> Result<HardyVec> {
    if omega.norm() >= 1.0 {
        return Err(Error::PointOutsideDisk { modulus: omega.norm() });
    }
    if n >= dim {
        return Err(Error::DimensionMismatch { expected: n + 1, found: dim });
    }
    let w = omega.conj();
    let mut out = HardyVec::zeros(dim);
    // k!/(k-n)! w^{k-n}, advanced by one factor of k/(k-n) * w per step.
    let mut falling: f64 = (1..=n).map(|j| j as f64).product();
    let mut pow = Complex64::new(1.0, 0.0);
    for k in n..dim {
        out.coeffs[k] = pow * falling;
        falling *= (k + 1) as f64 / (k + 1 - n) as f64;
        pow *= w;
    }
    Ok(out)
}

/// Taylor coefficients of a self-map of the disk.
pub fn lft_coeffs(f: &Moebius, dim: usize) -> Result<HardyVec> {
    f.self_map_check().map_err(Error::NotSelfMap)?;
    taylor_coeffs(f, dim)
}

/// Formal Taylor coefficients at 0 of a linear fractional map with no pole at
/// 0. The coefficients decay only when the pole lies outside the closed disk.
pub fn taylor_coeffs(f: &Moebius, dim: usize) -> Result<HardyVec> {
    let [a, b, c, d] = f.coeffs();
    if d.norm() == 0.0 {
        return Err(Error::NotSelfMap("pole at 0".to_string()));
    }
    let q = -c / d;
    let mut out = HardyVec::zeros(dim);
    out.coeffs[0] = b / d;
    let mut qk1 = Complex64::new(1.0, 0.0);
    for k in 1..out.dim() {
        let qk = qk1 * q;
        out.coeffs[k] = (b * qk + a * qk1) / d;
        qk1 = qk;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hv(v: &[(f64, f64)]) -> HardyVec {
        HardyVec::new(v.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn monomials_are_orthonormal() {
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = HardyVec::monomial(i, 5).inner(&HardyVec::monomial(j, 5)).unwrap();
                assert_eq!(got, c(want, 0.0));
            }
        }
        assert!(matches!(
            HardyVec::zeros(3).inner(&HardyVec::zeros(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel(c(0.0, 0.0), 0, 4).unwrap(), HardyVec::monomial(0, 4));
        assert_eq!(kernel(c(0.5, 0.0), 0, 4).unwrap(), hv(&[(1.0, 0.0), (0.5, 0.0), (0.25, 0.0), (0.125, 0.0)]));
        assert_eq!(kernel(c(0.0, 0.0), 1, 4).unwrap(), HardyVec::monomial(1, 4));
        assert!(matches!(kernel(c(1.0, 0.0), 0, 4), Err(Error::PointOutsideDisk { .. })));
        // <f, K^{(2)}_w> = f''(w) for f = z^3: 6w.
        let w = c(0.3, -0.2);
        let k2 = kernel(w, 2, 8).unwrap();
        assert!((HardyVec::monomial(3, 8).inner(&k2).unwrap() - w * 6.0).norm() < 1e-15);
    }

    #[test]
    fn kernel_norm_matches_geometric_sum() {
        let w = c(0.6, 0.2);
        let n = 64;
        let k = kernel(w, 0, n).unwrap();
        let r2 = w.norm_sqr();
        let exact = 1.0 / (1.0 - r2);
        let tail = r2.powi(n as i32) / (1.0 - r2);
        assert!((k.inner(&k).unwrap().re - exact).abs() <= tail + 1e-14);
        assert!((kernel(c(0.5, 0.0), 0, n).unwrap().eval(c(0.5, 0.0)) - c(4.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reproducing_property() {
        let f = hv(&[(1.0, 2.0), (-0.5, 0.0), (0.0, 3.0), (0.25, -1.0)]);
        for w in [c(0.2, 0.1), c(-0.9, 0.0), c(0.0, 0.5)] {
            let k = kernel(w, 0, 4).unwrap();
            assert!((f.inner(&k).unwrap() - f.eval(w)).norm() < 1e-14);
        }
        assert_eq!(HardyVec::constant(c(1.0, 0.0), 5).eval(c(0.7, 0.7)), c(1.0, 0.0));
    }

    #[test]
    fn product_examples() {
        let one_plus = hv(&[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let one_minus = hv(&[(1.0, 0.0), (-1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(one_plus.cauchy_product(&one_minus).unwrap(), hv(&[(1.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]));
        let one = HardyVec::constant(c(1.0, 0.0), 3);
        assert_eq!(one_plus.cauchy_product(&one).unwrap(), one_plus);

        // (z/(2-z))^2 = z^2/4 + z^3/4 + 3 z^4/16 + ...
        let m = Moebius::from_real(1.0, 0.0, -1.0, 2.0).unwrap();
        let p = lft_coeffs(&m, 5).unwrap();
        let sq = p.cauchy_product(&p).unwrap();
        let want = [0.0, 0.0, 0.25, 0.25, 0.1875];
        for (k, w) in want.iter().enumerate() {
            assert!((sq.coeffs()[k] - c(*w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn exp_examples() {
        assert_eq!(HardyVec::zeros(4).series_exp(), HardyVec::constant(c(1.0, 0.0), 4));
        let e = HardyVec::monomial(1, 8).series_exp();
        let mut fact = 1.0;
        for k in 0..8 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((e.coeffs()[k] - c(1.0 / fact, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn lft_coeffs_examples() {
        let m = Moebius::from_real(1.0, 0.0, -1.0, 2.0).unwrap();
        let p = lft_coeffs(&m, 6).unwrap();
        for k in 0..6 {
            let want = if k == 0 { 0.0 } else { 0.5f64.powi(k as i32) };
            assert!((p.coeffs()[k] - c(want, 0.0)).norm() < 1e-15);
        }
        assert_eq!(lft_coeffs(&Moebius::identity(), 3).unwrap(), HardyVec::monomial(1, 3));
        let two_z = Moebius::from_real(2.0, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(lft_coeffs(&two_z, 4), Err(Error::NotSelfMap(_))));

        // Pointwise oracle for phi_alpha at 64 sample points.
        let phi = Moebius::disk_involution(c(0.5, 0.0)).unwrap();
        let n = 64;
        let p = lft_coeffs(&phi, n).unwrap();
        assert!((p.coeffs()[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((p.coeffs()[1] - c(-0.75, 0.0)).norm() < 1e-15);
        for k in 0..64 {
            let z = Complex64::from_polar(0.9, TAU * k as f64 / 64.0);
            let tail = 0.75 * 0.45f64.powi(n as i32) / (1.0 - 0.45);
            assert!((p.eval(z) - phi.eval(z)).norm() < 1e-9 + tail);
        }
    }
}
