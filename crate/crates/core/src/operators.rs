//! Matrices of composition operators in the monomial basis.
//!
//! An [`OpMatrix`] carries a matrix at a working dimension `M` together with a
//! reported dimension `N <= M`. Residuals are measured on the leading `N x N`
//! section while every product is carried out at `M`, so truncation error in
//! the inner index of a product is pushed far past the entries being compared.
//! [`comp_matrix`] builds the plain compression (`M = N`); [`comp_section`]
//! chooses `M` from the geometry of the symbol.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{kernel, lft_coeffs, HardyVec};
use crate::moebius::{Moebius, Order};
use crate::numerics::{check_finite, frobenius, null_space_dim, spectral_norm, CMatrix};

/// Safety factor applied to the derivative spread when picking a working
/// dimension.
pub const OVERSAMPLING_MARGIN: f64 = 1.25;
pub const MIN_OVERSAMPLING: usize = 2;
pub const MAX_OVERSAMPLING: usize = 32;
pub const MAX_WORKING_DIM: usize = 1024;

const SPREAD_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct OpMatrix {
    mat: CMatrix,
    dim: usize,
    symbol: Option<Moebius>,
}

impl OpMatrix {
    /// Wraps a square matrix; reported and working dimensions coincide.
    pub fn new(mat: CMatrix) -> Result<Self> {
        let n = mat.nrows();
        OpMatrix::with_section(mat, n, None)
    }

    pub fn with_section(mat: CMatrix, dim: usize, symbol: Option<Moebius>) -> Result<Self> {
        check_finite(&mat)?;
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        if dim == 0 || dim > mat.nrows() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: dim,
            });
        }
        Ok(OpMatrix { mat, dim, symbol })
    }

    pub fn identity(n: usize) -> Self {
        OpMatrix {
            mat: CMatrix::identity(n, n),
            dim: n,
            symbol: Some(Moebius::identity()),
        }
    }

    pub fn diagonal(entries: &[Complex64]) -> Result<Self> {
        let n = entries.len();
        OpMatrix::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                entries[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn working_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn symbol(&self) -> Option<&Moebius> {
        self.symbol.as_ref()
    }

    /// Full matrix at the working dimension.
    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Leading `dim x dim` block.
    pub fn section(&self) -> CMatrix {
        self.mat.view((0, 0), (self.dim, self.dim)).into_owned()
    }

    /// Same operator with the working dimension cut down to `m`.
    pub fn truncated(&self, m: usize) -> OpMatrix {
        let m = m.clamp(self.dim, self.working_dim());
        OpMatrix {
            mat: self.mat.view((0, 0), (m, m)).into_owned(),
            dim: self.dim,
            symbol: self.symbol,
        }
    }

    pub fn adjoint(&self) -> OpMatrix {
        OpMatrix {
            mat: self.mat.adjoint(),
            dim: self.dim,
            symbol: None,
        }
    }

    /// Applies the working matrix to `g` (zero-padded) and returns the first
    /// `g.dim()` coefficients. `g.dim()` must not exceed the working dimension.
    pub fn apply(&self, g: &HardyVec) -> Result<HardyVec> {
        let m = self.working_dim();
        if g.dim() > m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: g.dim(),
            });
        }
        let x = g.resized(m);
        let coeffs = x.coeffs();
        let out = HardyVec::from_fn(g.dim(), |i| {
            (0..m).map(|j| self.mat[(i, j)] * coeffs[j]).sum()
        });
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct OpMatrixJson {
    dim: usize,
    working_dim: usize,
    symbol: Option<Moebius>,
    entries: Vec<Complex64>,
}

impl Serialize for OpMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = self.working_dim();
        let entries = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| self.mat[(i, j)])
            .collect();
        OpMatrixJson {
            dim: self.dim,
            working_dim: m,
            symbol: self.symbol,
            entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OpMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = OpMatrixJson::deserialize(d)?;
        let m = raw.working_dim;
        if raw.entries.len() != m * m {
            return Err(D::Error::custom("entry count does not match working_dim"));
        }
        let mat = CMatrix::from_row_slice(m, m, &raw.entries);
        OpMatrix::with_section(mat, raw.dim, raw.symbol).map_err(D::Error::custom)
    }
}

/// Matrix of C_f on span{1, z, ..., z^{m-1}}: column j holds the first m
/// coefficients of f^j.
fn build_columns(f: &Moebius, m: usize) -> Result<CMatrix> {
    let p = lft_coeffs(f, m)?;
    let p = p.coeffs();
    let mut mat = CMatrix::zeros(m, m);
    mat[(0, 0)] = Complex64::new(1.0, 0.0);
    let mut prev = vec![Complex64::new(0.0, 0.0); m];
    prev[0] = Complex64::new(1.0, 0.0);
    let mut next = vec![Complex64::new(0.0, 0.0); m];
    // Index of the first nonzero coefficient of f^j; skipped in the product.
    let lead = p.iter().position(|z| *z != Complex64::new(0.0, 0.0)).unwrap_or(m);
    let mut start = 0usize;
    for j in 1..m {
        for (k, slot) in next.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in start..=k {
                acc += prev[i] * p[k - i];
            }
            *slot = acc;
        }
        start = (start + lead).min(m);
        for k in 0..m {
            mat[(k, j)] = next[k];
        }
        std::mem::swap(&mut prev, &mut next);
    }
    Ok(mat)
}

/// The compression of C_f to polynomials of degree < n.
pub fn comp_matrix(f: &Moebius, n: usize) -> Result<OpMatrix> {
    let mat = build_columns(f, n)?;
    OpMatrix::with_section(mat, n, Some(*f))
}

/// C_f reported at dimension n, held at [`working_dim`]`(f, n)`.
pub fn comp_section(f: &Moebius, n: usize) -> Result<OpMatrix> {
    comp_section_at(f, n, working_dim(f, n))
}

pub fn comp_section_at(f: &Moebius, n: usize, m: usize) -> Result<OpMatrix> {
    let mat = build_columns(f, m.max(n))?;
    OpMatrix::with_section(mat, n, Some(*f))
}

/// max over the unit circle of max(|f'|, 1/|f'|): how far powers of f smear
/// coefficient mass across degrees.
pub fn spread(f: &Moebius) -> f64 {
    (0..SPREAD_GRID)
        .map(|k| {
            let z = Complex64::from_polar(1.0, TAU * k as f64 / SPREAD_GRID as f64);
            let d = f.derivative(z).norm();
            d.max(1.0 / d)
        })
        .fold(1.0, f64::max)
}

pub fn oversampling(spread: f64) -> usize {
    ((OVERSAMPLING_MARGIN * spread).ceil() as usize).clamp(MIN_OVERSAMPLING, MAX_OVERSAMPLING)
}

pub fn working_dim(f: &Moebius, n: usize) -> usize {
    working_dim_for_spread(spread(f), n)
}

fn working_dim_for_spread(spread: f64, n: usize) -> usize {
    (n * oversampling(spread)).min(MAX_WORKING_DIM).max(n)
}

/// ||[T*T - TT*]_N||_2 / ||T_N||_2^2 on the leading section, with products
/// taken at the working dimension.
pub fn normality_residual(t: &OpMatrix) -> f64 {
    let n = t.dim();
    let m = t.matrix();
    let cols = m.columns(0, n);
    let rows = m.rows(0, n);
    let tt = cols.adjoint() * cols;
    let ttstar = rows * rows.adjoint();
    let scale = spectral_norm(&t.section());
    if scale == 0.0 {
        return 0.0;
    }
    spectral_norm(&(tt - ttstar)) / (scale * scale)
}

/// Dimension of {X : XT = TX, XT* = T*X} for the leading section.
pub fn commutant_dim(t: &OpMatrix, rel_tol: f64) -> usize {
    let a = t.section();
    let n = a.nrows();
    let nn = n * n;
    let astar = a.adjoint();
    // Column-major vec: vec(XA) = (A^T kron I) vec X, vec(AX) = (I kron A) vec X.
    let mut stacked = CMatrix::zeros(2 * nn, nn);
    for (block, op) in [(0usize, &a), (1usize, &astar)] {
        let off = block * nn;
        for q in 0..n {
            for p in 0..n {
                let col = q * n + p;
                // X = e_p e_q^T: XA has row p equal to row q of A; AX has
                // column q equal to column p of A.
                for s in 0..n {
                    stacked[(off + s * n + p, col)] += op[(q, s)];
                    stacked[(off + q * n + s, col)] -= op[(s, p)];
                }
            }
        }
    }
    null_space_dim(&stacked, rel_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticSum {
    pub op: OpMatrix,
    pub order: u32,
    /// ||[T^2 - order * T]_N||_F / ||T_N||_F^2.
    pub residual: f64,
}

/// T = sum_{k < order} C_{f^[k]} for an elliptic automorphism of finite order,
/// with each iterate composed exactly before the matrix is built.
pub fn elliptic_sum(f: &Moebius, n: usize) -> Result<EllipticSum> {
    let order = match f.elliptic_order() {
        Ok(Order::Finite(k)) if k >= 2 => k,
        Ok(_) | Err(Error::NotElliptic) => return Err(Error::NotFiniteOrderElliptic),
        Err(e) => return Err(e),
    };
    let iterates: Vec<Moebius> = (0..order as usize)
        .map(|k| f.iterate(k))
        .collect::<Result<_>>()?;
    let s = iterates.iter().map(spread).fold(1.0, f64::max);
    let m = working_dim_for_spread(s, n);
    let mut total = CMatrix::zeros(m, m);
    for g in &iterates {
        total += build_columns(g, m)?;
    }
    let op = OpMatrix::with_section(total, n, Some(*f))?;
    let mat = op.matrix();
    let square = mat.rows(0, n) * mat.columns(0, n);
    let section = op.section();
    let scale = frobenius(&section);
    let residual = frobenius(&(square - section.scale(order as f64))) / (scale * scale);
    Ok(EllipticSum {
        op,
        order,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub alpha: Complex64,
    pub dim: usize,
    pub working_dim: usize,
    /// <T^n sample, K_alpha> (the value of T^n sample at alpha) for n = 0..=n_max.
    pub pairings: Vec<Complex64>,
    pub expected: Complex64,
    pub max_deviation: f64,
    pub conclusion: String,
}

/// Tracks <K_alpha, T^n f> for a fixed point alpha in the disk. K_alpha is an
/// eigenvector of T* at eigenvalue 1, so the pairing cannot move and the orbit
/// stays on one affine hyperplane.
pub fn orbit_projection_test(f: &Moebius, sample: &HardyVec, n_max: usize) -> Result<OrbitReport> {
    let model = f.standard_rotation_model()?;
    let alpha = model.alpha;
    let t = comp_section(f, sample.dim())?;
    let m = t.working_dim();
    let g = kernel(alpha, 0, m)?;
    let mut x = sample.resized(m);
    let expected = x.inner(&g)?;
    let mut pairings = Vec::with_capacity(n_max + 1);
    for step in 0..=n_max {
        pairings.push(x.inner(&g)?);
        if step < n_max {
            x = t.apply(&x)?;
        }
    }
    let max_deviation = pairings
        .iter()
        .map(|p| (p - expected).norm())
        .fold(0.0, f64::max);
    let conclusion = format!(
        "<K_alpha, T^n f> stays at {:.6e}{:+.6e}i for n <= {n_max} (max deviation {max_deviation:.3e}): \
         the orbit is confined to a hyperplane slice and is not dense",
        expected.re, expected.im
    );
    Ok(OrbitReport {
        alpha,
        dim: sample.dim(),
        working_dim: m,
        pairings,
        expected,
        max_deviation,
        conclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn phi(alpha: Complex64) -> Moebius {
        Moebius::disk_involution(alpha).unwrap()
    }

    #[test]
    fn comp_matrix_examples() {
        let t = comp_matrix(&Moebius::linear(c(0.5, 0.0)).unwrap(), 4).unwrap();
        let want = OpMatrix::diagonal(&[c(1.0, 0.0), c(0.5, 0.0), c(0.25, 0.0), c(0.125, 0.0)]).unwrap();
        assert!(frobenius(&(t.section() - want.section())) < 1e-16);
        let id = comp_matrix(&Moebius::identity(), 6).unwrap();
        assert_eq!(id.section(), CMatrix::identity(6, 6));
        let t = comp_matrix(&Moebius::from_real(1.0, 0.0, -1.0, 2.0).unwrap(), 4).unwrap();
        let col: Vec<Complex64> = t.section().column(1).iter().copied().collect();
        assert_eq!(col, vec![c(0.0, 0.0), c(0.5, 0.0), c(0.25, 0.0), c(0.125, 0.0)]);
    }

    #[test]
    fn columns_match_hardy_powers() {
        let f = phi(c(0.3, -0.4));
        let n = 12;
        let t = comp_matrix(&f, n).unwrap();
        let p = lft_coeffs(&f, n).unwrap();
        let mut pow = HardyVec::monomial(0, n);
        for j in 0..n {
            for k in 0..n {
                assert!((t.section()[(k, j)] - pow.coeffs()[k]).norm() < 1e-14);
            }
            pow = pow.cauchy_product(&p).unwrap();
        }
    }

    #[test]
    fn rotation_acts_by_exact_diagonal_similarity() {
        let f = Moebius::from_real(1.0, 1.0, -1.0, 3.0).unwrap();
        let theta = 0.9;
        let n = 16;
        let u = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, theta * i as f64)
            } else {
                c(0.0, 0.0)
            }
        });
        let lhs = u.adjoint() * comp_matrix(&f, n).unwrap().section() * &u;
        let rhs = comp_matrix(&f.rotate_symbol(theta), n).unwrap().section();
        assert!(frobenius(&(lhs - rhs)) < 1e-13);
    }

    #[test]
    fn adjoint_examples() {
        let id = OpMatrix::identity(5);
        assert_eq!(id.adjoint().section(), id.section());
        let beta = c(0.3, 0.4);
        let d = comp_matrix(&Moebius::linear(beta).unwrap(), 6).unwrap();
        for k in 0..6 {
            assert!((d.adjoint().section()[(k, k)] - beta.conj().powi(k as i32)).norm() < 1e-16);
        }
    }

    #[test]
    fn adjoint_maps_kernels_to_kernels() {
        let n = 64;
        for (f, a) in [
            (phi(c(0.5, 0.0)), c(0.4, 0.2)),
            (Moebius::from_real(1.0, 1.0, -1.0, 3.0).unwrap(), c(-0.5, 0.0)),
            (Moebius::from_real(1.0, 0.0, -1.0, 2.0).unwrap(), c(0.0, 0.5)),
        ] {
            let t = comp_section(&f, n).unwrap().adjoint();
            let k = kernel(a, 0, t.working_dim()).unwrap();
            let got = t.apply(&k).unwrap().resized(n);
            let want = kernel(f.eval(a), 0, n).unwrap();
            assert!((&got - &want).norm() / want.norm() < 1e-6);
        }
    }

    #[test]
    fn normality_examples() {
        for beta in [c(0.5, 0.0), c(0.0, -0.9), c(1.0, 0.0)] {
            let t = comp_matrix(&Moebius::linear(beta).unwrap(), 32).unwrap();
            assert_eq!(normality_residual(&t), 0.0);
        }
        assert!(normality_residual(&comp_section(&phi(c(0.5, 0.0)), 32).unwrap()) > 0.01);
        let f = Moebius::from_real(1.0, 0.0, -1.0, 2.0).unwrap();
        assert!(normality_residual(&comp_section(&f, 32).unwrap()) > 0.01);
    }

    #[test]
    fn commutant_examples() {
        assert_eq!(commutant_dim(&OpMatrix::identity(4), 1e-8), 16);
        let d = OpMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(commutant_dim(&d, 1e-8), 3);
        // A single Jordan block commutes with polynomials in itself, but only
        // scalars commute with both it and its adjoint.
        let mut j = CMatrix::identity(4, 4);
        for k in 0..3 {
            j[(k, k + 1)] = c(1.0, 0.0);
        }
        assert_eq!(commutant_dim(&OpMatrix::new(j).unwrap(), 1e-8), 1);
    }

    #[test]
    fn elliptic_sum_of_minus_z_is_exact() {
        let s = elliptic_sum(&Moebius::linear(c(-1.0, 0.0)).unwrap(), 8).unwrap();
        assert_eq!(s.order, 2);
        assert_eq!(s.residual, 0.0);
        let sec = s.op.section();
        for k in 0..8 {
            let want = if k % 2 == 0 { 2.0 } else { 0.0 };
            assert_eq!(sec[(k, k)], c(want, 0.0));
        }
        let f = Moebius::from_real(1.0, 1.0, -1.0, 3.0).unwrap();
        assert!(matches!(elliptic_sum(&f, 8), Err(Error::NotFiniteOrderElliptic)));
    }

    #[test]
    fn composition_is_matrix_product_on_sections() {
        let f = phi(c(0.5, 0.0));
        let g = phi(c(0.2, 0.3));
        let gf = g.compose(&f).unwrap();
        let mut dev = Vec::new();
        for n in [16, 32, 64] {
            let m = 4 * n;
            let a = comp_section_at(&f, n, m).unwrap();
            let b = comp_section_at(&g, n, m).unwrap();
            let prod = a.matrix().rows(0, n) * b.matrix().columns(0, n);
            dev.push(frobenius(&(prod - comp_matrix(&gf, n).unwrap().section())));
        }
        assert!(dev[0] > dev[2]);
        assert!(dev.iter().all(|&d| d < 1e-11));
    }

    #[test]
    fn orbit_examples() {
        let one_plus_z = HardyVec::new(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = orbit_projection_test(&Moebius::linear(c(0.5, 0.0)).unwrap(), &one_plus_z, 20).unwrap();
        assert!(r.pairings.iter().all(|p| (p - c(1.0, 0.0)).norm() < 1e-15));

        let p = phi(c(0.5, 0.0));
        let psi = p.compose(&Moebius::linear(c(0.3, 0.0)).unwrap()).unwrap().compose(&p).unwrap();
        let z = HardyVec::monomial(1, 16);
        let r = orbit_projection_test(&psi, &z, 30).unwrap();
        assert!((r.expected - c(0.5, 0.0)).norm() < 1e-12);
        assert!(r.max_deviation < 1e-10);

        let r = orbit_projection_test(&Moebius::identity(), &one_plus_z, 5).unwrap();
        assert_eq!(r.max_deviation, 0.0);

        let hyp = Moebius::from_real(1.0, 0.5, 0.5, 1.0).unwrap();
        assert!(matches!(orbit_projection_test(&hyp, &z, 3), Err(Error::NoInteriorFixedPoint)));
    }

    #[test]
    fn working_dim_rule() {
        assert_eq!(working_dim(&phi(c(0.5, 0.0)), 16), 64);
        assert_eq!(working_dim(&Moebius::linear(c(0.5, 0.0)).unwrap(), 16), 48);
        assert_eq!(working_dim(&Moebius::from_real(1.0, 1.0, -1.0, 3.0).unwrap(), 16), 80);
        assert_eq!(working_dim(&phi(c(0.5, 0.0)), 512), MAX_WORKING_DIM);
    }

    #[test]
    fn json_round_trip() {
        let t = comp_section(&phi(c(0.2, 0.1)), 4).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: OpMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }
}
