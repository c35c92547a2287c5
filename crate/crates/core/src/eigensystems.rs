//! Eigenfunction families: Koenigs functions at attractive interior fixed
//! points and the singular inner functions psi_t of parabolic symbols.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{taylor_coeffs, HardyVec};
use crate::moebius::{MapKind, Moebius, SpherePoint};
use crate::numerics::{singular_values, span_distance, CMatrix};
use crate::operators::comp_section;

/// Agreement required between the closed form and the iteration.
pub const KOENIGS_AGREEMENT: f64 = 1e-8;
/// Successive change at which the iteration stops.
pub const KOENIGS_ITER_TOL: f64 = 1e-14;
pub const KOENIGS_MAX_DEPTH: usize = 2000;

const GRID_POINTS: usize = 64;
const GRID_RADIUS: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KoenigsMethod {
    ClosedForm,
    Iteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoenigsData {
    pub alpha: Complex64,
    pub lambda: Complex64,
    /// Taylor coefficients of kappa, normalized so kappa'(alpha) = 1.
    pub kappa: HardyVec,
    /// kappa is itself linear fractional.
    pub kappa_map: Moebius,
    pub method: KoenigsMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoenigsCheck {
    pub closed_form: KoenigsData,
    pub iterated: KoenigsData,
    pub depth: usize,
    /// max |closed - iterated| over the leading N/2 coefficients.
    pub coefficient_gap: f64,
    /// max |kappa(f(z)) - lambda kappa(z)| on the radius-0.9 grid.
    pub functional_residual: f64,
}

fn grid() -> impl Iterator<Item = Complex64> {
    (0..GRID_POINTS).map(|k| Complex64::from_polar(GRID_RADIUS, TAU * k as f64 / GRID_POINTS as f64))
}

struct AttractiveData {
    alpha: Complex64,
    lambda: Complex64,
    sigma: Moebius,
}

fn attractive(f: &Moebius) -> Result<AttractiveData> {
    let model = f.standard_rotation_model()?;
    let r = model.lambda.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::MultiplierNotAttractive { modulus: r });
    }
    Ok(AttractiveData {
        alpha: model.alpha,
        lambda: model.lambda,
        sigma: Moebius::disk_involution(model.alpha)?,
    })
}

/// 1 / sigma'(alpha) for sigma = phi_alpha.
fn gauge(alpha: Complex64) -> Complex64 {
    Complex64::new(-(1.0 - alpha.norm_sqr()), 0.0)
}

fn scale_map(g: &Moebius, s: Complex64) -> Result<Moebius> {
    let [a, b, c, d] = g.coeffs();
    Moebius::new(a * s, b * s, c, d)
}

fn data(f: &AttractiveData, kappa_map: Moebius, n: usize, method: KoenigsMethod) -> Result<KoenigsData> {
    Ok(KoenigsData {
        alpha: f.alpha,
        lambda: f.lambda,
        kappa: taylor_coeffs(&kappa_map, n)?,
        kappa_map,
        method,
    })
}

/// Closed form: with sigma = phi_alpha and z1 = sigma(beta) for the second
/// fixed point beta, kappa = (w / (1 - w / z1)) o sigma / sigma'(alpha).
pub fn koenigs_closed_form(f: &Moebius, n: usize) -> Result<KoenigsData> {
    let at = attractive(f)?;
    let beta = f
        .fixed_points()?
        .into_iter()
        .map(|fp| fp.point)
        .find(|p| p.finite().is_none_or(|z| (z - at.alpha).norm() > 1e-9))
        .unwrap_or(SpherePoint::Infinity);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let model = match at.sigma.eval_sphere(beta) {
        SpherePoint::Infinity => Moebius::identity(),
        SpherePoint::Finite(z1) => Moebius::new(one, zero, -one / z1, one)?,
    };
    let kappa_map = scale_map(&model.compose(&at.sigma)?, gauge(at.alpha))?;
    data(&at, kappa_map, n, KoenigsMethod::ClosedForm)
}

/// lambda^{-k} g^[k] o sigma / sigma'(alpha) with g = sigma o f o sigma, taken
/// to the depth where successive iterates stop moving. Returns the data and
/// the depth reached.
pub fn koenigs_iterated(f: &Moebius, n: usize) -> Result<(KoenigsData, usize)> {
    let at = attractive(f)?;
    let g = at.sigma.compose(f)?.compose(&at.sigma)?;
    let [a, b, c, d] = g.coeffs();
    // g fixes 0 exactly in exact arithmetic.
    if b.norm() > 1e-12 * (a.norm() + d.norm()) {
        return Err(Error::NoInteriorFixedPoint);
    }
    // g^[k] is kept as a projectively normalized coefficient matrix: the
    // Moebius form of g^[k] itself degenerates towards a constant as k grows.
    let g = [a, Complex64::new(0.0, 0.0), c, d];
    let mul = |x: &[Complex64; 4], y: &[Complex64; 4]| {
        [
            x[0] * y[0] + x[1] * y[2],
            x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2],
            x[2] * y[1] + x[3] * y[3],
        ]
    };
    let lambda_g = a / d;
    let rescaled = |p: &[Complex64; 4], pow: Complex64| -> Result<Moebius> {
        let h = Moebius::new(p[0] / pow, p[1] / pow, p[2], p[3])?;
        scale_map(&h.compose(&at.sigma)?, gauge(at.alpha))
    };
    let mut p = g;
    let mut pow = lambda_g;
    let mut prev = rescaled(&p, pow)?;
    let mut depth = 1;
    loop {
        p = mul(&g, &p);
        let s = p.iter().map(|z| z.norm()).fold(0.0, f64::max);
        p.iter_mut().for_each(|z| *z /= s);
        pow *= lambda_g;
        depth += 1;
        let next = rescaled(&p, pow)?;
        let change = next
            .coeffs()
            .iter()
            .zip(prev.coeffs().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        prev = next;
        if change < KOENIGS_ITER_TOL {
            break;
        }
        if depth >= KOENIGS_MAX_DEPTH {
            return Err(Error::NoConvergence {
                iterations: depth,
                last_step: change,
            });
        }
    }
    Ok((data(&at, prev, n, KoenigsMethod::Iteration)?, depth))
}

/// max |kappa(f(z)) - lambda kappa(z)| on |z| = 0.9, using the exact symbols.
pub fn koenigs_functional_residual(f: &Moebius, kd: &KoenigsData) -> f64 {
    grid()
        .map(|z| (kd.kappa_map.eval(f.eval(z)) - kd.lambda * kd.kappa_map.eval(z)).norm())
        .fold(0.0, f64::max)
}

/// Both constructions, compared on the leading N/2 coefficients.
pub fn koenigs_check(f: &Moebius, n: usize) -> Result<KoenigsCheck> {
    let closed_form = koenigs_closed_form(f, n)?;
    let (iterated, depth) = koenigs_iterated(f, n)?;
    let half = (n / 2).max(1);
    let coefficient_gap = closed_form.kappa.coeffs()[..half]
        .iter()
        .zip(&iterated.kappa.coeffs()[..half])
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let functional_residual = koenigs_functional_residual(f, &closed_form);
    Ok(KoenigsCheck {
        closed_form,
        iterated,
        depth,
        coefficient_gap,
        functional_residual,
    })
}

/// Koenigs eigenfunction, cross-checked against the iteration.
pub fn koenigs(f: &Moebius, n: usize) -> Result<KoenigsData> {
    let check = koenigs_check(f, n)?;
    let gap = check.coefficient_gap.max(check.functional_residual);
    if gap > KOENIGS_AGREEMENT {
        return Err(Error::KoenigsMismatch { gap });
    }
    Ok(check.closed_form)
}

/// kappa^0, ..., kappa^max_n.
pub fn koenigs_powers(kd: &KoenigsData, max_n: usize) -> Vec<HardyVec> {
    let mut out = Vec::with_capacity(max_n + 1);
    let mut p = HardyVec::monomial(0, kd.kappa.dim());
    for k in 0..=max_n {
        if k > 0 {
            p = p.cauchy_product(&kd.kappa).expect("equal dimensions");
        }
        out.push(p.clone());
    }
    out
}

/// ||(C_f kappa^k)_N - lambda^k kappa^k_N|| / ||kappa^k_N|| for k <= max_n,
/// with the powers expanded at the working dimension.
pub fn koenigs_power_residuals(f: &Moebius, kd: &KoenigsData, max_n: usize) -> Result<Vec<f64>> {
    let n = kd.kappa.dim();
    let t = comp_section(f, n)?;
    let wide = KoenigsData {
        kappa: taylor_coeffs(&kd.kappa_map, t.working_dim())?,
        ..kd.clone()
    };
    let mut lam_k = Complex64::new(1.0, 0.0);
    koenigs_powers(&wide, max_n)
        .iter()
        .map(|p| {
            let image = t.apply(p)?.resized(n);
            let p_n = p.resized(n);
            let r = (&image - &p_n.scale(lam_k)).norm() / p_n.norm();
            lam_k *= kd.lambda;
            Ok(r)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicEigenData {
    pub a: Complex64,
    pub t: f64,
    pub psi: HardyVec,
    pub eigenvalue: Complex64,
}

/// psi_t = exp(t (z + 1) / (z - 1)) = e^{-t} exp(-2t sum_{k>=1} z^k), with
/// eigenvalue e^{iat}.
pub fn psi_t(a: Complex64, t: f64, n: usize) -> Result<ParabolicEigenData> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeParameter(t));
    }
    if a.im < -1e-10 {
        return Err(Error::NegativeParameter(a.im));
    }
    let exponent = HardyVec::from_fn(n, |k| Complex64::new(if k == 0 { -t } else { -2.0 * t }, 0.0));
    Ok(ParabolicEigenData {
        a,
        t,
        psi: exponent.series_exp(),
        eigenvalue: (Complex64::i() * a * t).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicEigenCheck {
    pub a: Complex64,
    pub t: f64,
    pub eigenvalue: Complex64,
    /// <C_f psi, psi> / <psi, psi> on the leading section.
    pub rayleigh: Complex64,
    pub residual: f64,
}

/// Residual of C_f psi_t = e^{iat} psi_t on the leading N coefficients, with
/// f rotated so that its boundary fixed point is 1.
pub fn parabolic_eigen_check(f: &Moebius, t: f64, n: usize) -> Result<ParabolicEigenCheck> {
    let a = f.cayley_translation()?;
    let p = f.fixed_points()?[0].point.finite().ok_or(Error::NotParabolic)?;
    let g = f.rotate_symbol(-p.arg());
    let op = comp_section(&g, n)?;
    let wide = psi_t(a, t, op.working_dim())?;
    let image = op.apply(&wide.psi)?.resized(n);
    let psi = wide.psi.resized(n);
    let norm2 = psi.inner(&psi)?;
    let residual = (&image - &psi.scale(wide.eigenvalue)).norm() / psi.norm();
    Ok(ParabolicEigenCheck {
        a,
        t,
        eigenvalue: wide.eigenvalue,
        rayleigh: image.inner(&psi)? / norm2,
        residual,
    })
}

pub fn parabolic_eigen_residual(f: &Moebius, t: f64, n: usize) -> Result<f64> {
    parabolic_eigen_check(f, t, n).map(|c| c.residual)
}

fn parabolic_non_automorphism(f: &Moebius) -> Result<Complex64> {
    let class = f.classify()?;
    if class.kind != MapKind::ParabolicNonAutomorphism {
        return Err(Error::NotParabolicNonAutomorphism);
    }
    Ok(class.multiplier)
}

/// e^{iat} for each t in the grid.
pub fn spectrum_spiral(f: &Moebius, t_grid: &[f64]) -> Result<Vec<Complex64>> {
    let a = parabolic_non_automorphism(f)?;
    t_grid
        .iter()
        .map(|&t| {
            if t < 0.0 {
                Err(Error::NegativeParameter(t))
            } else {
                Ok((Complex64::i() * a * t).exp())
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramRow {
    pub m: usize,
    /// dist(psi_target, span{psi_{t_1}, ..., psi_{t_m}}) / ||psi_target||.
    pub distance: f64,
    /// sigma_min(B)^2 for the matrix B of the first m normalized vectors,
    /// i.e. the smallest eigenvalue of their Gram matrix.
    pub gram_sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub a: Complex64,
    pub dim: usize,
    pub t_grid: Vec<f64>,
    pub t_target: f64,
    pub rows: Vec<GramRow>,
    pub nonincreasing: bool,
    pub interpretation: String,
}

/// Distance from psi_target to the span of growing prefixes of the family
/// (psi_t) on the grid. The vectors are taken for the fixed point at 1; a
/// rotation of the fixed point acts by a diagonal unitary and leaves every
/// distance unchanged.
pub fn gram_minimality_experiment(f: &Moebius, t_grid: &[f64], t_target: f64, n: usize) -> Result<GramReport> {
    let a = parabolic_non_automorphism(f)?;
    if t_grid.is_empty() {
        return Err(Error::Empty);
    }
    if t_grid.contains(&t_target) {
        return Err(Error::TargetInGrid(t_target));
    }
    let target = psi_t(a, t_target, n)?.psi;
    let target_norm = target.norm();
    let family: Vec<Vec<Complex64>> = t_grid
        .iter()
        .map(|&t| {
            let p = psi_t(a, t, n)?.psi;
            let s = Complex64::new(1.0 / p.norm(), 0.0);
            Ok(p.scale(s).into_coeffs())
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(family.len());
    for m in 1..=family.len() {
        let distance = span_distance(target.coeffs(), &family[..m])? / target_norm;
        let b = CMatrix::from_fn(n, m, |i, j| family[j][i]);
        let smin = singular_values(&b).last().copied().unwrap_or(0.0);
        rows.push(GramRow {
            m,
            distance,
            gram_sigma_min: smin * smin,
        });
    }
    let nonincreasing = rows.windows(2).all(|w| w[1].distance <= w[0].distance + 1e-12);
    let (first, last) = (rows[0].distance, rows[rows.len() - 1].distance);
    let interpretation = format!(
        "normalized distance falls from {first:.3e} to {last:.3e} while the Gram matrix degenerates \
         (sigma_min {:.3e}): the eigenvectors are approximately complete but not minimal, so no \
         conjugation can make them a C-orthogonal system",
        rows[rows.len() - 1].gram_sigma_min
    );
    Ok(GramReport {
        a,
        dim: n,
        t_grid: t_grid.to_vec(),
        t_target,
        rows,
        nonincreasing,
        interpretation,
    })
}
