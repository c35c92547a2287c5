//! Linear fractional maps z -> (az + b) / (cz + d) and their classification as
//! self-maps of the unit disk.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for unit-modulus and boundary decisions.
pub const ATOL: f64 = 1e-9;
/// Outer edge of the band around a class boundary. Values whose distance to
/// the boundary lies in (ATOL, AMBIGUITY_BAND] are reported as ambiguous.
pub const AMBIGUITY_BAND: f64 = 1e-6;
/// Largest order searched by [`Moebius::elliptic_order`].
pub const ORDER_CAP: u32 = 4096;

const SELF_MAP_GRID: usize = 1024;
const SELF_MAP_SLACK: f64 = 1e-10;
const ZERO_REL: f64 = 1e-12;
const DOUBLE_ROOT_REL: f64 = 1e-12;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Modulus, infinite for the point at infinity.
    pub fn modulus(self) -> f64 {
        self.finite().map_or(f64::INFINITY, |z| z.norm())
    }

    pub fn distance(self, other: SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => (a - b).norm(),
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SpherePoint::Finite(z) => z.serialize(s),
            SpherePoint::Infinity => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Pair(f64, f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Pair(re, im) => Ok(SpherePoint::Finite(cx(re, im))),
            Raw::Tag(t) if t == "infinity" => Ok(SpherePoint::Infinity),
            Raw::Tag(t) => Err(de::Error::custom(format!("unknown sphere point {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub point: SpherePoint,
    /// Derivative at the point; at infinity, the derivative of 1/f(1/w) at 0.
    pub multiplier: Complex64,
    pub multiplicity: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapKind {
    InteriorAttractive,
    EllipticAutomorphism,
    ParabolicAutomorphism,
    ParabolicNonAutomorphism,
    HyperbolicAutomorphism,
    HyperbolicNonAutomorphism,
    Rotation,
    Identity,
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Order of an elliptic map. `Infinite` means no order up to [`ORDER_CAP`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(n) => s.serialize_u32(*n),
            Order::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Order::Finite(n)),
            Raw::Tag(t) if t == "infinite" => Ok(Order::Infinite),
            Raw::Tag(t) => Err(de::Error::custom(format!("unknown order {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskMapClass {
    pub kind: MapKind,
    pub fixed_points: Vec<FixedPoint>,
    /// Derivative at the interior (or attracting boundary) fixed point, the
    /// rotation parameter for rotations, or the Cayley translation for
    /// parabolic maps.
    pub multiplier: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Order>,
}

impl DiskMapClass {
    /// The fixed point inside the open disk, if any.
    pub fn interior_fixed_point(&self) -> Option<Complex64> {
        self.fixed_points
            .iter()
            .filter_map(|fp| fp.point.finite())
            .find(|z| z.norm() < 1.0 - ATOL)
    }
}

/// Conjugation data from [`Moebius::standard_rotation_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationModel {
    pub alpha: Complex64,
    pub lambda: Complex64,
    /// phi_alpha o f o phi_alpha, which fixes 0.
    pub conjugated: Moebius,
}

/// z -> (az + b) / (cz + d), stored with d = 1, or c = 1 when d = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Complex64; 4]", into = "[Complex64; 4]")]
pub struct Moebius {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl TryFrom<[Complex64; 4]> for Moebius {
    type Error = Error;
    fn try_from(v: [Complex64; 4]) -> Result<Self> {
        Moebius::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Moebius> for [Complex64; 4] {
    fn from(m: Moebius) -> Self {
        m.coeffs()
    }
}

impl Moebius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        if [a, b, c, d].iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = [a, b, c, d].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let det = a * d - b * c;
        if scale == 0.0 || det.norm() <= 1e-14 * scale * scale {
            return Err(Error::DegenerateResult);
        }
        let pivot = if d.norm() > 1e-14 * scale { d } else { c };
        Ok(Moebius {
            a: a / pivot,
            b: b / pivot,
            c: c / pivot,
            d: if pivot == d { ONE } else { d / pivot },
        })
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Moebius::new(cx(a, 0.0), cx(b, 0.0), cx(c, 0.0), cx(d, 0.0))
    }

    pub fn identity() -> Self {
        Moebius { a: ONE, b: ZERO, c: ZERO, d: ONE }
    }

    /// z -> lambda z.
    pub fn linear(lambda: Complex64) -> Result<Self> {
        Moebius::new(lambda, ZERO, ZERO, ONE)
    }

    /// The involutive automorphism phi_alpha(z) = (alpha - z) / (1 - conj(alpha) z).
    pub fn disk_involution(alpha: Complex64) -> Result<Self> {
        if alpha.norm() >= 1.0 {
            return Err(Error::PointOutsideDisk { modulus: alpha.norm() });
        }
        Moebius::new(-ONE, alpha, -alpha.conj(), ONE)
    }

    /// tau(z) = i(1 + z)/(1 - z), the disk onto the upper half-plane.
    pub fn cayley() -> Self {
        Moebius::new(I, I, -ONE, ONE).expect("cayley map is non-degenerate")
    }

    pub fn coeffs(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }
    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    fn scale(&self) -> f64 {
        self.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Value at a finite point; infinite at the pole.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn eval_sphere(&self, p: SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() <= 1e-300 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
            SpherePoint::Infinity => {
                if self.c.norm() <= ZERO_REL * self.scale() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = self.c * z + self.d;
        self.det() / (den * den)
    }

    /// self o g.
    pub fn compose(&self, g: &Moebius) -> Result<Moebius> {
        Moebius::new(
            self.a * g.a + self.b * g.c,
            self.a * g.b + self.b * g.d,
            self.c * g.a + self.d * g.c,
            self.c * g.b + self.d * g.d,
        )
    }

    pub fn inverse(&self) -> Moebius {
        Moebius::new(self.d, -self.b, -self.c, self.a).expect("inverse of a non-degenerate map")
    }

    /// n-fold composite; n = 0 gives the identity.
    pub fn iterate(&self, n: usize) -> Result<Moebius> {
        let mut out = Moebius::identity();
        for _ in 0..n {
            out = self.compose(&out)?;
        }
        Ok(out)
    }

    /// Coefficientwise comparison after normalization.
    pub fn approx_eq(&self, other: &Moebius, tol: f64) -> bool {
        self.coeffs()
            .iter()
            .zip(other.coeffs().iter())
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    fn is_linear(&self) -> bool {
        self.c.norm() <= ZERO_REL * self.scale()
    }

    pub fn is_identity(&self) -> bool {
        let s = self.scale();
        self.is_linear() && self.b.norm() <= ZERO_REL * s && (self.a - self.d).norm() <= ZERO_REL * s
    }

    pub fn fixed_points(&self) -> Result<Vec<FixedPoint>> {
        if self.is_identity() {
            return Err(Error::IdentityMap);
        }
        let s = self.scale();
        if self.is_linear() {
            // (a z + b) / d: infinity is always fixed.
            if (self.a - self.d).norm() <= ZERO_REL * s {
                return Ok(vec![FixedPoint {
                    point: SpherePoint::Infinity,
                    multiplier: ONE,
                    multiplicity: 2,
                }]);
            }
            let z = self.b / (self.d - self.a);
            return Ok(vec![
                FixedPoint {
                    point: SpherePoint::Finite(z),
                    multiplier: self.a / self.d,
                    multiplicity: 1,
                },
                FixedPoint {
                    point: SpherePoint::Infinity,
                    multiplier: self.d / self.a,
                    multiplicity: 1,
                },
            ]);
        }
        // c z^2 + (d - a) z - b = 0
        let p = self.d - self.a;
        let disc = p * p + 4.0 * self.b * self.c;
        let root_scale = (p.norm_sqr() + (self.b * self.c).norm()).max(f64::MIN_POSITIVE);
        if disc.norm() <= DOUBLE_ROOT_REL * root_scale {
            let z = -p / (2.0 * self.c);
            return Ok(vec![FixedPoint {
                point: SpherePoint::Finite(z),
                multiplier: self.derivative(z),
                multiplicity: 2,
            }]);
        }
        let sq = disc.sqrt();
        // Pick the sign that avoids cancellation, then use the product of roots.
        let q = if (-p + sq).norm() >= (-p - sq).norm() { -p + sq } else { -p - sq };
        let z1 = q / (2.0 * self.c);
        let z2 = -2.0 * self.b / q;
        let z2 = if q.norm() == 0.0 { z1 } else { z2 };
        let mut pts: Vec<FixedPoint> = [z1, z2]
            .iter()
            .map(|&z| FixedPoint {
                point: SpherePoint::Finite(z),
                multiplier: self.derivative(z),
                multiplicity: 1,
            })
            .collect();
        pts.sort_by(|x, y| x.point.modulus().total_cmp(&y.point.modulus()));
        Ok(pts)
    }

    /// Self-map test on a boundary grid; the error carries a diagnostic.
    pub fn self_map_check(&self) -> std::result::Result<(), String> {
        if !self.is_linear() {
            let pole = -self.d / self.c;
            if pole.norm() <= 1.0 {
                return Err(format!("pole {pole} lies in the closed disk (|pole| = {})", pole.norm()));
            }
        }
        let at0 = self.eval(ZERO).norm();
        if at0.is_nan() || at0 >= 1.0 + SELF_MAP_SLACK {
            return Err(format!("|f(0)| = {at0} exceeds 1"));
        }
        let mut worst = 0.0f64;
        for k in 0..SELF_MAP_GRID {
            let z = Complex64::from_polar(1.0, TAU * k as f64 / SELF_MAP_GRID as f64);
            worst = worst.max(self.eval(z).norm());
        }
        if worst > 1.0 + SELF_MAP_SLACK {
            return Err(format!("boundary image reaches modulus {worst}"));
        }
        Ok(())
    }

    pub fn is_self_map(&self) -> bool {
        self.self_map_check().is_ok()
    }

    /// e^{i theta} f(e^{-i theta} z).
    pub fn rotate_symbol(&self, theta: f64) -> Moebius {
        let u = Complex64::from_polar(1.0, theta);
        Moebius::new(self.a, u * self.b, self.c / u, self.d).expect("rotation preserves determinant")
    }

    /// Translation parameter a of tau o f o tau^{-1} = w + a, after rotating
    /// the boundary fixed point to 1.
    pub fn cayley_translation(&self) -> Result<Complex64> {
        let fps = self.fixed_points().map_err(|_| Error::NotParabolic)?;
        let p = match fps.as_slice() {
            [fp] if fp.multiplicity == 2 => fp.point.finite().ok_or(Error::NotParabolic)?,
            _ => return Err(Error::NotParabolic),
        };
        if (p.norm() - 1.0).abs() > AMBIGUITY_BAND {
            return Err(Error::NotParabolic);
        }
        let rotated = self.rotate_symbol(-p.arg());
        let tau = Moebius::cayley();
        let model = tau.compose(&rotated)?.compose(&tau.inverse())?;
        let w0 = I;
        let w1 = cx(1.0, 2.0);
        let a0 = model.eval(w0) - w0;
        let a1 = model.eval(w1) - w1;
        if (a0 - a1).norm() > 1e-10 * (1.0 + a0.norm()) {
            return Err(Error::NotParabolic);
        }
        Ok(a0)
    }

    /// The interior fixed point and the multiplier there, with the map
    /// conjugated by phi_alpha so that it fixes 0.
    pub fn standard_rotation_model(&self) -> Result<RotationModel> {
        let alpha = if self.is_linear() && self.b.norm() <= ZERO_REL * self.scale() {
            ZERO
        } else {
            self.fixed_points()
                .map_err(|_| Error::NoInteriorFixedPoint)?
                .iter()
                .filter_map(|fp| fp.point.finite())
                .find(|z| z.norm() < 1.0 - ATOL)
                .ok_or(Error::NoInteriorFixedPoint)?
        };
        let sigma = Moebius::disk_involution(alpha)?;
        let conjugated = sigma.compose(self)?.compose(&sigma)?;
        Ok(RotationModel {
            alpha,
            lambda: self.derivative(alpha),
            conjugated,
        })
    }

    /// Order of an elliptic automorphism (rotations of the circle included).
    pub fn elliptic_order(&self) -> Result<Order> {
        let class = self.classify()?;
        let lambda = match class.kind {
            MapKind::EllipticAutomorphism => class.multiplier,
            MapKind::Rotation if (class.multiplier.norm() - 1.0).abs() <= ATOL => class.multiplier,
            _ => return Err(Error::NotElliptic),
        };
        Ok(root_of_unity_order(lambda))
    }

    pub fn classify(&self) -> Result<DiskMapClass> {
        self.self_map_check().map_err(Error::NotSelfMap)?;
        let s = self.scale();
        if self.is_linear() && self.b.norm() <= ZERO_REL * s {
            let lambda = self.a / self.d;
            let unit = [
                FixedPoint { point: SpherePoint::Finite(ZERO), multiplier: lambda, multiplicity: 1 },
                FixedPoint { point: SpherePoint::Infinity, multiplier: ONE / lambda, multiplicity: 1 },
            ];
            if (lambda - ONE).norm() <= ZERO_REL {
                return Ok(DiskMapClass {
                    kind: MapKind::Identity,
                    fixed_points: vec![],
                    multiplier: ONE,
                    order: Some(Order::Finite(1)),
                });
            }
            let order = if (lambda.norm() - 1.0).abs() <= ATOL {
                Some(root_of_unity_order(lambda))
            } else {
                None
            };
            return Ok(DiskMapClass {
                kind: MapKind::Rotation,
                fixed_points: unit.to_vec(),
                multiplier: lambda,
                order,
            });
        }

        let fps = self.fixed_points()?;
        if fps.len() == 1 {
            let a = self.cayley_translation()?;
            let kind = band_decide(
                a.im,
                0.0,
                MapKind::ParabolicAutomorphism,
                MapKind::ParabolicNonAutomorphism,
                "imaginary part of the Cayley translation",
            )?;
            return Ok(DiskMapClass { kind, fixed_points: fps, multiplier: a, order: None });
        }

        // Location of each fixed point relative to the unit circle.
        for fp in &fps {
            let m = fp.point.modulus();
            let gap = (m - 1.0).abs();
            if gap > ATOL && gap <= AMBIGUITY_BAND {
                return Err(ambiguous(
                    "fixed point on the circle",
                    "fixed point off the circle",
                    format!("|p| = {m}"),
                ));
            }
        }
        if let Some(interior) = fps.iter().find(|fp| fp.point.modulus() < 1.0 - ATOL) {
            let lambda = interior.multiplier;
            let kind = band_decide(
                1.0 - lambda.norm(),
                0.0,
                MapKind::EllipticAutomorphism,
                MapKind::InteriorAttractive,
                "1 - |multiplier| at the interior fixed point",
            )?;
            let order = (kind == MapKind::EllipticAutomorphism).then(|| root_of_unity_order(lambda));
            return Ok(DiskMapClass { kind, fixed_points: fps, multiplier: lambda, order });
        }

        let on_circle: Vec<&FixedPoint> = fps
            .iter()
            .filter(|fp| (fp.point.modulus() - 1.0).abs() <= ATOL)
            .collect();
        let attracting = on_circle
            .iter()
            .min_by(|x, y| x.multiplier.norm().total_cmp(&y.multiplier.norm()))
            .ok_or_else(|| {
                ambiguous("hyperbolic", "elliptic", "no fixed point in the closed disk".into())
            })?;
        let kind = if on_circle.len() == 2 {
            MapKind::HyperbolicAutomorphism
        } else {
            MapKind::HyperbolicNonAutomorphism
        };
        Ok(DiskMapClass {
            kind,
            fixed_points: fps.clone(),
            multiplier: attracting.multiplier,
            order: None,
        })
    }
}

fn ambiguous(first: &str, second: &str, detail: String) -> Error {
    Error::AmbiguousClass {
        first: first.to_string(),
        second: second.to_string(),
        detail,
    }
}

/// `at` when |value - boundary| <= ATOL, `beyond` when value - boundary >
/// AMBIGUITY_BAND, ambiguous in between.
fn band_decide(value: f64, boundary: f64, at: MapKind, beyond: MapKind, what: &str) -> Result<MapKind> {
    let gap = value - boundary;
    if gap.abs() <= ATOL {
        Ok(at)
    } else if gap > AMBIGUITY_BAND {
        Ok(beyond)
    } else if gap > 0.0 {
        Err(ambiguous(&at.to_string(), &beyond.to_string(), format!("{what} = {value:e}")))
    } else {
        Err(Error::NotSelfMap(format!("{what} = {value:e} is on the wrong side of the boundary")))
    }
}

/// Smallest n <= ORDER_CAP with |lambda^n - 1| < ATOL.
pub fn root_of_unity_order(lambda: Complex64) -> Order {
    let mu = lambda / lambda.norm();
    let mut p = mu;
    for n in 1..=ORDER_CAP {
        if (p - ONE).norm() < ATOL {
            return Order::Finite(n);
        }
        p *= mu;
        p /= p.norm();
    }
    Order::Infinite
}

/// Parses a complex literal: `re`, `re+imi`, `re-imi`, `imi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let err = || Error::Parse(format!("invalid complex literal {s:?}"));
    let t = s.trim();
    if t.is_empty() || t.chars().any(char::is_whitespace) {
        return Err(err());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| cx(re, 0.0)).map_err(|_| err());
    };
    // Split at the last sign that is not leading and not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |txt: &str| -> Result<f64> {
        match txt {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => txt.parse::<f64>().map_err(|_| err()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| err())?;
            Ok(cx(re, imag(&body[k..])?))
        }
        None => Ok(cx(0.0, imag(body)?)),
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else if z.re == 0.0 {
        format!("{:?}i", z.im)
    } else if z.im < 0.0 {
        format!("{:?}-{:?}i", z.re, -z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

impl FromStr for Moebius {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected four comma-separated coefficients, got {s:?}")));
        }
        let v: Vec<Complex64> = parts.iter().map(|p| parse_complex(p)).collect::<Result<_>>()?;
        Moebius::new(v[0], v[1], v[2], v[3])
    }
}

impl fmt::Display for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs().iter().map(|&z| format_complex(z)).collect();
        write!(f, "{}", parts.join(","))
    }
}
