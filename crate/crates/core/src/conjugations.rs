//! Conjugations C f = U conj(f), the bilinear form [f, g] = <f, C g>, and the
//! conjugation J_alpha under which C_{phi_alpha} is symmetric.

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::HardyVec;
use crate::moebius::Moebius;
use crate::numerics::{frobenius, polar_unitary, CMatrix, POLAR_MAX_ITER, POLAR_TOL};
use crate::operators::{comp_section_at, working_dim, OpMatrix};

/// Axiom defects above this abort the build.
pub const DEFECT_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum ConjugationKind {
    /// (Jf)(z) = conj(f(conj z)), U = I.
    Canonical,
    /// U_theta J U_theta^*, U = diag(e^{2ik theta}).
    Rotation { theta: f64 },
    /// U_theta J W U_theta^* with W the unitary polar factor of C_{phi_|alpha|}
    /// and theta = -arg(alpha).
    JAlpha { alpha: Complex64 },
}

/// Residuals of the conjugation axioms on the leading `dim` columns:
/// `unitarity = ||(U^*U)_N - I||_F`, `involution = ||(U conj U)[:, :N] - I||_F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomDefects {
    pub unitarity: f64,
    pub involution: f64,
}

impl AxiomDefects {
    pub fn max(&self) -> f64 {
        self.unitarity.max(self.involution)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conjugation {
    kind: ConjugationKind,
    dim: usize,
    u: CMatrix,
    axioms: AxiomDefects,
}

fn phase_diag(m: usize, theta: f64) -> CMatrix {
    CMatrix::from_fn(m, m, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, theta * i as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn axiom_defects(u: &CMatrix, n: usize) -> AxiomDefects {
    let m = u.nrows();
    let lead = u.columns(0, n);
    let gram = lead.adjoint() * lead;
    let unitarity = frobenius(&(gram - CMatrix::identity(n, n)));
    let square = u * lead.map(|z| z.conj());
    let involution = frobenius(&(square - CMatrix::identity(m, n)));
    AxiomDefects {
        unitarity,
        involution,
    }
}

/// Unitary polar factor W of C_{phi_a} for real a in (0, 1), held at working
/// dimension m. The Gram matrix of the columns phi^j is known in closed form
/// for an inner symbol, so W = A R^{-1} Q with G = R^* R and Q the polar factor
/// of R; this avoids inverting the badly conditioned compression itself.
fn polar_factor_of_involution(a: f64, n: usize, m: usize) -> Result<CMatrix> {
    let phi = Moebius::disk_involution(Complex64::new(a, 0.0))?;
    let comp = comp_section_at(&phi, n, m)?;
    let gram = CMatrix::from_fn(m, m, |i, j| {
        Complex64::new(a.powi((i as i32 - j as i32).abs()), 0.0)
    });
    let chol = Cholesky::new(gram).ok_or(Error::PolarFailure(Box::new(Error::SingularInput {
        ratio: 0.0,
    })))?;
    let r = chol.l().adjoint();
    let tol = POLAR_TOL * (m as f64).sqrt();
    let q = polar_unitary(&r, tol, POLAR_MAX_ITER).map_err(|e| Error::PolarFailure(Box::new(e)))?;
    let rinv_q = r
        .solve_upper_triangular(&q)
        .ok_or(Error::PolarFailure(Box::new(Error::SingularInput { ratio: 0.0 })))?;
    Ok(comp.matrix() * rinv_q)
}

impl Conjugation {
    pub fn build(kind: ConjugationKind, n: usize) -> Result<Conjugation> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let u = match kind {
            ConjugationKind::Canonical => CMatrix::identity(n, n),
            ConjugationKind::Rotation { theta } => phase_diag(n, 2.0 * theta),
            ConjugationKind::JAlpha { alpha } => {
                let r = alpha.norm();
                if !(r > 0.0 && r < 1.0) {
                    return Err(Error::AlphaOutOfRange { modulus: r });
                }
                let theta = -alpha.arg();
                let m = working_dim(&Moebius::disk_involution(Complex64::new(r, 0.0))?, n);
                let w = polar_factor_of_involution(r, n, m)?;
                let ut = phase_diag(m, theta);
                &ut * w.map(|z| z.conj()) * &ut
            }
        };
        let axioms = axiom_defects(&u, n);
        if axioms.max().is_nan() || axioms.max() > DEFECT_LIMIT {
            return Err(Error::ConjugationDefect(format!(
                "unitarity {:e}, involution {:e}",
                axioms.unitarity, axioms.involution
            )));
        }
        Ok(Conjugation {
            kind,
            dim: n,
            u,
            axioms,
        })
    }

    pub fn canonical(n: usize) -> Conjugation {
        Conjugation::build(ConjugationKind::Canonical, n).expect("identity is a conjugation")
    }

    pub fn kind(&self) -> ConjugationKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn working_dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u
    }

    pub fn axioms(&self) -> AxiomDefects {
        self.axioms
    }

    fn is_diagonal(&self) -> bool {
        !matches!(self.kind, ConjugationKind::JAlpha { .. })
    }

    /// U at working dimension m. Diagonal kinds extend exactly; J_alpha is cut
    /// to its leading block.
    fn unitary_at(&self, m: usize) -> CMatrix {
        if m == self.working_dim() {
            return self.u.clone();
        }
        if self.is_diagonal() {
            let phase = if self.working_dim() > 1 {
                self.u[(1, 1)]
            } else {
                Complex64::new(1.0, 0.0)
            };
            let gauge = self.u[(0, 0)];
            CMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    gauge * phase.powi(i as i32)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        } else {
            let k = m.min(self.working_dim());
            self.u.view((0, 0), (k, k)).into_owned()
        }
    }

    /// lambda C for |lambda| = 1, again a conjugation.
    pub fn scaled(&self, lambda: Complex64) -> Conjugation {
        Conjugation {
            kind: self.kind,
            dim: self.dim,
            u: self.u.scale(1.0).map(|z| z * lambda),
            axioms: self.axioms,
        }
    }

    /// U conj(f). The result has dimension max(f.dim(), working_dim).
    pub fn apply(&self, f: &HardyVec) -> Result<HardyVec> {
        let m = if self.is_diagonal() {
            f.dim().max(self.working_dim())
        } else {
            self.working_dim()
        };
        if f.dim() > m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: f.dim(),
            });
        }
        let x = f.resized(m);
        let xs = x.coeffs();
        if self.is_diagonal() {
            let u = self.unitary_at(m);
            return Ok(HardyVec::from_fn(m, |i| u[(i, i)] * xs[i].conj()));
        }
        Ok(HardyVec::from_fn(m, |i| {
            (0..m).map(|j| self.u[(i, j)] * xs[j].conj()).sum()
        }))
    }

    /// [f, g] = <f, C g>.
    pub fn bilinear(&self, f: &HardyVec, g: &HardyVec) -> Result<Complex64> {
        if f.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found: g.dim(),
            });
        }
        let cg = self.apply(g)?;
        f.resized(cg.dim()).inner(&cg)
    }

    /// ||T_N - [C T^* C]_N||_F / ||T_N||_F, where C T^* C acts as U T^T conj(U).
    pub fn csym_residual(&self, t: &OpMatrix) -> Result<f64> {
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: t.dim(),
            });
        }
        let n = self.dim;
        let rebuilt;
        let t = if self.is_diagonal() || t.working_dim() == self.working_dim() {
            t
        } else if t.working_dim() > self.working_dim() {
            rebuilt = t.truncated(self.working_dim());
            &rebuilt
        } else if let Some(f) = t.symbol() {
            rebuilt = comp_section_at(f, n, self.working_dim())?;
            &rebuilt
        } else {
            t
        };
        let m = t.working_dim();
        let u = self.unitary_at(m);
        let ubar_lead = u.columns(0, n).map(|z| z.conj());
        let inner = t.matrix().transpose() * ubar_lead;
        let reflected = u.rows(0, n) * inner;
        let section = t.section();
        let scale = frobenius(&section);
        if scale == 0.0 {
            return Ok(frobenius(&reflected));
        }
        Ok(frobenius(&(section - reflected)) / scale)
    }

    /// B_ij = [u_i, u_j].
    pub fn c_orthogonality(&self, family: &[HardyVec]) -> Result<COrthogonality> {
        let first = family.first().ok_or(Error::Empty)?;
        for f in family {
            if f.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: f.dim(),
                });
            }
        }
        let images: Vec<HardyVec> = family.iter().map(|f| self.apply(f)).collect::<Result<_>>()?;
        let k = family.len();
        let mut matrix = CMatrix::zeros(k, k);
        for i in 0..k {
            let ui = family[i].resized(images[i].dim());
            for j in 0..k {
                matrix[(i, j)] = ui.inner(&images[j])?;
            }
        }
        let mut max_off_diagonal = 0.0;
        let mut argmax = None;
        for i in 0..k {
            for j in 0..k {
                if i != j && matrix[(i, j)].norm() > max_off_diagonal {
                    max_off_diagonal = matrix[(i, j)].norm();
                    argmax = Some((i, j));
                }
            }
        }
        Ok(COrthogonality {
            matrix,
            max_off_diagonal,
            argmax,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct COrthogonality {
    pub matrix: CMatrix,
    pub max_off_diagonal: f64,
    /// Position of the largest off-diagonal entry.
    pub argmax: Option<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct ConjugationJson {
    #[serde(flatten)]
    kind: ConjugationKind,
    dim: usize,
    working_dim: usize,
    axioms: AxiomDefects,
    u: Vec<Complex64>,
}

impl Serialize for Conjugation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = self.working_dim();
        ConjugationJson {
            kind: self.kind,
            dim: self.dim,
            working_dim: m,
            axioms: self.axioms,
            u: (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .map(|(i, j)| self.u[(i, j)])
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Conjugation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ConjugationJson::deserialize(d)?;
        let m = raw.working_dim;
        if raw.u.len() != m * m || raw.dim == 0 || raw.dim > m {
            return Err(D::Error::custom("inconsistent conjugation dimensions"));
        }
        Ok(Conjugation {
            kind: raw.kind,
            dim: raw.dim,
            u: CMatrix::from_row_slice(m, m, &raw.u),
            axioms: raw.axioms,
        })
    }
}
