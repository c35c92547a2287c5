//! Complex-symmetry verdicts for linear fractional symbols, each backed by
//! numeric witnesses that can be run on request.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conjugations::{Conjugation, ConjugationKind};
use crate::eigensystems::gram_minimality_experiment;
use crate::error::{Error, Result};
use crate::moebius::{DiskMapClass, MapKind, Moebius, Order};
use crate::operators::{comp_matrix, comp_section, elliptic_sum, normality_residual};

pub const DEFAULT_DIM: usize = 64;
/// Normality residuals above this count as clearly non-normal.
pub const NON_NORMAL_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    ComplexSymmetricNormal,
    ComplexSymmetricOrderTwo,
    NotComplexSymmetric,
    UndeterminedFiniteOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    Above,
    /// The sequence does not increase and its last value is below
    /// `threshold` times its first.
    DecreasesBelowFraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub relation: Relation,
    pub threshold: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "params", rename_all = "snake_case")]
pub enum WitnessOp {
    NormalityResidual { dim: usize },
    CsymResidual { dim: usize, conjugation: ConjugationKind },
    EllipticSum { dim: usize },
    GramMinimality { dim: usize, t_grid: Vec<f64>, t_target: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(flatten)]
    pub op: WitnessOp,
    pub expectation: Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessOutcome {
    pub witness: Witness,
    /// The measured quantity; for sequences, the last value.
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CSVerdict {
    pub input: String,
    pub classification: DiskMapClass,
    pub verdict: VerdictKind,
    /// The statement the verdict rests on.
    pub claim: String,
    pub witnesses: Vec<Witness>,
}

fn normality_witness(dim: usize, expect_normal: bool) -> Witness {
    Witness {
        op: WitnessOp::NormalityResidual { dim },
        expectation: if expect_normal {
            Expectation {
                relation: Relation::Below,
                threshold: 1e-12,
                text: "the operator is normal".into(),
            }
        } else {
            Expectation {
                relation: Relation::Above,
                threshold: NON_NORMAL_FLOOR,
                text: "the operator is visibly non-normal".into(),
            }
        },
    }
}

fn gram_witness(dim: usize) -> Witness {
    Witness {
        op: WitnessOp::GramMinimality {
            dim,
            t_grid: (1..=32).map(|n| n as f64 / 8.0).collect(),
            t_target: 1.0 / 16.0,
        },
        expectation: Expectation {
            relation: Relation::DecreasesBelowFraction,
            threshold: 0.5,
            text: "the eigenvectors psi_t are approximately complete but not minimal".into(),
        },
    }
}

/// Decision table for complex symmetry of C_f.
pub fn decide(f: &Moebius) -> Result<CSVerdict> {
    decide_at(f, DEFAULT_DIM)
}

pub fn decide_at(f: &Moebius, dim: usize) -> Result<CSVerdict> {
    let class = f.classify()?;
    let (verdict, claim, witnesses) = match class.kind {
        MapKind::Rotation | MapKind::Identity => (
            VerdictKind::ComplexSymmetricNormal,
            "C_f is normal exactly when f(z) = beta z, and normal operators are complex symmetric",
            vec![
                normality_witness(dim, true),
                Witness {
                    op: WitnessOp::CsymResidual {
                        dim,
                        conjugation: ConjugationKind::Canonical,
                    },
                    expectation: Expectation {
                        relation: Relation::Below,
                        threshold: 1e-12,
                        text: "the diagonal matrix is symmetric".into(),
                    },
                },
            ],
        ),
        MapKind::InteriorAttractive => (
            VerdictKind::NotComplexSymmetric,
            "a complex symmetric C_f with an attractive interior fixed point must be normal, \
             so f would have to be a rotation",
            vec![normality_witness(dim, false)],
        ),
        MapKind::HyperbolicAutomorphism
        | MapKind::HyperbolicNonAutomorphism
        | MapKind::ParabolicAutomorphism => (
            VerdictKind::NotComplexSymmetric,
            "C_f is never complex symmetric for a hyperbolic symbol or a parabolic automorphism",
            vec![normality_witness(dim, false)],
        ),
        MapKind::ParabolicNonAutomorphism => (
            VerdictKind::NotComplexSymmetric,
            "for a parabolic non-automorphism the eigenvectors psi_t are complete but not minimal, \
             which no complex symmetric operator allows",
            vec![gram_witness(dim)],
        ),
        MapKind::EllipticAutomorphism => match class.order {
            Some(Order::Finite(2)) => {
                let alpha = f.eval(Complex64::new(0.0, 0.0));
                (
                    VerdictKind::ComplexSymmetricOrderTwo,
                    "an involutive disk automorphism phi_alpha induces a J_alpha-symmetric operator",
                    vec![Witness {
                        op: WitnessOp::CsymResidual {
                            dim,
                            conjugation: ConjugationKind::JAlpha { alpha },
                        },
                        expectation: Expectation {
                            relation: Relation::Below,
                            threshold: 1e-6,
                            text: "C_f is J_alpha-symmetric".into(),
                        },
                    }],
                )
            }
            Some(Order::Finite(_)) => (
                VerdictKind::UndeterminedFiniteOrder,
                "for finite order at least 3 only the sum of the iterates is known to be complex \
                 symmetric; individual cases are not decided",
                vec![Witness {
                    op: WitnessOp::EllipticSum { dim },
                    expectation: Expectation {
                        relation: Relation::Below,
                        threshold: 1e-4,
                        text: "T = sum of C_{f^[k]} satisfies T^2 = order * T".into(),
                    },
                }],
            ),
            _ => (
                VerdictKind::NotComplexSymmetric,
                "C_f is never complex symmetric for an elliptic automorphism of infinite order \
                 that is not a rotation",
                vec![normality_witness(dim, false)],
            ),
        },
    };
    Ok(CSVerdict {
        input: f.to_string(),
        classification: class,
        verdict,
        claim: claim.to_string(),
        witnesses,
    })
}

/// Runs one witness for symbol f.
pub fn run_witness(f: &Moebius, w: &Witness) -> Result<WitnessOutcome> {
    let (value, passed) = match &w.op {
        WitnessOp::NormalityResidual { dim } => {
            let t = if f.classify()?.kind == MapKind::Rotation {
                comp_matrix(f, *dim)?
            } else {
                comp_section(f, *dim)?
            };
            let v = normality_residual(&t);
            (v, compare(v, &w.expectation))
        }
        WitnessOp::CsymResidual { dim, conjugation } => {
            let c = Conjugation::build(*conjugation, *dim)?;
            let v = c.csym_residual(&comp_section(f, *dim)?)?;
            (v, compare(v, &w.expectation))
        }
        WitnessOp::EllipticSum { dim } => {
            let v = elliptic_sum(f, *dim)?.residual;
            (v, compare(v, &w.expectation))
        }
        WitnessOp::GramMinimality { dim, t_grid, t_target } => {
            let r = gram_minimality_experiment(f, t_grid, *t_target, *dim)?;
            let first = r.rows.first().ok_or(Error::Empty)?.distance;
            let last = r.rows.last().ok_or(Error::Empty)?.distance;
            let passed = match w.expectation.relation {
                Relation::DecreasesBelowFraction => {
                    r.nonincreasing && last < w.expectation.threshold * first
                }
                _ => compare(last, &w.expectation),
            };
            (last, passed)
        }
    };
    Ok(WitnessOutcome {
        witness: w.clone(),
        value,
        passed,
    })
}

fn compare(v: f64, e: &Expectation) -> bool {
    match e.relation {
        Relation::Below => v < e.threshold,
        Relation::Above => v > e.threshold,
        Relation::DecreasesBelowFraction => false,
    }
}
