use thiserror::Error;

/// Errors raised by the numerical and classification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("input contains non-finite entries")]
    NonFinite,
    #[error("empty input")]
    Empty,
    #[error("matrix is numerically singular (sigma_min / sigma_max = {ratio:e})")]
    SingularInput { ratio: f64 },
    #[error("iteration did not converge after {iterations} steps (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },
    #[error("coefficients describe a constant map (ad - bc = 0)")]
    DegenerateResult,
    #[error("the identity map has no isolated fixed points")]
    IdentityMap,
    #[error("map is not a self-map of the unit disk: {0}")]
    NotSelfMap(String),
    #[error("classification is ambiguous between {first} and {second}: {detail}")]
    AmbiguousClass {
        first: String,
        second: String,
        detail: String,
    },
    #[error("map is not parabolic")]
    NotParabolic,
    #[error("map is not a parabolic non-automorphism")]
    NotParabolicNonAutomorphism,
    #[error("map is not an elliptic automorphism")]
    NotElliptic,
    #[error("map is not an elliptic automorphism of finite order >= 2")]
    NotFiniteOrderElliptic,
    #[error("map has no fixed point inside the unit disk")]
    NoInteriorFixedPoint,
    #[error("multiplier {modulus} at the interior fixed point is not in (0, 1)")]
    MultiplierNotAttractive { modulus: f64 },
    #[error("point {modulus} lies outside the open unit disk")]
    PointOutsideDisk { modulus: f64 },
    #[error("parameter must be in 0 < |alpha| < 1, got {modulus}")]
    AlphaOutOfRange { modulus: f64 },
    #[error("polar factor failed: {0}")]
    PolarFailure(Box<Error>),
    #[error("conjugation axioms violated: {0}")]
    ConjugationDefect(String),
    #[error("closed-form and iterated Koenigs functions disagree by {gap:e}")]
    KoenigsMismatch { gap: f64 },
    #[error("parameter must be non-negative, got {0}")]
    NegativeParameter(f64),
    #[error("target parameter {0} is already in the grid")]
    TargetInGrid(f64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
