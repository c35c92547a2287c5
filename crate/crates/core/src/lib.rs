//! Composition operators with linear fractional symbols on the Hardy space
//! H^2, truncated to the monomial basis.

pub mod conjugations;
pub mod eigensystems;
pub mod error;
pub mod hardy;
pub mod moebius;
pub mod numerics;
pub mod operators;
pub mod verdict;

pub use error::{Error, Result};
pub use hardy::HardyVec;
pub use moebius::{DiskMapClass, FixedPoint, MapKind, Moebius, Order, SpherePoint};
pub use numerics::CMatrix;
pub use operators::OpMatrix;
pub use conjugations::{Conjugation, ConjugationKind};
pub use verdict::{decide, CSVerdict, VerdictKind};
