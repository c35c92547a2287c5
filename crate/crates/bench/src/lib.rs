//! Fixture symbols shared by the benchmarks.

use hardylab_core::Moebius;
use num_complex::Complex64;

pub fn involution() -> Moebius {
    Moebius::disk_involution(Complex64::new(0.5, 0.0)).expect("|alpha| < 1")
}

/// z / (2 - z), attractive at 0 with multiplier 1/2.
pub fn attractive() -> Moebius {
    Moebius::from_real(1.0, 0.0, -1.0, 2.0).expect("non-degenerate")
}

/// phi_0.5 o 0.3 e^{i} z o phi_0.5.
pub fn attractive_off_center() -> Moebius {
    let p = involution();
    let m = Moebius::linear(Complex64::from_polar(0.3, 1.0)).expect("non-degenerate");
    p.compose(&m).and_then(|g| g.compose(&p)).expect("non-degenerate")
}
