//! Physical constants and the angular-frequency newtype.
//!
//! Angular quantities cross the file boundary in Hz (`*_hz` keys) and are used
//! internally in rad/s. [`AngularFrequency`] holds both views so that the
//! factor of 2π is applied in exactly one place.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Reduced Planck constant ħ in J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Unified atomic mass unit in kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// An angular frequency. Stored as cycles per second so that values read from
/// `*_hz` keys are written back bit-for-bit.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub const fn from_hz(hz: f64) -> Self {
        Self(hz)
    }

    pub fn from_rad_per_s(omega: f64) -> Self {
        Self(omega / TAU)
    }

    pub const fn hz(self) -> f64 {
        self.0
    }

    pub fn rad_per_s(self) -> f64 {
        self.0 * TAU
    }
}

impl fmt::Display for AngularFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2π×{} Hz", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hz_is_exact_and_rad_applies_tau() {
        let w = AngularFrequency::from_hz(12.642_812e9);
        assert_eq!(w.hz(), 12.642_812e9);
        assert_eq!(w.rad_per_s(), 12.642_812e9 * TAU);
    }
}
