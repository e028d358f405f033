//! Frequency bookkeeping.
//!
//! Every number that crosses the public API is a linear frequency (ω/2π).
//! Internally the Hamiltonian is assembled in angular units (rad/ns), with
//! time in ns.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A linear frequency, stored in GHz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(f64);

impl Frequency {
    pub const ZERO: Frequency = Frequency(0.0);

    pub const fn ghz(value: f64) -> Self {
        Frequency(value)
    }

    pub fn mhz(value: f64) -> Self {
        Frequency(value * 1e-3)
    }

    pub fn khz(value: f64) -> Self {
        Frequency(value * 1e-6)
    }

    /// From angular frequency in rad/ns.
    pub fn from_angular(omega: f64) -> Self {
        Frequency(omega / TAU)
    }

    pub fn as_ghz(self) -> f64 {
        self.0
    }

    pub fn as_mhz(self) -> f64 {
        self.0 * 1e3
    }

    pub fn as_khz(self) -> f64 {
        self.0 * 1e6
    }

    /// Angular frequency in rad/ns.
    pub fn angular(self) -> f64 {
        self.0 * TAU
    }

    pub fn abs(self) -> Self {
        Frequency(self.0.abs())
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Add for Frequency {
    type Output = Frequency;
    fn add(self, rhs: Frequency) -> Frequency {
        Frequency(self.0 + rhs.0)
    }
}

impl Sub for Frequency {
    type Output = Frequency;
    fn sub(self, rhs: Frequency) -> Frequency {
        Frequency(self.0 - rhs.0)
    }
}

impl Neg for Frequency {
    type Output = Frequency;
    fn neg(self) -> Frequency {
        Frequency(-self.0)
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mhz = self.as_mhz();
        if mhz.abs() >= 1e3 {
            write!(f, "{} GHz", self.0)
        } else if mhz.abs() >= 1.0 || mhz == 0.0 {
            write!(f, "{} MHz", mhz)
        } else {
            write!(f, "{} kHz", self.as_khz())
        }
    }
}
