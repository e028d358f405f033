//! Gaussian flat-top pulses and the schedules built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeviceParams, DeviceSpec};

/// 10 %–90 % rise time of an error-function edge in units of σ,
/// `2 √2 erf⁻¹(0.8)`.
pub const RISE_PER_SIGMA: f64 = 2.563_103_131_089_201;

/// Padding on each side of the plateau, in σ. `Φ(−5) ≈ 2.9e-7`, so the pulse
/// sits at idle to below 1e-6 of its excursion outside the padded window.
pub const EDGE_SIGMAS: f64 = 5.0;

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatTopPulse {
    pub idle_value: f64,
    pub interaction_value: f64,
    pub rise_time_ns: f64,
    /// Full width at half maximum of the envelope.
    pub hold_time_ns: f64,
    #[serde(default)]
    pub start_time_ns: f64,
}

impl FlatTopPulse {
    pub fn validate(&self) -> Result<()> {
        if !(self.rise_time_ns > 0.0 && self.rise_time_ns.is_finite()) {
            return Err(Error::InvalidArgument("rise_time_ns must be positive".into()));
        }
        if !(self.hold_time_ns >= 0.0 && self.hold_time_ns.is_finite()) {
            return Err(Error::InvalidArgument("hold_time_ns must be >= 0".into()));
        }
        if !self.start_time_ns.is_finite() || !self.idle_value.is_finite() || !self.interaction_value.is_finite() {
            return Err(Error::InvalidArgument("pulse parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.rise_time_ns / RISE_PER_SIGMA
    }

    /// Midpoint of the rising edge.
    pub fn t_a(&self) -> f64 {
        self.start_time_ns + EDGE_SIGMAS * self.sigma()
    }

    /// Midpoint of the falling edge.
    pub fn t_b(&self) -> f64 {
        self.t_a() + self.hold_time_ns
    }

    pub fn end_time(&self) -> f64 {
        self.t_b() + EDGE_SIGMAS * self.sigma()
    }

    /// Envelope `s(t) = Φ((t − t_a)/σ) − Φ((t − t_b)/σ)`.
    pub fn envelope(&self, t: f64) -> f64 {
        let sigma = self.sigma();
        std_normal_cdf((t - self.t_a()) / sigma) - std_normal_cdf((t - self.t_b()) / sigma)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.idle_value + (self.interaction_value - self.idle_value) * self.envelope(t)
    }
}

pub fn flattop_value(pulse: &FlatTopPulse, t: f64) -> f64 {
    pulse.value(t)
}

/// Mode-frequency trajectories over `[0, duration]`. Couplings follow the
/// instantaneous frequencies through each coupling's scaling rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    /// `(mode index, frequency pulse in GHz)`.
    pub trajectories: Vec<(usize, FlatTopPulse)>,
    pub duration_ns: f64,
}

impl PulseSchedule {
    /// No trajectories: the device stays at its idle point.
    pub fn idle(duration_ns: f64) -> Self {
        PulseSchedule {
            trajectories: Vec::new(),
            duration_ns,
        }
    }

    /// Duration covers every pulse including its padding.
    pub fn from_pulses(trajectories: Vec<(usize, FlatTopPulse)>) -> Result<Self> {
        let mut duration: f64 = 0.0;
        for (_, p) in &trajectories {
            p.validate()?;
            duration = duration.max(p.end_time());
        }
        Ok(PulseSchedule {
            trajectories,
            duration_ns: duration,
        })
    }

    pub fn validate(&self, spec: &DeviceSpec) -> Result<()> {
        if !(self.duration_ns >= 0.0 && self.duration_ns.is_finite()) {
            return Err(Error::InvalidArgument("schedule duration must be >= 0".into()));
        }
        for (mode, p) in &self.trajectories {
            if *mode >= spec.modes.len() {
                return Err(Error::InvalidArgument(format!("schedule references mode {mode}")));
            }
            p.validate()?;
        }
        Ok(())
    }

    pub fn is_static(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Device with every scheduled mode moved to its value at `t`.
    pub fn spec_at(&self, spec: &DeviceSpec, t: f64) -> DeviceSpec {
        let mut s = spec.clone();
        for (mode, p) in &self.trajectories {
            s.modes[*mode].bare_frequency_ghz = p.value(t);
        }
        s
    }

    pub fn params_at(&self, spec: &DeviceSpec, t: f64) -> DeviceParams {
        DeviceParams::from_spec(&self.spec_at(spec, t))
    }
}
