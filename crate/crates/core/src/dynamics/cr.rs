//! Cross-resonance estimate of the XY coupling.
//!
//! Q1 is driven at the dressed frequency of Q2 with Q1 in its ground state.
//! Q2 then Rabi-oscillates at `J Ω_d / Δ12`, so the oscillation period `T`
//! yields `J = Δ12 / (T Ω_d)` in linear units.
//!
//! The drive is periodic, so the evolution is sampled stroboscopically: the
//! one-period propagator is built once and raised to integer powers.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::brent::BrentOpt;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::evolve::{EvolveOptions, Integrator, Propagator, DEFAULT_DRIVEN_DT_NS};
use super::pulse::PulseSchedule;
use crate::error::{Error, Result};
use crate::model::{DeviceSpec, DriveSpec};
use crate::spectrum;
use crate::units::Frequency;

/// Sinusoid amplitudes below this count as no oscillation.
pub const MIN_CONTRAST: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrOptions {
    pub dt_ns: f64,
    /// Approximate number of trace samples.
    pub samples: usize,
    #[serde(default)]
    pub integrator: Integrator,
}

impl Default for CrOptions {
    fn default() -> Self {
        CrOptions {
            dt_ns: DEFAULT_DRIVEN_DT_NS,
            samples: 2000,
            integrator: Integrator::Eigen,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrResult {
    pub times_ns: Vec<f64>,
    /// Population with at least one excitation in Q2.
    pub target_population: Vec<f64>,
    pub period_ns: Option<f64>,
    pub j_estimate_mhz: Option<f64>,
    /// Fitted sinusoid amplitude.
    pub contrast: f64,
    pub delta12_mhz: f64,
    pub drive: DriveSpec,
}

impl CrResult {
    pub fn resolved(&self) -> bool {
        self.j_estimate_mhz.is_some()
    }
}

/// A drive on Q1 at the dressed Q2 frequency.
pub fn cr_drive(spec: &DeviceSpec, amplitude: Frequency) -> Result<DriveSpec> {
    let (_, w2) = spectrum::dressed_frequencies(spec)?;
    let (q1, _) = spec.qubit_modes();
    Ok(DriveSpec {
        target_mode: spec.modes[q1].label.clone(),
        amplitude_ghz: amplitude.as_ghz(),
        frequency_ghz: w2.as_ghz(),
        phase: 0.0,
    })
}

fn matrix_power(u: &DMatrix<Complex64>, mut k: usize) -> DMatrix<Complex64> {
    let n = u.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = u.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn cr_period(spec: &DeviceSpec, drive: &DriveSpec, duration_ns: f64, options: CrOptions) -> Result<CrResult> {
    if !(drive.frequency_ghz > 0.0) {
        return Err(Error::InvalidArgument("cross-resonance drive frequency must be positive".into()));
    }
    if !(duration_ns > 0.0 && duration_ns.is_finite()) {
        return Err(Error::InvalidArgument("duration must be positive".into()));
    }
    if options.samples < 8 {
        return Err(Error::InvalidArgument("at least 8 trace samples are needed".into()));
    }
    let labeled = spectrum::labeled_spectrum(spec)?;
    let (w1, w2) = spectrum::dressed_from_spectrum(&labeled)?;
    let ground = labeled.states.column(labeled.index_of(&vec![0; spec.modes.len()])?).into_owned();

    let drive_period = 1.0 / drive.frequency_ghz;
    let prop = Propagator::new(
        spec,
        &PulseSchedule::idle(drive_period),
        std::slice::from_ref(drive),
        EvolveOptions {
            dt_ns: options.dt_ns,
            integrator: options.integrator,
        },
    )?;
    let floquet = prop.unitary(0.0, drive_period)?;
    let stride = ((duration_ns / drive_period) / options.samples as f64).floor().max(1.0) as usize;
    let step = matrix_power(&floquet, stride);
    let sample_dt = stride as f64 * drive_period;
    let count = (duration_ns / sample_dt).floor() as usize;

    let (_, q2) = spec.qubit_modes();
    let excited: Vec<usize> = (0..spec.dimension())
        .filter(|&i| prop.basis().occupations(i)[q2] >= 1)
        .collect();
    let population = |psi: &DVector<Complex64>| excited.iter().map(|&i| psi[i].norm_sqr()).sum::<f64>();

    let mut psi = ground;
    let mut times = Vec::with_capacity(count + 1);
    let mut pops = Vec::with_capacity(count + 1);
    times.push(0.0);
    pops.push(population(&psi));
    for n in 1..=count {
        psi = &step * psi;
        times.push(n as f64 * sample_dt);
        pops.push(population(&psi));
    }

    let fit = fit_sinusoid(&times, &pops);
    let delta12 = w1 - w2;
    let (period, j) = match fit {
        Some(f) if f.amplitude >= MIN_CONTRAST && drive.amplitude_ghz > 0.0 => {
            let period = 1.0 / f.frequency_ghz;
            let j = delta12.as_ghz().abs() / (period * drive.amplitude_ghz);
            (Some(period), Some(Frequency::ghz(j).as_mhz()))
        }
        _ => (None, None),
    };
    Ok(CrResult {
        times_ns: times,
        target_population: pops,
        period_ns: period,
        j_estimate_mhz: j,
        contrast: fit.map_or(0.0, |f| f.amplitude),
        delta12_mhz: delta12.as_mhz(),
        drive: drive.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub frequency_ghz: f64,
    pub offset: f64,
    pub amplitude: f64,
}

/// Least squares `c0 + c1 cos ωt + c2 sin ωt` at fixed ω; returns the
/// residual sum of squares and the coefficients.
fn linear_fit(t: &[f64], y: &[f64], omega: f64) -> (f64, Vector3<f64>) {
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for (&ti, &yi) in t.iter().zip(y) {
        let (s, c) = (omega * ti).sin_cos();
        let row = Vector3::new(1.0, c, s);
        ata += row * row.transpose();
        aty += row * yi;
    }
    let coeffs = ata.lu().solve(&aty).unwrap_or_else(Vector3::zeros);
    let rss = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let (s, c) = (omega * ti).sin_cos();
            let r = yi - (coeffs[0] + coeffs[1] * c + coeffs[2] * s);
            r * r
        })
        .sum();
    (rss, coeffs)
}

/// Single-tone fit: coarse frequency scan between half an oscillation per
/// record and the sampling Nyquist limit, then Brent refinement.
pub fn fit_sinusoid(t: &[f64], y: &[f64]) -> Option<SinusoidFit> {
    let n = t.len();
    if n < 8 {
        return None;
    }
    let span = t[n - 1] - t[0];
    let dt = span / (n - 1) as f64;
    let f_lo = 0.5 / span;
    let f_hi = 0.5 / dt * 0.98;
    if !(f_hi > f_lo) {
        return None;
    }
    let df = 0.1 / span;
    let count = ((f_hi - f_lo) / df).ceil() as usize + 1;
    let tau = std::f64::consts::TAU;
    let mut best = (f64::INFINITY, f_lo);
    for k in 0..count {
        let f = f_lo + k as f64 * df;
        let (rss, _) = linear_fit(t, y, tau * f);
        if rss < best.0 {
            best = (rss, f);
        }
    }

    struct Rss<'a> {
        t: &'a [f64],
        y: &'a [f64],
    }
    impl CostFunction for Rss<'_> {
        type Param = f64;
        type Output = f64;
        fn cost(&self, f: &f64) -> std::result::Result<f64, argmin::core::Error> {
            Ok(linear_fit(self.t, self.y, std::f64::consts::TAU * f).0)
        }
    }
    let lo = (best.1 - df).max(0.5 * f_lo);
    let hi = best.1 + df;
    let solver = BrentOpt::new(lo, hi).set_tolerance(1e-12, 1e-15);
    let f = Executor::new(Rss { t, y }, solver)
        .configure(|s| s.max_iters(200))
        .run()
        .ok()
        .and_then(|r| r.state().get_best_param().copied())
        .filter(|f| linear_fit(t, y, tau * f).0 <= best.0)
        .unwrap_or(best.1);
    let (_, c) = linear_fit(t, y, tau * f);
    Some(SinusoidFit {
        frequency_ghz: f,
        offset: c[0],
        amplitude: (c[1] * c[1] + c[2] * c[2]).sqrt(),
    })
}
