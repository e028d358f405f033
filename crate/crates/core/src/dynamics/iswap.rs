//! Diabatic iSWAP: flux pulses on the coupler and on Q2 bring the qubits into
//! resonance for a hold time, and the realized computational block is scored
//! against iSWAP.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::brent::BrentOpt;
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evolve::{EvolveOptions, Propagator};
use super::metrics::{gate_metrics, GateMetrics};
use super::pulse::{FlatTopPulse, PulseSchedule};
use crate::error::{Error, Result};
use crate::model::DeviceSpec;
use crate::spectrum::{self, computational_labels, LabeledSpectrum};
use crate::units::Frequency;

pub const DEFAULT_RISE_TIME_NS: f64 = 5.66;

fn default_rise() -> f64 {
    DEFAULT_RISE_TIME_NS
}

/// Where Q2 is parked during the interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum QubitTarget {
    /// A bare frequency taken as given.
    Bare { frequency_ghz: f64 },
    /// The bare Q2 frequency that minimizes the splitting of the qubit-like
    /// pair at the interaction point, shifted by `offset_mhz`.
    Dressed {
        #[serde(default)]
        offset_mhz: f64,
    },
}

impl Default for QubitTarget {
    fn default() -> Self {
        QubitTarget::Dressed { offset_mhz: 0.0 }
    }
}

/// Pulse parameters of one gate; idle values come from the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IswapTemplate {
    pub coupler_interaction_ghz: f64,
    #[serde(default)]
    pub qubit_target: QubitTarget,
    #[serde(default = "default_rise")]
    pub rise_time_ns: f64,
    pub hold_time_ns: f64,
}

impl IswapTemplate {
    pub fn with_hold(mut self, hold_time_ns: f64) -> Self {
        self.hold_time_ns = hold_time_ns;
        self
    }

    /// Replaces a dressed target by the bare frequency it resolves to.
    pub fn resolved(mut self, spec: &DeviceSpec) -> Result<Self> {
        if let QubitTarget::Dressed { offset_mhz } = self.qubit_target {
            let (w2, _) = dressed_resonance(spec, Frequency::ghz(self.coupler_interaction_ghz))?;
            self.qubit_target = QubitTarget::Bare {
                frequency_ghz: (w2 + Frequency::mhz(offset_mhz)).as_ghz(),
            };
        }
        Ok(self)
    }

    pub fn schedule(&self, spec: &DeviceSpec) -> Result<PulseSchedule> {
        let coupler = spec
            .coupler_mode()
            .ok_or_else(|| Error::InvalidArgument("iSWAP schedules need a (Q1, Qc, Q2) device".into()))?;
        let (_, q2) = spec.qubit_modes();
        let target = match self.resolved(spec)?.qubit_target {
            QubitTarget::Bare { frequency_ghz } => frequency_ghz,
            QubitTarget::Dressed { .. } => unreachable!("resolved above"),
        };
        let pulse = |idle: f64, interaction: f64| FlatTopPulse {
            idle_value: idle,
            interaction_value: interaction,
            rise_time_ns: self.rise_time_ns,
            hold_time_ns: self.hold_time_ns,
            start_time_ns: 0.0,
        };
        PulseSchedule::from_pulses(vec![
            (coupler, pulse(spec.modes[coupler].bare_frequency_ghz, self.coupler_interaction_ghz)),
            (q2, pulse(spec.modes[q2].bare_frequency_ghz, target)),
        ])
    }
}

/// Bare Q2 frequency minimizing the qubit-like splitting with the coupler at
/// `coupler`, and the resulting J.
pub fn dressed_resonance(spec: &DeviceSpec, coupler: Frequency) -> Result<(Frequency, Frequency)> {
    let c = spec
        .coupler_mode()
        .ok_or_else(|| Error::InvalidArgument("dressed targeting needs a (Q1, Qc, Q2) device".into()))?;
    let (q1, q2) = spec.qubit_modes();
    let base = spec.clone().with_frequency(c, coupler);
    let w1 = base.modes[q1].bare_frequency_ghz;

    struct Splitting {
        base: DeviceSpec,
        q2: usize,
    }
    impl CostFunction for Splitting {
        type Param = f64;
        type Output = f64;
        fn cost(&self, w2: &f64) -> std::result::Result<f64, argmin::core::Error> {
            let s = self.base.clone().with_frequency(self.q2, Frequency::ghz(*w2));
            Ok(spectrum::xy_strength_resonant(&s).map(|j| j.as_ghz()).unwrap_or(f64::INFINITY))
        }
    }
    let solver = BrentOpt::new(w1 - 0.15, w1 + 0.15).set_tolerance(1e-12, 1e-12);
    let res = Executor::new(Splitting { base: base.clone(), q2 }, solver)
        .configure(|s| s.max_iters(200))
        .run()
        .map_err(|e| Error::IntegratorFailure(format!("dressed resonance search failed: {e}")))?;
    let w2 = *res.state().get_best_param().expect("brent keeps a best point");
    let j = spectrum::xy_strength_resonant(&base.with_frequency(q2, Frequency::ghz(w2)))?;
    Ok((Frequency::ghz(w2), j))
}

/// Computational block of one gate together with per-input leakage.
#[derive(Debug, Clone, PartialEq)]
pub struct GateResult {
    /// `M[i, j] = ⟨d_i|U|d_j⟩ e^{i E_i T}` over the idle dressed states.
    pub matrix: Matrix4<Complex64>,
    pub leakage: [f64; 4],
    pub duration_ns: f64,
}

/// Idle dressed computational states and energies, ordered `00, 01, 10, 11`.
pub fn computational_basis(spec: &DeviceSpec) -> Result<(DMatrix<Complex64>, [f64; 4])> {
    let s = spectrum::labeled_spectrum(spec)?;
    computational_from_spectrum(&s)
}

fn computational_from_spectrum(s: &LabeledSpectrum) -> Result<(DMatrix<Complex64>, [f64; 4])> {
    let [g, e1, e2, e12] = computational_labels(s.dims.len());
    s.require_pure(&[&g, &e1, &e2, &e12])?;
    // 01 has Q2 excited, 10 has Q1 excited.
    let order = [&g, &e2, &e1, &e12];
    let mut cols = DMatrix::zeros(s.states.nrows(), 4);
    let mut energies = [0.0; 4];
    for (k, occ) in order.iter().enumerate() {
        let idx = s.index_of(occ)?;
        cols.set_column(k, &s.states.column(idx));
        energies[k] = s.energies[idx];
    }
    Ok((cols, energies))
}

pub fn iswap_unitary(spec: &DeviceSpec, schedule: &PulseSchedule, options: EvolveOptions) -> Result<GateResult> {
    let (basis, energies) = computational_basis(spec)?;
    let prop = Propagator::new(spec, schedule, &[], options)?;
    let mut states = basis.clone();
    prop.advance(&mut states, 0.0, schedule.duration_ns)?;
    let overlaps = basis.adjoint() * states;
    let t = schedule.duration_ns;
    let matrix = Matrix4::from_fn(|i, j| overlaps[(i, j)] * Complex64::from_polar(1.0, energies[i] * t));
    let mut leakage = [0.0; 4];
    for (j, l) in leakage.iter_mut().enumerate() {
        *l = 1.0 - matrix.column(j).norm_squared();
    }
    Ok(GateResult {
        matrix,
        leakage,
        duration_ns: t,
    })
}

/// Simulates one gate and scores it.
pub fn run_gate(spec: &DeviceSpec, template: &IswapTemplate, options: EvolveOptions) -> Result<GateMetrics> {
    let schedule = template.schedule(spec)?;
    let gate = iswap_unitary(spec, &schedule, options)?;
    Ok(gate_metrics(&gate.matrix, template.hold_time_ns))
}

/// One metrics record per hold time, in input order.
pub fn hold_scan(spec: &DeviceSpec, template: &IswapTemplate, holds: &[f64], options: EvolveOptions) -> Result<Vec<GateMetrics>> {
    let resolved = template.resolved(spec)?;
    holds
        .par_iter()
        .map(|&h| run_gate(spec, &resolved.with_hold(h), options))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Q2 detuning from the dressed resonance.
    pub offset_mhz: f64,
    pub hold_time_ns: f64,
    pub metrics: GateMetrics,
}

/// Minimizes the swap error over the Q2 offset from dressed resonance and
/// the hold time, starting from `template`.
pub fn calibrate_swap(spec: &DeviceSpec, template: &IswapTemplate, options: EvolveOptions) -> Result<Calibration> {
    let (w2, _) = dressed_resonance(spec, Frequency::ghz(template.coupler_interaction_ghz))?;
    let start_offset = match template.qubit_target {
        QubitTarget::Dressed { offset_mhz } => offset_mhz,
        QubitTarget::Bare { frequency_ghz } => (Frequency::ghz(frequency_ghz) - w2).as_mhz(),
    };
    let gate_at = |offset_mhz: f64, hold: f64| -> Result<GateMetrics> {
        let t = IswapTemplate {
            qubit_target: QubitTarget::Bare {
                frequency_ghz: (w2 + Frequency::mhz(offset_mhz)).as_ghz(),
            },
            hold_time_ns: hold.max(0.0),
            ..*template
        };
        run_gate(spec, &t, options)
    };

    struct SwapError<'a> {
        gate: &'a (dyn Fn(f64, f64) -> Result<GateMetrics> + Sync),
    }
    impl CostFunction for SwapError<'_> {
        type Param = Vec<f64>;
        type Output = f64;
        fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
            (self.gate)(p[0], p[1])
                .map(|m| m.swap_error)
                .map_err(|e| argmin::core::Error::msg(e.to_string()))
        }
    }

    let h0 = template.hold_time_ns;
    let simplex = vec![
        vec![start_offset, h0],
        vec![start_offset + 0.5, h0],
        vec![start_offset, h0 + 0.1 * h0.max(5.0)],
    ];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-12)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let res = Executor::new(SwapError { gate: &gate_at }, solver)
        .configure(|s| s.max_iters(120))
        .run()
        .map_err(|e| Error::IntegratorFailure(format!("swap calibration failed: {e}")))?;
    let best = res.state().get_best_param().expect("simplex keeps a best point").clone();
    let metrics = gate_at(best[0], best[1])?;
    Ok(Calibration {
        offset_mhz: best[0],
        hold_time_ns: best[1].max(0.0),
        metrics,
    })
}

/// Residual error left in the doubly excited manifold once the swap is
/// calibrated: leakage plus the infidelity a pure conditional phase δθ
/// would cause, `L1 + δθ² / 20`.
pub fn synchronization_residual(m: &GateMetrics) -> f64 {
    let dtheta = m.conditional_phase_error.unwrap_or(std::f64::consts::PI);
    m.leakage_l1 + dtheta * dtheta / 20.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synchronization {
    pub g12_mhz: f64,
    pub residual: f64,
    pub calibration: Calibration,
}

/// Direct coupling that synchronizes swap and conditional-phase errors.
///
/// `device(g12_mhz)` builds the device at its idle point. Each candidate is
/// swap-calibrated; the residual of [`synchronization_residual`] is minimized
/// by Brent's method inside `bracket_mhz`.
pub fn synchronize_g12<D>(
    device: D,
    template: &IswapTemplate,
    bracket_mhz: (f64, f64),
    tolerance_mhz: f64,
    options: EvolveOptions,
) -> Result<Synchronization>
where
    D: Fn(f64) -> DeviceSpec + Sync,
{
    if !(bracket_mhz.0 < bracket_mhz.1) {
        return Err(Error::InvalidArgument("g12 bracket must be increasing".into()));
    }
    let evaluate = |g12: f64| -> Result<Calibration> { calibrate_swap(&device(g12), template, options) };

    struct Residual<'a> {
        evaluate: &'a (dyn Fn(f64) -> Result<Calibration> + Sync),
    }
    impl CostFunction for Residual<'_> {
        type Param = f64;
        type Output = f64;
        fn cost(&self, g12: &f64) -> std::result::Result<f64, argmin::core::Error> {
            (self.evaluate)(*g12)
                .map(|c| synchronization_residual(&c.metrics))
                .map_err(|e| argmin::core::Error::msg(e.to_string()))
        }
    }
    let width = bracket_mhz.1 - bracket_mhz.0;
    let solver = BrentOpt::new(bracket_mhz.0, bracket_mhz.1).set_tolerance(tolerance_mhz / width, tolerance_mhz * 0.1);
    let res = Executor::new(Residual { evaluate: &evaluate }, solver)
        .configure(|s| s.max_iters(40))
        .run()
        .map_err(|e| Error::IntegratorFailure(format!("g12 synchronization failed: {e}")))?;
    let g12 = *res.state().get_best_param().expect("brent keeps a best point");
    let calibration = evaluate(g12)?;
    Ok(Synchronization {
        g12_mhz: g12,
        residual: synchronization_residual(&calibration.metrics),
        calibration,
    })
}
