//! Closed-form dispersive estimates of the qubit-qubit couplings.
//!
//! With `Δj = ω̃j − ω̃c` and `Δ12 = ω̃1 − ω̃2`, the static ZZ is the sum of
//! four fourth-order paths:
//!
//! ```text
//! ζ020 =  J020² / (Δ1 + Δ2 − αc)     J020 = √2 g1c g2c (1/Δ1 + 1/Δ2)
//! ζ200 =  J200² / (Δ12 − α2)         J200 = √2 (g12 + g1c g2c / Δ1)
//! ζ002 = −J002² / (Δ12 + α1)         J002 = √2 (g12 + g1c g2c / Δ2)
//! ζ1   =  4 g12 g1c g2c / (Δ1 Δ2)
//! ```
//!
//! Each effective coupling carries the coupler-mediated amplitude of its own
//! virtual path, `⟨020|V|011⟩⟨011|V|101⟩/Δ2 + ⟨020|V|110⟩⟨110|V|101⟩/Δ1`
//! for `J020` and the single-coupler path through `|110⟩` (`|011⟩`) for
//! `J200` (`J002`). This reproduces the exact rotating-wave fourth-order
//! coefficient, whereas the averaged-detuning form `√2 J` differs from it
//! whenever `Δ1 ≠ Δ2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DeviceSpec;
use crate::units::Frequency;

/// Denominators smaller than this flag the breakdown as near-singular.
pub const DEFAULT_GUARD_BAND: Frequency = Frequency::ghz(1e-3);

pub const DISPERSIVE_THRESHOLD: f64 = 0.1;
/// Upper edge of the quasi-dispersive band (g/|Δ| ≈ 1/4 sits inside it).
pub const QUASI_DISPERSIVE_THRESHOLD: f64 = 0.3;

/// Parameters of a `(Q1, Qc, Q2)` device, in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ThreeMode {
    w1: f64,
    wc: f64,
    w2: f64,
    a1: f64,
    ac: f64,
    a2: f64,
    g1c: f64,
    g2c: f64,
    g12: f64,
}

impl ThreeMode {
    fn from_spec(spec: &DeviceSpec) -> Result<Self> {
        spec.validate()?;
        if spec.modes.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "perturbative estimates need a three-mode (Q1, Qc, Q2) device, got {} modes",
                spec.modes.len()
            )));
        }
        let m = &spec.modes;
        Ok(ThreeMode {
            w1: m[0].bare_frequency_ghz,
            wc: m[1].bare_frequency_ghz,
            w2: m[2].bare_frequency_ghz,
            a1: m[0].anharmonicity_ghz,
            ac: m[1].anharmonicity_ghz,
            a2: m[2].anharmonicity_ghz,
            g1c: spec.coupling_between(0, 1).as_ghz(),
            g2c: spec.coupling_between(2, 1).as_ghz(),
            g12: spec.coupling_between(0, 2).as_ghz(),
        })
    }

    fn require_detuned(&self) -> Result<()> {
        if self.w1 == self.wc {
            return Err(Error::SingularParameter("Δ1 = 0: Q1 resonant with the coupler".into()));
        }
        if self.w2 == self.wc {
            return Err(Error::SingularParameter("Δ2 = 0: Q2 resonant with the coupler".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetuningSet {
    pub delta1: Frequency,
    pub delta2: Frequency,
    pub delta12: Frequency,
}

impl DetuningSet {
    pub fn from_spec(spec: &DeviceSpec) -> Result<Self> {
        let p = ThreeMode::from_spec(spec)?;
        Ok(DetuningSet {
            delta1: Frequency::ghz(p.w1 - p.wc),
            delta2: Frequency::ghz(p.w2 - p.wc),
            delta12: Frequency::ghz(p.w1 - p.w2),
        })
    }

    /// Harmonic-mean detuning, `1/Δ = (1/Δ1 + 1/Δ2) / 2`.
    pub fn delta_bar(&self) -> Result<Frequency> {
        let (d1, d2) = (self.delta1.as_ghz(), self.delta2.as_ghz());
        if d1 == 0.0 || d2 == 0.0 {
            return Err(Error::SingularParameter("a qubit is resonant with the coupler".into()));
        }
        if d1 + d2 == 0.0 {
            return Err(Error::SingularParameter("Δ1 + Δ2 = 0: averaged detuning diverges".into()));
        }
        Ok(Frequency::ghz(2.0 * d1 * d2 / (d1 + d2)))
    }
}

/// `J = g12 + g1c g2c / Δ` (rotating-wave).
pub fn xy_perturbative(spec: &DeviceSpec) -> Result<Frequency> {
    let p = ThreeMode::from_spec(spec)?;
    p.require_detuned()?;
    let inv = 0.5 * (1.0 / (p.w1 - p.wc) + 1.0 / (p.w2 - p.wc));
    Ok(Frequency::ghz(p.g12 + p.g1c * p.g2c * inv))
}

/// `J` including the counter-rotating virtual paths through `|1 1 1⟩`-type
/// states, `− g1c g2c (1/Σ1 + 1/Σ2)/2` with `Σj = ω̃j + ω̃c`.
pub fn xy_perturbative_counter_rotating(spec: &DeviceSpec) -> Result<Frequency> {
    let p = ThreeMode::from_spec(spec)?;
    let rwa = xy_perturbative(spec)?.as_ghz();
    let sum = 0.5 * (1.0 / (p.w1 + p.wc) + 1.0 / (p.w2 + p.wc));
    Ok(Frequency::ghz(rwa - p.g1c * p.g2c * sum))
}

/// The XY estimate consistent with the device's own coupling model.
pub fn xy_perturbative_for(spec: &DeviceSpec) -> Result<Frequency> {
    if spec.rwa {
        xy_perturbative(spec)
    } else {
        xy_perturbative_counter_rotating(spec)
    }
}

/// Fourth-order ZZ decomposition; all fields in MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZZBreakdown {
    pub zeta_020_mhz: f64,
    pub zeta_200_mhz: f64,
    pub zeta_002_mhz: f64,
    pub zeta_1_mhz: f64,
    pub total_mhz: f64,
    pub j020_mhz: f64,
    pub j200_mhz: f64,
    pub j002_mhz: f64,
    /// Denominators inside the guard band, by name.
    pub near_singular: Vec<String>,
}

impl ZZBreakdown {
    pub fn total(&self) -> Frequency {
        Frequency::mhz(self.total_mhz)
    }
}

pub fn zz_perturbative(spec: &DeviceSpec) -> Result<ZZBreakdown> {
    zz_perturbative_with_guard(spec, DEFAULT_GUARD_BAND)
}

pub fn zz_perturbative_with_guard(spec: &DeviceSpec, guard: Frequency) -> Result<ZZBreakdown> {
    let p = ThreeMode::from_spec(spec)?;
    p.require_detuned()?;
    let d1 = p.w1 - p.wc;
    let d2 = p.w2 - p.wc;
    let d12 = p.w1 - p.w2;

    let denominators = [
        ("Δ1 + Δ2 = αc: |101> resonant with |020>", d1 + d2 - p.ac),
        ("Δ12 = α2: straddling boundary, |101> resonant with |002>", d12 - p.a2),
        ("Δ12 = −α1: straddling boundary, |101> resonant with |200>", d12 + p.a1),
        ("Δ1 = 0: Q1 resonant with the coupler", d1),
        ("Δ2 = 0: Q2 resonant with the coupler", d2),
    ];
    let mut near_singular = Vec::new();
    for (name, value) in denominators {
        if value == 0.0 {
            return Err(Error::SingularParameter(name.to_string()));
        }
        if value.abs() < guard.as_ghz() {
            near_singular.push(name.to_string());
        }
    }

    let g = p.g1c * p.g2c;
    let j020 = std::f64::consts::SQRT_2 * g * (1.0 / d1 + 1.0 / d2);
    let j200 = std::f64::consts::SQRT_2 * (p.g12 + g / d1);
    let j002 = std::f64::consts::SQRT_2 * (p.g12 + g / d2);
    let zeta_020 = j020 * j020 / (d1 + d2 - p.ac);
    let zeta_200 = j200 * j200 / (d12 - p.a2);
    let zeta_002 = -j002 * j002 / (d12 + p.a1);
    let zeta_1 = 4.0 * p.g12 * g / (d1 * d2);

    let (z020, z200, z002, z1) = (zeta_020 * 1e3, zeta_200 * 1e3, zeta_002 * 1e3, zeta_1 * 1e3);
    Ok(ZZBreakdown {
        zeta_020_mhz: z020,
        zeta_200_mhz: z200,
        zeta_002_mhz: z002,
        zeta_1_mhz: z1,
        total_mhz: z020 + z200 + z002 + z1,
        j020_mhz: j020 * 1e3,
        j200_mhz: j200 * 1e3,
        j002_mhz: j002 * 1e3,
        near_singular,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// `g1c / |Δ1|`.
    pub ratio1: f64,
    /// `g2c / |Δ2|`.
    pub ratio2: f64,
    pub dispersive: bool,
    pub quasi_dispersive: bool,
    pub straddling: bool,
}

pub fn regime_check(spec: &DeviceSpec) -> Result<RegimeReport> {
    let p = ThreeMode::from_spec(spec)?;
    let ratio1 = p.g1c.abs() / (p.w1 - p.wc).abs();
    let ratio2 = p.g2c.abs() / (p.w2 - p.wc).abs();
    let worst = ratio1.max(ratio2);
    Ok(RegimeReport {
        ratio1,
        ratio2,
        dispersive: worst < DISPERSIVE_THRESHOLD,
        quasi_dispersive: (DISPERSIVE_THRESHOLD..QUASI_DISPERSIVE_THRESHOLD).contains(&worst),
        straddling: (p.w1 - p.w2).abs() < p.a1.abs().min(p.a2.abs()),
    })
}
