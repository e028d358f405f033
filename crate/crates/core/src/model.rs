//! Device description and Hamiltonian assembly.
//!
//! The system is a chain of weakly anharmonic oscillators
//!
//! ```text
//! H = Σ_j [ ω̃_j n_j + (α_j/2) n_j(n_j − 1) ] + Σ_{j<k} g_jk (q_j + q_j†)(q_k + q_k†)
//! ```
//!
//! with the coupling replaced by `g_jk (q_j q_k† + q_j† q_k)` under the
//! rotating-wave approximation. Modes are embedded by Kronecker products in
//! declaration order, so for the canonical three-mode device `(Q1, Qc, Q2)`
//! the basis label `|m n l⟩` has the coupler occupation in the middle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Frequency;

/// Largest Hilbert-space dimension accepted by [`build_hamiltonian`].
pub const MAX_DIMENSION: usize = 4096;

/// Relative Hermiticity tolerance applied to assembled operators.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub label: String,
    /// Bare frequency ω̃/2π.
    pub bare_frequency_ghz: f64,
    /// Anharmonicity α/2π; negative for transmons, zero for a linear mode.
    pub anharmonicity_ghz: f64,
    pub n_levels: usize,
}

impl ModeSpec {
    pub fn new(label: &str, bare_frequency_ghz: f64, anharmonicity_ghz: f64, n_levels: usize) -> Self {
        ModeSpec {
            label: label.to_string(),
            bare_frequency_ghz,
            anharmonicity_ghz,
            n_levels,
        }
    }
}

/// How a coupling strength follows the frequency of its `mode_b` endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingScaling {
    #[default]
    Constant,
    /// `g = strength · sqrt(ω_b / reference)`, with `ω_b` the current bare
    /// frequency of `mode_b`.
    SqrtFrequency { reference_ghz: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub mode_a: String,
    pub mode_b: String,
    /// Coupling g/2π at the reference point.
    pub strength_ghz: f64,
    #[serde(default)]
    pub scaling: CouplingScaling,
}

impl CouplingSpec {
    pub fn constant(mode_a: &str, mode_b: &str, strength_ghz: f64) -> Self {
        CouplingSpec {
            mode_a: mode_a.to_string(),
            mode_b: mode_b.to_string(),
            strength_ghz,
            scaling: CouplingScaling::Constant,
        }
    }
}

fn default_rwa() -> bool {
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub modes: Vec<ModeSpec>,
    #[serde(default)]
    pub couplings: Vec<CouplingSpec>,
    #[serde(default = "default_rwa")]
    pub rwa: bool,
    /// Constant added to every energy. Physically inert.
    #[serde(default)]
    pub energy_offset_ghz: f64,
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidArgument("device has no modes".into()));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if m.label.is_empty() {
                return Err(Error::InvalidArgument(format!("modes[{i}].label is empty")));
            }
            if self.modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::InvalidArgument(format!("duplicate mode label '{}'", m.label)));
            }
            if m.n_levels < 2 {
                return Err(Error::InvalidArgument(format!(
                    "modes[{i}].n_levels must be >= 2, got {}",
                    m.n_levels
                )));
            }
            if m.anharmonicity_ghz != 0.0 && m.n_levels < 3 {
                return Err(Error::InvalidArgument(format!(
                    "modes[{i}].n_levels must be >= 3 for a nonzero anharmonicity"
                )));
            }
            if !(m.bare_frequency_ghz.is_finite() && m.bare_frequency_ghz > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "modes[{i}].bare_frequency_ghz must be positive and finite"
                )));
            }
            if !m.anharmonicity_ghz.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "modes[{i}].anharmonicity_ghz must be finite"
                )));
            }
        }
        for (k, c) in self.couplings.iter().enumerate() {
            let a = self.mode_index(&c.mode_a).ok_or_else(|| {
                Error::InvalidArgument(format!("couplings[{k}].mode_a: unknown mode '{}'", c.mode_a))
            })?;
            let b = self.mode_index(&c.mode_b).ok_or_else(|| {
                Error::InvalidArgument(format!("couplings[{k}].mode_b: unknown mode '{}'", c.mode_b))
            })?;
            if a == b {
                return Err(Error::InvalidArgument(format!(
                    "couplings[{k}] couples mode '{}' to itself",
                    c.mode_a
                )));
            }
            let dup = self.couplings[..k].iter().any(|o| {
                let (oa, ob) = (self.mode_index(&o.mode_a), self.mode_index(&o.mode_b));
                (oa, ob) == (Some(a), Some(b)) || (oa, ob) == (Some(b), Some(a))
            });
            if dup {
                return Err(Error::InvalidArgument(format!(
                    "couplings[{k}]: pair ('{}', '{}') declared twice",
                    c.mode_a, c.mode_b
                )));
            }
            if !c.strength_ghz.is_finite() {
                return Err(Error::InvalidArgument(format!("couplings[{k}].strength_ghz must be finite")));
            }
            if let CouplingScaling::SqrtFrequency { reference_ghz } = c.scaling {
                if !(reference_ghz.is_finite() && reference_ghz > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "couplings[{k}].scaling.reference_ghz must be positive"
                    )));
                }
            }
        }
        if !self.energy_offset_ghz.is_finite() {
            return Err(Error::InvalidArgument("energy_offset_ghz must be finite".into()));
        }
        let dim = self
            .modes
            .iter()
            .try_fold(1usize, |acc, m| acc.checked_mul(m.n_levels))
            .unwrap_or(usize::MAX);
        if dim > MAX_DIMENSION {
            return Err(Error::ResourceLimit(format!(
                "Hilbert dimension {dim} exceeds the cap of {MAX_DIMENSION}"
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.n_levels).collect()
    }

    pub fn dimension(&self) -> usize {
        self.modes.iter().map(|m| m.n_levels).product()
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.label == label)
    }

    pub fn require_mode(&self, label: &str) -> Result<usize> {
        self.mode_index(label)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown mode '{label}'")))
    }

    /// First and last modes: the two qubits of a `(Q1, ..., Q2)` chain.
    pub fn qubit_modes(&self) -> (usize, usize) {
        (0, self.modes.len() - 1)
    }

    /// The middle mode of a three-mode device.
    pub fn coupler_mode(&self) -> Option<usize> {
        (self.modes.len() == 3).then_some(1)
    }

    /// Effective strength of coupling `k` at the current mode frequencies.
    pub fn coupling_strength(&self, k: usize) -> Frequency {
        let c = &self.couplings[k];
        match c.scaling {
            CouplingScaling::Constant => Frequency::ghz(c.strength_ghz),
            CouplingScaling::SqrtFrequency { reference_ghz } => {
                let b = self.mode_index(&c.mode_b).expect("validated coupling endpoint");
                let wb = self.modes[b].bare_frequency_ghz;
                Frequency::ghz(c.strength_ghz * (wb / reference_ghz).sqrt())
            }
        }
    }

    /// Effective strength between two modes (zero when uncoupled).
    pub fn coupling_between(&self, a: usize, b: usize) -> Frequency {
        self.couplings
            .iter()
            .position(|c| {
                let (ia, ib) = (self.mode_index(&c.mode_a), self.mode_index(&c.mode_b));
                (ia, ib) == (Some(a), Some(b)) || (ia, ib) == (Some(b), Some(a))
            })
            .map(|k| self.coupling_strength(k))
            .unwrap_or(Frequency::ZERO)
    }

    pub fn set_frequency(&mut self, mode: usize, value: Frequency) {
        self.modes[mode].bare_frequency_ghz = value.as_ghz();
    }

    pub fn with_frequency(mut self, mode: usize, value: Frequency) -> Self {
        self.set_frequency(mode, value);
        self
    }

    /// Sets the base strength of the `(a, b)` coupling, inserting a constant
    /// coupling when the pair is not yet coupled.
    pub fn set_coupling(&mut self, a: usize, b: usize, strength: Frequency) {
        let (la, lb) = (self.modes[a].label.clone(), self.modes[b].label.clone());
        match self
            .couplings
            .iter_mut()
            .find(|c| (c.mode_a == la && c.mode_b == lb) || (c.mode_a == lb && c.mode_b == la))
        {
            Some(c) => c.strength_ghz = strength.as_ghz(),
            None => self.couplings.push(CouplingSpec::constant(&la, &lb, strength.as_ghz())),
        }
    }

    pub fn with_coupling(mut self, a: usize, b: usize, strength: Frequency) -> Self {
        self.set_coupling(a, b, strength);
        self
    }

    pub fn with_levels(mut self, n_levels: usize) -> Self {
        for m in &mut self.modes {
            m.n_levels = n_levels;
        }
        self
    }

    pub fn with_rwa(mut self, rwa: bool) -> Self {
        self.rwa = rwa;
        self
    }

    /// Row-major mixed-radix index of a bare occupation tuple.
    pub fn bare_index(&self, occupations: &[usize]) -> Result<usize> {
        bare_index(&self.dims(), occupations)
    }

    pub fn bare_occupations(&self, index: usize) -> Result<Vec<usize>> {
        bare_occupations(&self.dims(), index)
    }

    /// Index of the state with one excitation in `mode` and none elsewhere.
    pub fn single_excitation(&self, mode: usize) -> usize {
        let mut occ = vec![0; self.modes.len()];
        occ[mode] = 1;
        bare_index(&self.dims(), &occ).expect("n_levels >= 2")
    }
}

pub fn bare_index(dims: &[usize], occupations: &[usize]) -> Result<usize> {
    if occupations.len() != dims.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} occupations, got {}",
            dims.len(),
            occupations.len()
        )));
    }
    let mut index = 0;
    for (k, (&n, &d)) in occupations.iter().zip(dims).enumerate() {
        if n >= d {
            return Err(Error::InvalidArgument(format!(
                "occupation {n} of mode {k} exceeds n_levels {d}"
            )));
        }
        index = index * d + n;
    }
    Ok(index)
}

pub fn bare_occupations(dims: &[usize], index: usize) -> Result<Vec<usize>> {
    let total: usize = dims.iter().product();
    if index >= total {
        return Err(Error::InvalidArgument(format!(
            "index {index} outside a basis of dimension {total}"
        )));
    }
    let mut occ = vec![0; dims.len()];
    let mut rest = index;
    for (k, &d) in dims.iter().enumerate().rev() {
        occ[k] = rest % d;
        rest /= d;
    }
    Ok(occ)
}

/// Single-mode annihilation operator, `q[i, i+1] = sqrt(i+1)`.
pub fn lowering_operator(n_levels: usize) -> Result<DMatrix<f64>> {
    if n_levels < 2 {
        return Err(Error::InvalidArgument(format!("n_levels must be >= 2, got {n_levels}")));
    }
    Ok(DMatrix::from_fn(n_levels, n_levels, |i, j| {
        if j == i + 1 {
            (j as f64).sqrt()
        } else {
            0.0
        }
    }))
}

/// A dense Hermitian matrix in angular units (rad/ns).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<Complex64>,
}

impl HermitianOperator {
    /// Wraps `matrix` after checking the Hermiticity invariant.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument("operator matrix is not square".into()));
        }
        let op = HermitianOperator { matrix };
        let scale = op.max_abs();
        let dev = op.hermiticity_deviation();
        if dev > HERMITICITY_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian: max |H - H^†| = {dev:e} against max |H| = {scale:e}"
            )));
        }
        Ok(op)
    }

    pub fn from_real(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// The real part when every imaginary entry vanishes.
    pub fn as_real(&self) -> Option<DMatrix<f64>> {
        self.matrix
            .iter()
            .all(|z| z.im == 0.0)
            .then(|| self.matrix.map(|z| z.re))
    }
}

/// Real symmetric sparse operator stored as coordinate triples covering both
/// triangles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseTerm {
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseTerm {
    fn push(&mut self, r: usize, c: usize, v: f64) {
        self.rows.push(r as u32);
        self.cols.push(c as u32);
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn add_to_dense(&self, m: &mut DMatrix<f64>, scale: f64) {
        for k in 0..self.values.len() {
            m[(self.rows[k] as usize, self.cols[k] as usize)] += scale * self.values[k];
        }
    }

    /// Sum of |value| per row, used for spectral bounds.
    pub fn row_abs_sums(&self, out: &mut [f64], scale: f64) {
        for k in 0..self.values.len() {
            out[self.rows[k] as usize] += (scale * self.values[k]).abs();
        }
    }
}

fn ladder(n: usize, step: isize) -> Option<(usize, f64)> {
    match step {
        -1 if n > 0 => Some((n - 1, (n as f64).sqrt())),
        1 => Some((n + 1, ((n + 1) as f64).sqrt())),
        _ => None,
    }
}

/// Operator structure of a device: number and anharmonic diagonals per mode
/// and one sparse term per coupling. Parameter values are supplied at
/// assembly time, so a single instance serves a whole sweep or pulse.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dims: Vec<usize>,
    occupations: Vec<Vec<usize>>,
    couplings: Vec<(usize, usize)>,
    coupling_terms: Vec<SparseTerm>,
}

impl OperatorBasis {
    pub fn new(spec: &DeviceSpec) -> Result<Self> {
        spec.validate()?;
        let dims = spec.dims();
        let dim = spec.dimension();
        let occupations = (0..dim)
            .map(|i| bare_occupations(&dims, i))
            .collect::<Result<Vec<_>>>()?;
        let mut couplings = Vec::new();
        let mut coupling_terms = Vec::new();
        for c in &spec.couplings {
            let a = spec.require_mode(&c.mode_a)?;
            let b = spec.require_mode(&c.mode_b)?;
            couplings.push((a, b));
            let steps: &[(isize, isize)] = if spec.rwa {
                &[(1, -1), (-1, 1)]
            } else {
                &[(1, -1), (-1, 1), (1, 1), (-1, -1)]
            };
            let mut term = SparseTerm::default();
            for (i, occ) in occupations.iter().enumerate() {
                for &(sa, sb) in steps {
                    let (Some((na, va)), Some((nb, vb))) = (ladder(occ[a], sa), ladder(occ[b], sb)) else {
                        continue;
                    };
                    if na >= dims[a] || nb >= dims[b] {
                        continue;
                    }
                    let mut target = occ.clone();
                    target[a] = na;
                    target[b] = nb;
                    term.push(bare_index(&dims, &target)?, i, va * vb);
                }
            }
            coupling_terms.push(term);
        }
        Ok(OperatorBasis {
            dims,
            occupations,
            couplings,
            coupling_terms,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dimension(&self) -> usize {
        self.occupations.len()
    }

    pub fn occupations(&self, index: usize) -> &[usize] {
        &self.occupations[index]
    }

    pub fn coupling_terms(&self) -> &[SparseTerm] {
        &self.coupling_terms
    }

    pub fn coupling_modes(&self) -> &[(usize, usize)] {
        &self.couplings
    }

    /// Position operator `q + q†` of one mode.
    pub fn quadrature(&self, mode: usize) -> SparseTerm {
        let mut term = SparseTerm::default();
        for (i, occ) in self.occupations.iter().enumerate() {
            for s in [-1, 1] {
                if let Some((n, v)) = ladder(occ[mode], s) {
                    if n < self.dims[mode] {
                        let mut target = occ.clone();
                        target[mode] = n;
                        term.push(bare_index(&self.dims, &target).expect("in range"), i, v);
                    }
                }
            }
        }
        term
    }

    /// Diagonal of H in rad/ns.
    pub fn diagonal(&self, params: &DeviceParams) -> Vec<f64> {
        let (frequencies, anharmonicities) = (&params.frequencies, &params.anharmonicities);
        self.occupations
            .iter()
            .map(|occ| {
                let e: f64 = params.energy_offset
                    + occ
                    .iter()
                    .enumerate()
                    .map(|(k, &n)| {
                        let n = n as f64;
                        frequencies[k] * n + 0.5 * anharmonicities[k] * n * (n - 1.0)
                    })
                    .sum::<f64>();
                Frequency::ghz(e).angular()
            })
            .collect()
    }

    /// Dense real H in rad/ns.
    pub fn dense(&self, params: &DeviceParams) -> DMatrix<f64> {
        let dim = self.dimension();
        let diag = self.diagonal(params);
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        debug_assert_eq!(h.nrows(), dim);
        for (term, &g) in self.coupling_terms.iter().zip(&params.strengths) {
            term.add_to_dense(&mut h, Frequency::ghz(g).angular());
        }
        h
    }
}

/// Instantaneous device parameters in GHz.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    pub frequencies: Vec<f64>,
    pub anharmonicities: Vec<f64>,
    /// Effective coupling strengths, ordered as `DeviceSpec::couplings`.
    pub strengths: Vec<f64>,
    pub energy_offset: f64,
}

impl DeviceParams {
    pub fn from_spec(spec: &DeviceSpec) -> Self {
        DeviceParams {
            frequencies: spec.modes.iter().map(|m| m.bare_frequency_ghz).collect(),
            anharmonicities: spec.modes.iter().map(|m| m.anharmonicity_ghz).collect(),
            strengths: (0..spec.couplings.len())
                .map(|k| spec.coupling_strength(k).as_ghz())
                .collect(),
            energy_offset: spec.energy_offset_ghz,
        }
    }
}

/// Full Hamiltonian as a real symmetric matrix in rad/ns.
pub fn build_real_hamiltonian(spec: &DeviceSpec) -> Result<DMatrix<f64>> {
    let basis = OperatorBasis::new(spec)?;
    Ok(basis.dense(&DeviceParams::from_spec(spec)))
}

pub fn build_hamiltonian(spec: &DeviceSpec) -> Result<HermitianOperator> {
    HermitianOperator::from_real(&build_real_hamiltonian(spec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub target_mode: String,
    /// Drive amplitude Ω_d/2π.
    pub amplitude_ghz: f64,
    /// Carrier ω_d/2π.
    pub frequency_ghz: f64,
    #[serde(default)]
    pub phase: f64,
}

/// `H_d(t) = Ω_d cos(ω_d t + φ) (q + q†)` on the target mode.
#[derive(Debug, Clone)]
pub struct DriveOperator {
    pub mode: usize,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    pub quadrature: SparseTerm,
}

impl DriveOperator {
    /// Scalar prefactor `Ω_d cos(ω_d t + φ)` in rad/ns.
    pub fn coefficient(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t + self.phase).cos()
    }


    pub fn dense_at(&self, t: f64, dim: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        self.quadrature.add_to_dense(&mut m, self.coefficient(t));
        m
    }

    pub fn at(&self, t: f64, dim: usize) -> HermitianOperator {
        HermitianOperator::from_real(&self.dense_at(t, dim)).expect("real symmetric by construction")
    }
}

pub fn drive_operator(spec: &DeviceSpec, drive: &DriveSpec) -> Result<DriveOperator> {
    let basis = OperatorBasis::new(spec)?;
    drive_operator_with(&basis, spec, drive)
}

pub(crate) fn drive_operator_with(
    basis: &OperatorBasis,
    spec: &DeviceSpec,
    drive: &DriveSpec,
) -> Result<DriveOperator> {
    let mode = spec.require_mode(&drive.target_mode)?;
    if !(drive.amplitude_ghz >= 0.0 && drive.amplitude_ghz.is_finite()) {
        return Err(Error::InvalidArgument("drive amplitude must be >= 0".into()));
    }
    if !drive.frequency_ghz.is_finite() || !drive.phase.is_finite() {
        return Err(Error::InvalidArgument("drive frequency and phase must be finite".into()));
    }
    Ok(DriveOperator {
        mode,
        amplitude: Frequency::ghz(drive.amplitude_ghz).angular(),
        omega: Frequency::ghz(drive.frequency_ghz).angular(),
        phase: drive.phase,
        quadrature: basis.quadrature(mode),
    })
}

/// Parameter sets used throughout the examples and acceptance checks.
pub mod presets {
    use super::*;

    /// Fixed-frequency qubits at 5.114 / 4.914 GHz (straddling, α = −330 MHz)
    /// coupled through a tunable coupler with g1c = 98 MHz, g2c = 83 MHz.
    pub fn straddling_pair(coupler_ghz: f64, g12_mhz: f64, coupler_anharmonicity_mhz: f64, n_levels: usize) -> DeviceSpec {
        DeviceSpec {
            modes: vec![
                ModeSpec::new("q1", 5.114, -0.330, n_levels),
                ModeSpec::new("c", coupler_ghz, coupler_anharmonicity_mhz * 1e-3, n_levels),
                ModeSpec::new("q2", 4.914, -0.330, n_levels),
            ],
            couplings: vec![
                CouplingSpec::constant("q1", "c", 0.098),
                CouplingSpec::constant("c", "q2", 0.083),
                CouplingSpec::constant("q1", "q2", g12_mhz * 1e-3),
            ],
            rwa: false,
            energy_offset_ghz: 0.0,
        }
    }

    /// Tunable-coupler iSWAP device at its idle point: Q1 at 6.5 GHz, Q2 idling
    /// at 6.45 GHz, coupler at 8.70 GHz, with qubit-coupler couplings
    /// 125 and 130 MHz scaled as sqrt(ω_c / 6.5 GHz).
    pub fn iswap_pair(g12_mhz: f64, n_levels: usize) -> DeviceSpec {
        let sqrt_scaling = CouplingScaling::SqrtFrequency { reference_ghz: 6.5 };
        DeviceSpec {
            modes: vec![
                ModeSpec::new("q1", 6.5, -0.25, n_levels),
                ModeSpec::new("c", 8.70, -0.40, n_levels),
                ModeSpec::new("q2", 6.45, -0.25, n_levels),
            ],
            couplings: vec![
                CouplingSpec {
                    mode_a: "q1".into(),
                    mode_b: "c".into(),
                    strength_ghz: 0.125,
                    scaling: sqrt_scaling,
                },
                CouplingSpec {
                    mode_a: "q2".into(),
                    mode_b: "c".into(),
                    strength_ghz: 0.130,
                    scaling: sqrt_scaling,
                },
                CouplingSpec::constant("q1", "q2", g12_mhz * 1e-3),
            ],
            rwa: false,
            energy_offset_ghz: 0.0,
        }
    }
}
