//! Exact diagonalization, bare-state labeling and the coupling strengths
//! read off the labeled spectrum.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{self, DeviceSpec, HermitianOperator, HERMITICITY_TOLERANCE};
use crate::units::Frequency;

/// Assigned overlaps at or below this value mark a label as mixed. The
/// small margin keeps exact equal superpositions on the mixed side.
pub const MIXED_THRESHOLD: f64 = 0.5 + 1e-9;

/// Full eigendecomposition, energies ascending (rad/ns).
pub fn eigendecompose(h: &HermitianOperator) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let dev = h.hermiticity_deviation();
    if dev > HERMITICITY_TOLERANCE * h.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument(format!("operator is not Hermitian (deviation {dev:e})")));
    }
    Ok(match h.as_real() {
        Some(real) => {
            let (e, v) = linalg::eigh_real(&real);
            (e, linalg::to_complex(&v))
        }
        None => linalg::eigh_complex(h.matrix()),
    })
}

/// Bijective bare ↔ eigenstate assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    /// Eigenstate index assigned to each bare basis index.
    pub label_of: Vec<usize>,
    /// `|⟨bare|eigenstate⟩|²` of each assignment.
    pub overlap_of: Vec<f64>,
    pub mixed: bool,
}

/// Greedy maximum-overlap assignment over an overlap matrix with rows
/// indexed by bare states and columns by eigenstates.
pub fn label_from_overlaps(overlaps: &DMatrix<f64>) -> Labeling {
    let n = overlaps.nrows();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for e in 0..n {
        for b in 0..n {
            let w = overlaps[(b, e)];
            if w >= 1e-4 {
                candidates.push((w, b, e));
            }
        }
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut label_of = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let assign = |cands: &[(f64, usize, usize)], label_of: &mut Vec<usize>, taken: &mut Vec<bool>| {
        for &(_, b, e) in cands {
            if label_of[b] == usize::MAX && !taken[e] {
                label_of[b] = e;
                taken[e] = true;
            }
        }
    };
    assign(&candidates, &mut label_of, &mut taken);

    // Anything left over was below the candidate cutoff everywhere.
    if label_of.iter().any(|&e| e == usize::MAX) {
        let mut rest: Vec<(f64, usize, usize)> = Vec::new();
        for b in (0..n).filter(|&b| label_of[b] == usize::MAX) {
            for e in (0..n).filter(|&e| !taken[e]) {
                rest.push((overlaps[(b, e)], b, e));
            }
        }
        rest.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        assign(&rest, &mut label_of, &mut taken);
    }

    debug_assert!(taken.iter().all(|&t| t));
    let overlap_of: Vec<f64> = label_of.iter().enumerate().map(|(b, &e)| overlaps[(b, e)]).collect();
    let mixed = overlap_of.iter().any(|&w| w <= MIXED_THRESHOLD);
    Labeling {
        label_of,
        overlap_of,
        mixed,
    }
}

pub fn label_states(spec: &DeviceSpec, states: &DMatrix<Complex64>) -> Result<Labeling> {
    let dim = spec.dimension();
    if states.nrows() != dim || states.ncols() != dim {
        return Err(Error::InvalidArgument(format!(
            "expected a {dim}x{dim} eigenvector matrix, got {}x{}",
            states.nrows(),
            states.ncols()
        )));
    }
    Ok(label_from_overlaps(&states.map(|z| z.norm_sqr())))
}

/// Eigenpairs together with their bare-state labels.
#[derive(Debug, Clone)]
pub struct LabeledSpectrum {
    /// Angular frequencies, ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns.
    pub states: DMatrix<Complex64>,
    pub dims: Vec<usize>,
    pub labeling: Labeling,
}

impl LabeledSpectrum {
    pub fn from_hamiltonian(spec: &DeviceSpec, h: &HermitianOperator) -> Result<Self> {
        let (energies, states) = eigendecompose(h)?;
        let labeling = label_states(spec, &states)?;
        Ok(LabeledSpectrum {
            energies,
            states,
            dims: spec.dims(),
            labeling,
        })
    }

    /// Real symmetric fast path.
    pub fn from_real(dims: &[usize], h: &DMatrix<f64>) -> Self {
        let (energies, vectors) = linalg::eigh_real(h);
        let labeling = label_from_overlaps(&vectors.map(|x| x * x));
        LabeledSpectrum {
            energies,
            states: linalg::to_complex(&vectors),
            dims: dims.to_vec(),
            labeling,
        }
    }

    pub fn is_mixed(&self) -> bool {
        self.labeling.mixed
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        Ok(self.labeling.label_of[model::bare_index(&self.dims, occupations)?])
    }

    pub fn overlap_of(&self, occupations: &[usize]) -> Result<f64> {
        Ok(self.labeling.overlap_of[model::bare_index(&self.dims, occupations)?])
    }

    /// Energy (rad/ns) of the eigenstate labeled by `occupations`.
    pub fn energy(&self, occupations: &[usize]) -> Result<f64> {
        Ok(self.energies[self.index_of(occupations)?])
    }

    /// Fails with an ill-defined error unless every listed label is pure.
    pub fn require_pure(&self, labels: &[&[usize]]) -> Result<()> {
        let overlaps = self.overlaps(labels)?;
        if overlaps.iter().any(|(_, w)| *w <= MIXED_THRESHOLD) {
            return Err(Error::ill_defined(
                "dressed states cannot be assigned unambiguously to bare labels",
                overlaps,
            ));
        }
        Ok(())
    }

    pub fn overlaps(&self, labels: &[&[usize]]) -> Result<Vec<(String, f64)>> {
        labels
            .iter()
            .map(|occ| Ok((ket(occ), self.overlap_of(occ)?)))
            .collect()
    }

    /// Residual `max_k ‖H v_k − E_k v_k‖`.
    pub fn residual(&self, h: &HermitianOperator) -> f64 {
        let hv = h.matrix() * &self.states;
        (0..self.energies.len())
            .map(|k| (hv.column(k) - self.states.column(k) * Complex64::new(self.energies[k], 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

/// `|m n l⟩`-style label.
pub fn ket(occupations: &[usize]) -> String {
    let inner: Vec<String> = occupations.iter().map(|n| n.to_string()).collect();
    if occupations.iter().all(|&n| n < 10) {
        format!("|{}>", inner.join(""))
    } else {
        format!("|{}>", inner.join(","))
    }
}

/// The four computational labels `|0..0⟩, |1..0⟩, |0..1⟩, |1..1⟩` with the
/// qubits at the first and last mode.
pub fn computational_labels(n_modes: usize) -> [Vec<usize>; 4] {
    let mut e1 = vec![0; n_modes];
    e1[0] = 1;
    let mut e2 = vec![0; n_modes];
    e2[n_modes - 1] = 1;
    let mut e12 = e1.clone();
    e12[n_modes - 1] = 1;
    [vec![0; n_modes], e1, e2, e12]
}

pub fn labeled_spectrum(spec: &DeviceSpec) -> Result<LabeledSpectrum> {
    let h = model::build_real_hamiltonian(spec)?;
    Ok(LabeledSpectrum::from_real(&spec.dims(), &h))
}

/// `ζ = (E101 − E100) − (E001 − E000)` from a labeled spectrum.
pub fn zz_from_spectrum(spectrum: &LabeledSpectrum) -> Result<Frequency> {
    let [g, e1, e2, e12] = computational_labels(spectrum.dims.len());
    spectrum.require_pure(&[&g, &e1, &e2, &e12])?;
    let zeta = (spectrum.energy(&e12)? - spectrum.energy(&e1)?) - (spectrum.energy(&e2)? - spectrum.energy(&g)?);
    Ok(Frequency::from_angular(zeta))
}

pub fn zz_strength(spec: &DeviceSpec) -> Result<Frequency> {
    zz_from_spectrum(&labeled_spectrum(spec)?)
}

/// The two single-excitation eigenstates with the largest combined weight on
/// the qubit states `|10..0⟩` and `|0..01⟩`, ordered by energy.
fn qubit_like_pair(spectrum: &LabeledSpectrum) -> Result<(usize, usize)> {
    let [_, e1, e2, _] = computational_labels(spectrum.dims.len());
    let i1 = model::bare_index(&spectrum.dims, &e1)?;
    let i2 = model::bare_index(&spectrum.dims, &e2)?;
    let mut weights: Vec<(f64, usize)> = (0..spectrum.energies.len())
        .map(|k| (spectrum.states[(i1, k)].norm_sqr() + spectrum.states[(i2, k)].norm_sqr(), k))
        .collect();
    weights.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let (w_a, a) = weights[0];
    let (w_b, b) = weights[1];
    let w_c = weights.get(2).map_or(0.0, |w| w.0);
    if w_b <= MIXED_THRESHOLD || w_c >= 0.5 * w_b {
        return Err(Error::ill_defined(
            "qubit-like single-excitation pair is ambiguous (coupler-like state intrudes)",
            vec![
                (format!("eigenstate {a}"), w_a),
                (format!("eigenstate {b}"), w_b),
                ("third-largest".to_string(), w_c),
            ],
        ));
    }
    Ok(if spectrum.energies[a] <= spectrum.energies[b] { (a, b) } else { (b, a) })
}

/// Half the splitting of the qubit-like single-excitation pair.
pub fn xy_from_spectrum(spectrum: &LabeledSpectrum) -> Result<Frequency> {
    let (a, b) = qubit_like_pair(spectrum)?;
    Ok(Frequency::from_angular(0.5 * (spectrum.energies[b] - spectrum.energies[a]).abs()))
}

pub fn xy_strength_resonant(spec: &DeviceSpec) -> Result<Frequency> {
    xy_from_spectrum(&labeled_spectrum(spec)?)
}

/// `ζ = E101 + E000 − (E_a + E_b)` with `a, b` the qubit-like pair. Agrees
/// with the labeled definition away from resonance and stays defined on it.
pub fn zz_resonant_from_spectrum(spectrum: &LabeledSpectrum) -> Result<Frequency> {
    let [g, _, _, e12] = computational_labels(spectrum.dims.len());
    spectrum.require_pure(&[&g, &e12])?;
    let (a, b) = qubit_like_pair(spectrum)?;
    let zeta = spectrum.energy(&e12)? + spectrum.energy(&g)? - spectrum.energies[a] - spectrum.energies[b];
    Ok(Frequency::from_angular(zeta))
}

pub fn zz_strength_resonant(spec: &DeviceSpec) -> Result<Frequency> {
    zz_resonant_from_spectrum(&labeled_spectrum(spec)?)
}

/// Dressed qubit frequencies `(E100 − E000, E001 − E000)`.
pub fn dressed_from_spectrum(spectrum: &LabeledSpectrum) -> Result<(Frequency, Frequency)> {
    let [g, e1, e2, _] = computational_labels(spectrum.dims.len());
    spectrum.require_pure(&[&g, &e1, &e2])?;
    let e0 = spectrum.energy(&g)?;
    Ok((
        Frequency::from_angular(spectrum.energy(&e1)? - e0),
        Frequency::from_angular(spectrum.energy(&e2)? - e0),
    ))
}

pub fn dressed_frequencies(spec: &DeviceSpec) -> Result<(Frequency, Frequency)> {
    dressed_from_spectrum(&labeled_spectrum(spec)?)
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub zeta_MHz: f64,
    pub j_MHz: Option<f64>,
    pub omega1_GHz: f64,
    pub omega2_GHz: f64,
    pub mixed: bool,
    pub overlaps: BTreeMap<String, f64>,
}

/// ζ, dressed frequencies and, on resonance, J.
///
/// When the single-excitation labels are mixed but `|000⟩` and `|101⟩` are
/// not, the qubits are treated as resonant: ζ and J come from the qubit-like
/// pair and the dressed frequencies are that pair's energies.
pub fn coupling_report(spec: &DeviceSpec) -> Result<CouplingReport> {
    let spectrum = labeled_spectrum(spec)?;
    let labels = computational_labels(spec.modes.len());
    let refs: Vec<&[usize]> = labels.iter().map(|v| v.as_slice()).collect();
    let overlaps: BTreeMap<String, f64> = spectrum.overlaps(&refs)?.into_iter().collect();
    let single_mixed =
        spectrum.overlap_of(&labels[1])? <= MIXED_THRESHOLD || spectrum.overlap_of(&labels[2])? <= MIXED_THRESHOLD;
    let mixed = overlaps.values().any(|&w| w <= MIXED_THRESHOLD);

    if !single_mixed {
        let zeta = zz_from_spectrum(&spectrum)?;
        let (w1, w2) = dressed_from_spectrum(&spectrum)?;
        let j = xy_from_spectrum(&spectrum).ok().filter(|_| is_resonant(spec));
        return Ok(CouplingReport {
            zeta_MHz: zeta.as_mhz(),
            j_MHz: j.map(Frequency::as_mhz),
            omega1_GHz: w1.as_ghz(),
            omega2_GHz: w2.as_ghz(),
            mixed,
            overlaps,
        });
    }

    let zeta = zz_resonant_from_spectrum(&spectrum)?;
    let j = xy_from_spectrum(&spectrum)?;
    let (a, b) = qubit_like_pair(&spectrum)?;
    let e0 = spectrum.energy(&labels[0])?;
    Ok(CouplingReport {
        zeta_MHz: zeta.as_mhz(),
        j_MHz: Some(j.as_mhz()),
        omega1_GHz: Frequency::from_angular(spectrum.energies[a] - e0).as_ghz(),
        omega2_GHz: Frequency::from_angular(spectrum.energies[b] - e0).as_ghz(),
        mixed,
        overlaps,
    })
}

/// Bare qubit detuning below 1 MHz counts as resonant.
pub fn is_resonant(spec: &DeviceSpec) -> bool {
    let (q1, q2) = spec.qubit_modes();
    (spec.modes[q1].bare_frequency_ghz - spec.modes[q2].bare_frequency_ghz).abs() < 1e-3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{presets, CouplingSpec, ModeSpec};
    use approx::assert_relative_eq;

    fn two_transmons(g: f64) -> DeviceSpec {
        DeviceSpec {
            modes: vec![ModeSpec::new("q1", 5.1, -0.3, 5), ModeSpec::new("q2", 4.9, -0.3, 5)],
            couplings: vec![CouplingSpec::constant("q1", "q2", g)],
            rwa: false,
            energy_offset_ghz: 0.0,
        }
    }

    #[test]
    fn uncoupled_labels_are_identity() {
        let spec = presets::straddling_pair(6.0, 0.0, -0.2, 3).with_coupling(0, 1, Frequency::ZERO).with_coupling(1, 2, Frequency::ZERO);
        let s = labeled_spectrum(&spec).unwrap();
        assert!(!s.is_mixed());
        assert!(s.labeling.overlap_of.iter().all(|&w| (w - 1.0).abs() < 1e-12));
        assert!(zz_from_spectrum(&s).unwrap().as_khz().abs() < 1e-6);
    }

    #[test]
    fn resonant_pair_is_mixed() {
        let spec = DeviceSpec {
            modes: vec![ModeSpec::new("q1", 5.0, 0.0, 2), ModeSpec::new("q2", 5.0, 0.0, 2)],
            couplings: vec![CouplingSpec::constant("q1", "q2", 0.01)],
            rwa: true,
            energy_offset_ghz: 0.0,
        };
        let s = labeled_spectrum(&spec).unwrap();
        assert!(s.is_mixed());
        assert_relative_eq!(s.overlap_of(&[1, 0]).unwrap(), 0.5, epsilon = 1e-12);
        assert!(matches!(zz_from_spectrum(&s), Err(Error::IllDefined { .. })));
        assert_relative_eq!(xy_from_spectrum(&s).unwrap().as_mhz(), 10.0, epsilon = 1e-9);
    }

    #[test]
    fn dispersive_computational_overlaps_exceed_ninety_percent() {
        let s = labeled_spectrum(&presets::straddling_pair(7.5, 3.0, 0.0, 5)).unwrap();
        for occ in computational_labels(3) {
            assert!(s.overlap_of(&occ).unwrap() > 0.9);
        }
    }

    /// Fourth-order two-transmon ZZ (non-RWA, including counter-rotating
    /// second-order shifts of the doubly excited level) as oracle.
    fn two_transmon_zz_oracle(w1: f64, w2: f64, a1: f64, a2: f64, g: f64) -> f64 {
        let d = w1 - w2;
        2.0 * g * g * (1.0 / (d - a2) - 1.0 / (d + a1))
    }

    #[test]
    fn two_transmon_zz_matches_oracle() {
        let zeta = zz_strength(&two_transmons(0.010)).unwrap().as_ghz();
        let oracle = two_transmon_zz_oracle(5.1, 4.9, -0.3, -0.3, 0.010);
        assert!(((zeta - oracle) / oracle).abs() < 0.10, "zeta {zeta} oracle {oracle}");
    }

    #[test]
    fn dressed_shift_matches_two_level_oracle() {
        let g = 0.010;
        let (w1, w2) = dressed_frequencies(&two_transmons(g)).unwrap();
        let shift = g * g / 0.2;
        assert!(((w1.as_ghz() - 5.1) - shift).abs() < 0.15 * shift);
        assert!(((w2.as_ghz() - 4.9) + shift).abs() < 0.15 * shift);
        let (b1, b2) = dressed_frequencies(&two_transmons(0.0)).unwrap();
        assert_relative_eq!(b1.as_ghz(), 5.1, epsilon = 1e-12);
        assert_relative_eq!(b2.as_ghz(), 4.9, epsilon = 1e-12);
    }

    #[test]
    fn eigen_residual_is_small() {
        let spec = presets::straddling_pair(6.0, 6.5, 0.0, 5);
        let h = model::build_hamiltonian(&spec).unwrap();
        let s = LabeledSpectrum::from_hamiltonian(&spec, &h).unwrap();
        let scale = h.max_abs() * (spec.dimension() as f64).sqrt();
        assert!(s.residual(&h) < 1e-10 * scale);
    }

    #[test]
    fn zz_is_symmetric_under_qubit_exchange() {
        let spec = presets::straddling_pair(6.3, 4.0, -0.2, 5);
        let mut swapped = spec.clone();
        swapped.modes.reverse();
        let z = zz_strength(&spec).unwrap().as_khz();
        let zs = zz_strength(&swapped).unwrap().as_khz();
        assert!((z - zs).abs() < 1e-3, "{z} vs {zs}");
    }

    #[test]
    fn resonant_and_labeled_zz_agree_off_resonance() {
        let spec = presets::straddling_pair(7.0, 2.0, -0.3, 5);
        let a = zz_strength(&spec).unwrap().as_khz();
        let b = zz_strength_resonant(&spec).unwrap().as_khz();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn idle_point_of_iswap_device() {
        let (w1, w2) = dressed_frequencies(&presets::iswap_pair(12.0, 5)).unwrap();
        let split = (w1 - w2).as_mhz();
        assert!((split - 50.0).abs() < 10.0, "dressed splitting {split} MHz");
    }

    #[test]
    fn report_on_resonance_carries_j() {
        let mut spec = presets::iswap_pair(12.0, 4);
        spec.set_frequency(2, Frequency::ghz(6.5));
        let r = coupling_report(&spec).unwrap();
        assert!(r.j_MHz.unwrap() > 0.0);
    }
}
