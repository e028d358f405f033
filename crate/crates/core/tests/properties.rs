use proptest::prelude::*;

use zzkit::dynamics::evolve::{unitarity_error, EvolveOptions, Propagator};
use zzkit::dynamics::PulseSchedule;
use zzkit::model::{build_hamiltonian, CouplingSpec, DeviceSpec, DriveSpec, ModeSpec};
use zzkit::spectrum::zz_strength;

fn device(w: [f64; 3], alpha: [f64; 3], g: [f64; 3], levels: usize, rwa: bool) -> DeviceSpec {
    DeviceSpec {
        modes: vec![
            ModeSpec::new("q1", w[0], alpha[0], levels),
            ModeSpec::new("c", w[1], alpha[1], levels),
            ModeSpec::new("q2", w[2], alpha[2], levels),
        ],
        couplings: vec![
            CouplingSpec::constant("q1", "c", g[0]),
            CouplingSpec::constant("c", "q2", g[1]),
            CouplingSpec::constant("q1", "q2", g[2]),
        ],
        rwa,
        energy_offset_ghz: 0.0,
    }
}

/// Dispersive three-mode devices with the coupler above both qubits.
fn arb_device(levels: usize) -> impl Strategy<Value = DeviceSpec> {
    (
        4.5f64..5.5,
        -0.3f64..0.3,
        6.2f64..8.5,
        -0.35f64..-0.2,
        -0.4f64..0.0,
        0.02f64..0.1,
        0.02f64..0.1,
        -0.01f64..0.01,
        any::<bool>(),
    )
        .prop_map(move |(w1, dw, wc, a, ac, g1, g2, g12, rwa)| {
            device([w1, wc, w1 + dw], [a, ac, a], [g1, g2, g12], levels, rwa)
        })
}

fn mirrored(spec: &DeviceSpec) -> DeviceSpec {
    let mut m = spec.clone();
    m.modes.swap(0, 2);
    m.modes[0].label = "q1".into();
    m.modes[2].label = "q2".into();
    let g = |a: &str, b: &str| {
        spec.couplings
            .iter()
            .find(|c| (c.mode_a == a && c.mode_b == b) || (c.mode_a == b && c.mode_b == a))
            .unwrap()
            .strength_ghz
    };
    m.couplings = vec![
        CouplingSpec::constant("q1", "c", g("q2", "c")),
        CouplingSpec::constant("c", "q2", g("q1", "c")),
        CouplingSpec::constant("q1", "q2", g("q1", "q2")),
    ];
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hamiltonian_is_hermitian(spec in arb_device(3)) {
        let h = build_hamiltonian(&spec).unwrap();
        prop_assert_eq!(h.hermiticity_deviation(), 0.0);
        prop_assert!(h.as_real().is_some());
    }

    #[test]
    fn zeta_ignores_energy_offset(spec in arb_device(3), offset in -20.0f64..20.0) {
        let z0 = zz_strength(&spec).unwrap().as_khz();
        let mut shifted = spec.clone();
        shifted.energy_offset_ghz = offset;
        let z1 = zz_strength(&shifted).unwrap().as_khz();
        prop_assert!((z1 - z0).abs() < 1e-3, "{} vs {}", z0, z1);
    }

    #[test]
    fn zeta_is_symmetric_under_qubit_exchange(spec in arb_device(3)) {
        let a = zz_strength(&spec).unwrap().as_khz();
        let b = zz_strength(&mirrored(&spec)).unwrap().as_khz();
        prop_assert!((a - b).abs() < 1e-3 + 1e-8 * a.abs(), "{} vs {}", a, b);
    }

    #[test]
    fn uncoupled_devices_have_no_zz(spec in arb_device(3)) {
        let mut s = spec;
        for c in &mut s.couplings {
            c.strength_ghz = 0.0;
        }
        prop_assert!(zz_strength(&s).unwrap().as_khz().abs() < 1e-6);
    }

    #[test]
    fn propagators_are_unitary(spec in arb_device(3), amp in 0.0f64..0.05, t in 1.0f64..10.0) {
        let drive = DriveSpec {
            target_mode: "q1".into(),
            amplitude_ghz: amp,
            frequency_ghz: spec.modes[2].bare_frequency_ghz,
            phase: 0.3,
        };
        let p = Propagator::new(&spec, &PulseSchedule::idle(t), &[drive], EvolveOptions::with_dt(0.01)).unwrap();
        let u = p.unitary(0.0, t).unwrap();
        prop_assert!(unitarity_error(&u) < 1e-8);
    }
}
