//! Figures of merit of a realized two-qubit gate against iSWAP.
//!
//! Computational ordering is `00, 01, 10, 11`, where `01` has Q2 excited and
//! `10` has Q1 excited.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transfer amplitudes below this leave the conditional phase undefined.
pub const MIN_TRANSFER_AMPLITUDE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateMetrics {
    /// `1 − |M[01,10]|²`.
    pub swap_error: f64,
    /// Average population leaving the computational subspace.
    pub leakage_l1: f64,
    /// `|δθ|` in radians; absent when a transfer amplitude vanishes.
    pub conditional_phase_error: Option<f64>,
    /// `δθ` wrapped to `(−π, π]`.
    pub conditional_phase_signed: Option<f64>,
    /// Average gate fidelity to iSWAP after optimal local Z corrections.
    pub fidelity: f64,
    pub hold_time_ns: f64,
}

pub fn ideal_iswap() -> Matrix4<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    Matrix4::new(one, o, o, o, o, o, i, o, o, i, o, o, o, o, o, one)
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Local-Z-invariant phase `θ00 + θ11 − θ(M[01,10]) − θ(M[10,01]) + π`, wrapped.
pub fn conditional_phase(m: &Matrix4<Complex64>) -> Result<f64> {
    let (t1, t2) = (m[(1, 2)], m[(2, 1)]);
    if t1.norm() < MIN_TRANSFER_AMPLITUDE || t2.norm() < MIN_TRANSFER_AMPLITUDE {
        return Err(Error::ill_defined(
            "conditional phase undefined: a transfer amplitude is below 1e-3",
            vec![("|M[01,10]|".into(), t1.norm()), ("|M[10,01]|".into(), t2.norm())],
        ));
    }
    Ok(wrap_angle(m[(0, 0)].arg() + m[(3, 3)].arg() - t1.arg() - t2.arg() + PI))
}

/// Average gate fidelity `(Tr(M̃†M̃) + |Tr(U†M̃)|²) / 20` maximized over the
/// local Z phases; these reduce to two angles `(x, y)` in
/// `|M00 + e^{i(x+y)} M11 − i e^{ix} M[01,10] − i e^{iy} M[10,01]|`.
pub fn iswap_fidelity(m: &Matrix4<Complex64>) -> f64 {
    let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let minus_i = Complex64::new(0.0, -1.0);
    let overlap = |x: f64, y: f64| {
        (m[(0, 0)]
            + Complex64::from_polar(1.0, x + y) * m[(3, 3)]
            + minus_i * Complex64::from_polar(1.0, x) * m[(1, 2)]
            + minus_i * Complex64::from_polar(1.0, y) * m[(2, 1)])
        .norm_sqr()
    };

    const GRID: usize = 32;
    let step = 2.0 * PI / GRID as f64;
    let (mut bx, mut by, mut best) = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..GRID {
        for j in 0..GRID {
            let (x, y) = (i as f64 * step, j as f64 * step);
            let v = overlap(x, y);
            if v > best {
                (bx, by, best) = (x, y, v);
            }
        }
    }
    // Compass search down to a step where the quadratic error is negligible.
    let mut h = step;
    while h > 1e-9 {
        let mut improved = false;
        for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let v = overlap(bx + dx, by + dy);
            if v > best {
                (bx, by, best) = (bx + dx, by + dy, v);
                improved = true;
                break;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (frob + best) / 20.0
}

pub fn gate_metrics(m: &Matrix4<Complex64>, hold_time_ns: f64) -> GateMetrics {
    let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let signed = conditional_phase(m).ok();
    GateMetrics {
        swap_error: (1.0 - m[(1, 2)].norm_sqr()).clamp(0.0, 1.0),
        leakage_l1: (1.0 - frob / 4.0).clamp(0.0, 1.0),
        conditional_phase_error: signed.map(f64::abs),
        conditional_phase_signed: signed,
        fidelity: iswap_fidelity(m).clamp(0.0, 1.0),
        hold_time_ns,
    }
}
