//! Parameter-plane scans over coupler frequency and direct coupling, zero-ZZ
//! root finding in `g12`, and continuation of the zero-ZZ branches.
//!
//! The coupler is the middle mode; `g12` is the coupling between the first
//! and last modes. ZZ values are reported in kHz, XY values in MHz.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DeviceSpec;
use crate::perturbation;
use crate::spectrum;
use crate::units::Frequency;

/// Cells with `|ζ|` below this are masked (kHz).
pub const DEFAULT_MASK_KHZ: f64 = 20.0;
/// Root acceptance tolerance on `|ζ|` (kHz).
pub const DEFAULT_ROOT_TOLERANCE_KHZ: f64 = 0.1;
/// Bisection stops once the bracket is narrower than this (MHz).
pub const DEFAULT_MIN_INTERVAL_MHZ: f64 = 1e-3;
/// Coarse scan step for sign changes (MHz).
pub const DEFAULT_SCAN_STEP_MHZ: f64 = 0.1;
/// |ζ| below this is diagonalization round-off (kHz).
pub const ZETA_FLOOR_KHZ: f64 = 1e-6;
/// Largest g12 jump bridged by continuation between columns (MHz).
pub const DEFAULT_JUMP_MHZ: f64 = 2.5;

/// Evenly spaced samples `start, start + step, ...` up to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    /// A one-point axis.
    pub fn point(value: f64) -> Self {
        Self::new(value, value, 1.0)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name}: axis values must be finite")));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidArgument(format!("{name}: step must be > 0")));
        }
        if self.start > self.stop {
            return Err(Error::InvalidArgument(format!("{name}: start must not exceed stop")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Samples computed as `start + i·step` so that reruns are bit-identical.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Labeled exact ζ (kHz).
    ZetaExact,
    /// Fourth-order ζ (kHz).
    ZetaPerturbative,
    /// Perturbative J consistent with the device's RWA flag (MHz).
    JPerturbative,
    /// Half the qubit-like single-excitation splitting (MHz).
    JResonant,
    /// ζ from the qubit-like pair, defined on resonance (kHz).
    ZetaResonant,
}

impl Quantity {
    pub fn is_zz(self) -> bool {
        matches!(self, Quantity::ZetaExact | Quantity::ZetaPerturbative | Quantity::ZetaResonant)
    }

    /// Evaluates the quantity for one device.
    pub fn evaluate(self, spec: &DeviceSpec) -> Result<f64> {
        Ok(match self {
            Quantity::ZetaExact => spectrum::zz_strength(spec)?.as_khz(),
            Quantity::ZetaPerturbative => perturbation::zz_perturbative(spec)?.total().as_khz(),
            Quantity::JPerturbative => perturbation::xy_perturbative_for(spec)?.as_mhz(),
            Quantity::JResonant => spectrum::xy_strength_resonant(spec)?.as_mhz(),
            Quantity::ZetaResonant => spectrum::zz_strength_resonant(spec)?.as_khz(),
        })
    }
}

fn default_mask() -> f64 {
    DEFAULT_MASK_KHZ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Coupler frequency axis (GHz).
    pub wc_axis: Axis,
    /// Direct coupling axis (MHz).
    pub g12_axis: Axis,
    pub quantity: Quantity,
    #[serde(default = "default_mask")]
    pub mask_threshold_khz: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.wc_axis.validate("wc_axis")?;
        self.g12_axis.validate("g12_axis")?;
        if self.wc_axis.start <= 0.0 {
            return Err(Error::InvalidArgument("wc_axis: coupler frequency must be > 0".into()));
        }
        if !(self.mask_threshold_khz >= 0.0) {
            return Err(Error::InvalidArgument("mask_threshold_khz must be >= 0".into()));
        }
        Ok(())
    }
}

/// Copy of `base` with the coupler at `wc` GHz and `g12` MHz between the qubits.
pub fn device_at(base: &DeviceSpec, wc_ghz: f64, g12_mhz: f64) -> Result<DeviceSpec> {
    let coupler = base
        .coupler_mode()
        .ok_or_else(|| Error::InvalidArgument("sweeps need a three-mode device with a coupler".into()))?;
    let (q1, q2) = base.qubit_modes();
    Ok(base
        .clone()
        .with_frequency(coupler, Frequency::ghz(wc_ghz))
        .with_coupling(q1, q2, Frequency::mhz(g12_mhz)))
}

/// Row-major (`wc` outer, `g12` inner) grid of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub wc_ghz: Vec<f64>,
    pub g12_mhz: Vec<f64>,
    pub quantity: Quantity,
    /// `None` where the point is ill-defined.
    pub values: Vec<Option<f64>>,
    /// `|ζ| < threshold`; always false for XY quantities and absent cells.
    pub masked: Vec<bool>,
}

impl Landscape {
    pub fn index(&self, i_wc: usize, i_g12: usize) -> usize {
        i_wc * self.g12_mhz.len() + i_g12
    }

    pub fn value(&self, i_wc: usize, i_g12: usize) -> Option<f64> {
        self.values[self.index(i_wc, i_g12)]
    }

    pub fn is_masked(&self, i_wc: usize, i_g12: usize) -> bool {
        self.masked[self.index(i_wc, i_g12)]
    }

    /// CSV with header `wc_GHz,g12_MHz,value,masked`; absent values are empty.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "wc_GHz,g12_MHz,value,masked")?;
        for (i, &wc) in self.wc_ghz.iter().enumerate() {
            for (j, &g) in self.g12_mhz.iter().enumerate() {
                let k = self.index(i, j);
                let value = self.values[k].map(|v| v.to_string()).unwrap_or_default();
                writeln!(out, "{wc},{g},{value},{}", u8::from(self.masked[k]))?;
            }
        }
        Ok(())
    }

    /// Heatmap on a linear diverging scale; masked and absent cells are blank.
    pub fn write_svg<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        const CELL: usize = 4;
        let (nx, ny) = (self.wc_ghz.len(), self.g12_mhz.len());
        let scale = self.values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" shape-rendering="crispEdges">"#,
            nx * CELL,
            ny * CELL
        )?;
        for i in 0..nx {
            for j in 0..ny {
                let k = self.index(i, j);
                let Some(v) = self.values[k] else { continue };
                if self.masked[k] {
                    continue;
                }
                let x = if scale > 0.0 { v / scale } else { 0.0 };
                let (r, g, b) = diverging(x);
                writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="rgb({r},{g},{b})"/>"#,
                    i * CELL,
                    (ny - 1 - j) * CELL
                )?;
            }
        }
        writeln!(out, "</svg>")
    }
}

/// Blue for -1, white for 0, red for +1.
fn diverging(x: f64) -> (u8, u8, u8) {
    let x = x.clamp(-1.0, 1.0);
    let fade = |t: f64| (255.0 * (1.0 - t)).round() as u8;
    if x >= 0.0 {
        (255, fade(x), fade(x))
    } else {
        (fade(-x), fade(-x), 255)
    }
}

/// Evaluates `grid.quantity` on every cell. Cells are independent and run in
/// parallel; the result is assembled by grid index.
pub fn landscape(base: &DeviceSpec, grid: &GridSpec) -> Result<Landscape> {
    grid.validate()?;
    base.validate()?;
    device_at(base, grid.wc_axis.start, grid.g12_axis.start)?;
    let wc = grid.wc_axis.values();
    let g12 = grid.g12_axis.values();
    let ny = g12.len();
    let values: Vec<Option<f64>> = (0..wc.len() * ny)
        .into_par_iter()
        .map(|k| {
            let spec = device_at(base, wc[k / ny], g12[k % ny]).ok()?;
            grid.quantity.evaluate(&spec).ok().filter(|v| v.is_finite())
        })
        .collect();
    let masked = values
        .iter()
        .map(|v| grid.quantity.is_zz() && v.is_some_and(|v| v.abs() < grid.mask_threshold_khz))
        .collect();
    Ok(Landscape {
        wc_ghz: wc,
        g12_mhz: g12,
        quantity: grid.quantity,
        values,
        masked,
    })
}

/// Exact ζ in kHz, through the resonant definition when the qubits are
/// bare-resonant and the labeled one otherwise.
pub fn exact_zeta_khz(spec: &DeviceSpec) -> Result<f64> {
    if spectrum::is_resonant(spec) {
        Ok(spectrum::zz_strength_resonant(spec)?.as_khz())
    } else {
        Ok(spectrum::zz_strength(spec)?.as_khz())
    }
}

/// XY strength retained at a point: the resonant splitting on resonance,
/// the perturbative estimate otherwise (MHz, magnitude).
pub fn maintained_xy_mhz(spec: &DeviceSpec) -> Result<f64> {
    let j = if spectrum::is_resonant(spec) {
        spectrum::xy_strength_resonant(spec)?
    } else {
        perturbation::xy_perturbative_for(spec)?
    };
    Ok(j.as_mhz().abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootOptions {
    pub scan_step_mhz: f64,
    pub tolerance_khz: f64,
    pub min_interval_mhz: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            scan_step_mhz: DEFAULT_SCAN_STEP_MHZ,
            tolerance_khz: DEFAULT_ROOT_TOLERANCE_KHZ,
            min_interval_mhz: DEFAULT_MIN_INTERVAL_MHZ,
        }
    }
}

impl RootOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("scan_step_mhz", self.scan_step_mhz),
            ("tolerance_khz", self.tolerance_khz),
            ("min_interval_mhz", self.min_interval_mhz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub g12_mhz: f64,
    pub zeta_khz: f64,
}

/// All g12 in `bracket` (MHz) where exact ζ vanishes at coupler `wc_ghz`,
/// ascending.
///
/// A coarse scan locates sign changes; each is refined by bisection until
/// the bracket is narrower than `min_interval_mhz` and kept if `|ζ|` is then
/// below `tolerance_khz`. Sign changes across a
/// discontinuity (a labeling jump) never reach the ζ tolerance and are
/// dropped. A ζ that vanishes identically over the bracket is reported as
/// [`Error::Degenerate`].
pub fn zero_zz_roots(base: &DeviceSpec, wc_ghz: f64, bracket: (f64, f64), options: &RootOptions) -> Result<Vec<Root>> {
    options.validate()?;
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument("g12 bracket must satisfy lo < hi".into()));
    }
    let zeta = |g: f64| device_at(base, wc_ghz, g).and_then(|s| exact_zeta_khz(&s));
    zeta(lo)?;
    zeta(hi)?;
    let n = ((hi - lo) / options.scan_step_mhz).ceil().max(1.0) as usize;
    let samples: Vec<(f64, Option<f64>)> = (0..=n)
        .map(|i| {
            let g = if i == n { hi } else { lo + i as f64 * (hi - lo) / n as f64 };
            (g, zeta(g).ok())
        })
        .collect();
    let defined: Vec<f64> = samples.iter().filter_map(|s| s.1).collect();
    if defined.iter().all(|z| z.abs() < ZETA_FLOOR_KHZ) {
        return Err(Error::Degenerate(format!(
            "ζ vanishes identically over g12 ∈ [{lo}, {hi}] MHz at ωc = {wc_ghz} GHz"
        )));
    }

    let mut roots = Vec::new();
    for w in samples.windows(2) {
        let ((a, za), (b, zb)) = (w[0], w[1]);
        let (Some(za), Some(zb)) = (za, zb) else { continue };
        if za == 0.0 {
            roots.push(Root { g12_mhz: a, zeta_khz: 0.0 });
            continue;
        }
        if za.signum() == zb.signum() || zb == 0.0 {
            continue;
        }
        if let Some(root) = bisect(&zeta, (a, za), (b, zb), options) {
            // A touching root shows up as two sign changes converging together.
            if roots.last().is_none_or(|r: &Root| root.g12_mhz - r.g12_mhz > 2.0 * options.min_interval_mhz) {
                roots.push(root);
            }
        }
    }
    if let Some(&(g, Some(z))) = samples.last() {
        if z == 0.0 {
            roots.push(Root { g12_mhz: g, zeta_khz: 0.0 });
        }
    }
    Ok(roots)
}

fn bisect<F>(f: &F, mut a: (f64, f64), mut b: (f64, f64), options: &RootOptions) -> Option<Root>
where
    F: Fn(f64) -> Result<f64>,
{
    loop {
        let best = if a.1.abs() <= b.1.abs() { a } else { b };
        if (b.0 - a.0) < options.min_interval_mhz {
            return (best.1.abs() < options.tolerance_khz).then_some(Root { g12_mhz: best.0, zeta_khz: best.1 });
        }
        let m = 0.5 * (a.0 + b.0);
        let zm = f(m).ok()?;
        if zm == 0.0 {
            return Some(Root { g12_mhz: m, zeta_khz: 0.0 });
        }
        if zm.signum() == a.1.signum() {
            a = (m, zm);
        } else {
            b = (m, zm);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchId {
    Lower,
    Upper,
}

impl std::fmt::Display for BranchId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BranchId::Lower => "lower",
            BranchId::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub wc_ghz: f64,
    pub g12_root_mhz: f64,
    pub zeta_residual_khz: f64,
    pub maintained_j_mhz: f64,
    pub branch_id: BranchId,
    /// Continuation track; a new segment starts after every break.
    pub segment: usize,
}

/// A track that could not be continued to the next column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchBreak {
    pub segment: usize,
    pub last_wc_ghz: f64,
    pub last_g12_mhz: f64,
    pub next_wc_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTrace {
    pub points: Vec<BranchPoint>,
    pub breaks: Vec<BranchBreak>,
    /// Root count for every column in scan order.
    pub root_counts: Vec<(f64, usize)>,
}

impl BranchTrace {
    pub fn branch(&self, id: BranchId) -> impl Iterator<Item = &BranchPoint> {
        self.points.iter().filter(move |p| p.branch_id == id)
    }

    /// CSV with header `wc_GHz,g12_MHz,zeta_kHz,J_MHz,branch`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "wc_GHz,g12_MHz,zeta_kHz,J_MHz,branch")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                p.wc_ghz, p.g12_root_mhz, p.zeta_residual_khz, p.maintained_j_mhz, p.branch_id
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchOptions {
    #[serde(default)]
    pub roots: RootOptions,
    #[serde(default = "default_jump")]
    pub jump_threshold_mhz: f64,
}

fn default_jump() -> f64 {
    DEFAULT_JUMP_MHZ
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            roots: RootOptions::default(),
            jump_threshold_mhz: DEFAULT_JUMP_MHZ,
        }
    }
}

/// Follows the zero-ZZ roots across the coupler samples of `wc_axis`.
///
/// Columns are solved in parallel and then linked in axis order by
/// nearest-root matching. A root farther than the jump threshold from every
/// open track starts a new segment; a track with no root within the
/// threshold is closed and recorded as a break. In columns with two or more
/// roots the smallest g12 is the lower branch and the rest are upper; a
/// lone root inherits the id its segment carries in the nearest column where
/// it has a partner, or, if it never has one, is lower when it lies below
/// the zero-XY g12 of the perturbative estimate.
pub fn trace_branches(
    base: &DeviceSpec,
    wc_axis: &Axis,
    bracket: (f64, f64),
    options: &BranchOptions,
) -> Result<BranchTrace> {
    wc_axis.validate("wc_axis")?;
    options.roots.validate()?;
    if !(options.jump_threshold_mhz > 0.0) {
        return Err(Error::InvalidArgument("jump_threshold_mhz must be > 0".into()));
    }
    base.validate()?;
    device_at(base, wc_axis.start, bracket.0)?;
    let wc = wc_axis.values();
    let columns: Vec<Vec<Root>> = wc
        .par_iter()
        .map(|&w| match zero_zz_roots(base, w, bracket, &options.roots) {
            Ok(r) => Ok(r),
            Err(Error::IllDefined { .. }) => Ok(Vec::new()),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    // Continuation: segment id per root, open tracks as (segment, last g12).
    let mut segments: Vec<Vec<usize>> = Vec::with_capacity(columns.len());
    let mut open: Vec<(usize, f64)> = Vec::new();
    let mut breaks = Vec::new();
    let mut next_segment = 0;
    for (c, roots) in columns.iter().enumerate() {
        let mut assigned: Vec<Option<usize>> = vec![None; roots.len()];
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (t, &(_, g)) in open.iter().enumerate() {
            for (r, root) in roots.iter().enumerate() {
                pairs.push(((root.g12_mhz - g).abs(), t, r));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut track_used = vec![false; open.len()];
        for (d, t, r) in pairs {
            if d > options.jump_threshold_mhz || track_used[t] || assigned[r].is_some() {
                continue;
            }
            track_used[t] = true;
            assigned[r] = Some(open[t].0);
        }
        let mut still_open = Vec::new();
        for (t, &(seg, g)) in open.iter().enumerate() {
            if track_used[t] {
                continue;
            }
            breaks.push(BranchBreak {
                segment: seg,
                last_wc_ghz: wc[c - 1],
                last_g12_mhz: g,
                next_wc_ghz: wc[c],
            });
        }
        let ids: Vec<usize> = assigned
            .into_iter()
            .map(|a| {
                a.unwrap_or_else(|| {
                    next_segment += 1;
                    next_segment - 1
                })
            })
            .collect();
        for (r, &seg) in ids.iter().enumerate() {
            still_open.push((seg, roots[r].g12_mhz));
        }
        open = still_open;
        segments.push(ids);
    }

    // Branch ids from columns with partners, propagated along segments.
    let mut partnered: Vec<Vec<(usize, BranchId)>> = vec![Vec::new(); next_segment];
    for (c, roots) in columns.iter().enumerate() {
        if roots.len() < 2 {
            continue;
        }
        for (r, &seg) in segments[c].iter().enumerate() {
            let id = if r == 0 { BranchId::Lower } else { BranchId::Upper };
            partnered[seg].push((c, id));
        }
    }

    let mut points = Vec::new();
    for (c, roots) in columns.iter().enumerate() {
        for (r, root) in roots.iter().enumerate() {
            let seg = segments[c][r];
            let id = if roots.len() >= 2 {
                if r == 0 {
                    BranchId::Lower
                } else {
                    BranchId::Upper
                }
            } else if let Some(&(_, id)) = partnered[seg].iter().min_by_key(|(pc, _)| pc.abs_diff(c)) {
                id
            } else {
                lone_root_id(base, wc[c], root.g12_mhz)
            };
            let spec = device_at(base, wc[c], root.g12_mhz)?;
            points.push(BranchPoint {
                wc_ghz: wc[c],
                g12_root_mhz: root.g12_mhz,
                zeta_residual_khz: root.zeta_khz,
                maintained_j_mhz: maintained_xy_mhz(&spec).unwrap_or(f64::NAN),
                branch_id: id,
                segment: seg,
            });
        }
    }
    let root_counts = wc.iter().zip(&columns).map(|(&w, r)| (w, r.len())).collect();
    Ok(BranchTrace {
        points,
        breaks,
        root_counts,
    })
}

fn lone_root_id(base: &DeviceSpec, wc_ghz: f64, g12_mhz: f64) -> BranchId {
    match zero_xy_g12_mhz(base, wc_ghz) {
        Ok(g0) if g12_mhz > g0 => BranchId::Upper,
        _ => BranchId::Lower,
    }
}

/// The g12 (MHz) where the perturbative XY estimate vanishes at `wc_ghz`.
/// J is affine in g12, so two evaluations fix it.
pub fn zero_xy_g12_mhz(base: &DeviceSpec, wc_ghz: f64) -> Result<f64> {
    let j = |g: f64| -> Result<f64> { Ok(perturbation::xy_perturbative_for(&device_at(base, wc_ghz, g)?)?.as_mhz()) };
    let (j0, j1) = (j(0.0)?, j(1.0)?);
    if j1 == j0 {
        return Err(Error::SingularParameter("J does not depend on g12".into()));
    }
    Ok(-j0 / (j1 - j0))
}
