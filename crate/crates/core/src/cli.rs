//! Command-line front end: one JSON config per run, scalar overrides by flag.
//!
//! Every output embeds the SHA-256 of the resolved configuration. JSON
//! outputs carry it as `config_sha256` next to the echoed config; CSV and
//! SVG outputs carry both in leading comment lines.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::cr::{self, CrOptions, CrResult};
use crate::dynamics::evolve::{EvolveOptions, Integrator, DEFAULT_DRIVEN_DT_NS, DEFAULT_DT_NS};
use crate::dynamics::iswap::{self, Calibration, IswapTemplate, Synchronization};
use crate::dynamics::metrics::GateMetrics;
use crate::error::{Error, Result};
use crate::model::DeviceSpec;
use crate::spectrum::{self, CouplingReport};
use crate::sweep::{self, Axis, BranchOptions, GridSpec};
use crate::units::Frequency;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_ILL_DEFINED: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "zzkit", version, about = "ZZ and XY coupling analysis for tunable-coupler transmon pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override n_levels of every mode.
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Override the time step (ns).
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Primary output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweep, branch and scan.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Force the rotating-wave coupling model.
    #[arg(long, global = true)]
    pub rwa: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// ζ, dressed frequencies and resonant J as JSON.
    Spectrum,
    /// Landscape CSV over (ωc, g12).
    Sweep,
    /// Zero-ZZ branches with maintained J as CSV.
    Branch,
    /// Cross-resonance trace CSV and J estimate JSON.
    Cr,
    /// One iSWAP gate, optionally calibrated, as JSON.
    Iswap,
    /// Gate metrics over a hold-time axis as CSV.
    Scan,
}

/// Output locations. Not part of the hashed config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// CR population trace.
    #[serde(default)]
    pub trace_path: Option<PathBuf>,
    /// Landscape heatmap.
    #[serde(default)]
    pub svg_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub wc_axis: Axis,
    pub g12_bracket_mhz: (f64, f64),
    #[serde(default)]
    pub options: BranchOptions,
}

fn default_samples() -> usize {
    CrOptions::default().samples
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrConfig {
    pub amplitude_mhz: f64,
    pub duration_ns: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Defaults to the dressed Q2 frequency.
    #[serde(default)]
    pub drive_frequency_ghz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncConfig {
    pub g12_bracket_mhz: (f64, f64),
    #[serde(default = "default_sync_tolerance")]
    pub tolerance_mhz: f64,
}

fn default_sync_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IswapConfig {
    pub template: IswapTemplate,
    /// Tune the Q2 offset and hold time for minimum swap error first.
    #[serde(default)]
    pub calibrate: bool,
    /// Scan g12 for the synchronized value (implies calibration).
    #[serde(default)]
    pub synchronize: Option<SyncConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub hold_axis_ns: Axis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceSpec,
    /// Applied to every mode when set.
    #[serde(default)]
    pub n_levels: Option<usize>,
    #[serde(default)]
    pub dt_ns: Option<f64>,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing)]
    pub output: OutputPaths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<BranchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cr: Option<CrConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iswap: Option<IswapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
}

impl RunConfig {
    /// Parses a config document; errors name the offending key path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })
    }

    /// Applies flag overrides and fills command-dependent defaults.
    pub fn resolve(mut self, cli: &Cli) -> Result<Self> {
        if let Some(n) = cli.levels {
            self.n_levels = Some(n);
        }
        if let Some(n) = self.n_levels {
            self.device = self.device.with_levels(n);
        }
        if cli.rwa {
            self.device.rwa = true;
        }
        if let Some(dt) = cli.dt {
            self.dt_ns = Some(dt);
        }
        if cli.threads.is_some() {
            self.threads = cli.threads;
        }
        if cli.out.is_some() {
            self.output.path = cli.out.clone();
        }
        match cli.command {
            Command::Cr => {
                self.dt_ns.get_or_insert(DEFAULT_DRIVEN_DT_NS);
            }
            Command::Iswap | Command::Scan => {
                self.dt_ns.get_or_insert(DEFAULT_DT_NS);
            }
            _ => {}
        }
        self.device.validate()?;
        if let Some(dt) = self.dt_ns {
            self.evolve_options(dt).validate()?;
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("threads must be >= 1".into()));
        }
        Ok(self)
    }

    fn evolve_options(&self, dt_ns: f64) -> EvolveOptions {
        EvolveOptions {
            dt_ns,
            integrator: self.integrator,
        }
    }

    fn options(&self) -> EvolveOptions {
        self.evolve_options(self.dt_ns.unwrap_or(DEFAULT_DT_NS))
    }

    /// Canonical JSON of the hashed part of the config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T> {
    block
        .as_ref()
        .ok_or_else(|| Error::Config(format!("this command needs a `{name}` block")))
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::ResourceLimit(_) | Error::Config(_) | Error::Io(_) => EXIT_CONFIG,
        Error::IllDefined { .. } | Error::SingularParameter(_) | Error::Degenerate(_) => EXIT_ILL_DEFINED,
        Error::IntegratorFailure(_) => EXIT_NUMERICAL,
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: Command,
    config_sha256: String,
    config: &'a RunConfig,
    result: T,
}

fn json_document<T: Serialize>(command: Command, config: &RunConfig, result: T) -> String {
    let env = Envelope {
        command,
        config_sha256: config.sha256(),
        config,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("result serializes");
    s.push('\n');
    s
}

fn comment_header(command: Command, config: &RunConfig, prefix: &str) -> String {
    let name = serde_json::to_value(command).expect("command serializes");
    format!(
        "{prefix} command={}\n{prefix} config_sha256={}\n{prefix} config={}\n",
        name.as_str().unwrap_or_default(),
        config.sha256(),
        config.canonical_json()
    )
}

fn write_target(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct CrSummary {
    period_ns: Option<f64>,
    j_estimate_mhz: Option<f64>,
    resolved: bool,
    status: &'static str,
    contrast: f64,
    delta12_mhz: f64,
    drive: crate::model::DriveSpec,
}

impl From<&CrResult> for CrSummary {
    fn from(r: &CrResult) -> Self {
        CrSummary {
            period_ns: r.period_ns,
            j_estimate_mhz: r.j_estimate_mhz,
            resolved: r.resolved(),
            status: if r.resolved() { "ok" } else { "J below resolution" },
            contrast: r.contrast,
            delta12_mhz: r.delta12_mhz,
            drive: r.drive.clone(),
        }
    }
}

#[derive(Serialize)]
struct IswapSummary {
    template: IswapTemplate,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<Calibration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    synchronization: Option<Synchronization>,
    metrics: GateMetrics,
    leakage_per_input: [f64; 4],
    /// `[re, im]` entries, rows in `00, 01, 10, 11` order.
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Runs one command against a resolved config and writes its outputs.
pub fn execute(command: Command, config: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let out = config.output.path.as_deref();
    match command {
        Command::Spectrum => {
            let report: CouplingReport = spectrum::coupling_report(&config.device)?;
            write_target(out, &json_document(command, config, report), stdout)
        }
        Command::Sweep => {
            let grid = require(&config.sweep, "sweep")?;
            let land = sweep::landscape(&config.device, grid)?;
            let mut buf = comment_header(command, config, "#").into_bytes();
            land.write_csv(&mut buf)?;
            write_target(out, &String::from_utf8_lossy(&buf), stdout)?;
            if let Some(svg) = &config.output.svg_path {
                let mut doc = Vec::new();
                land.write_svg(&mut doc)?;
                let text = String::from_utf8_lossy(&doc);
                let header = format!("<!--\n{}-->\n", comment_header(command, config, ""));
                write_target(Some(svg), &(header + &text), stdout)?;
            }
            Ok(())
        }
        Command::Branch => {
            let b = require(&config.branch, "branch")?;
            let trace = sweep::trace_branches(&config.device, &b.wc_axis, b.g12_bracket_mhz, &b.options)?;
            let mut text = comment_header(command, config, "#");
            for br in &trace.breaks {
                text += &format!(
                    "# break segment={} last_wc_GHz={} last_g12_MHz={} next_wc_GHz={}\n",
                    br.segment, br.last_wc_ghz, br.last_g12_mhz, br.next_wc_ghz
                );
            }
            let mut buf = text.into_bytes();
            trace.write_csv(&mut buf)?;
            write_target(out, &String::from_utf8_lossy(&buf), stdout)
        }
        Command::Cr => {
            let c = require(&config.cr, "cr")?;
            let mut drive = cr::cr_drive(&config.device, Frequency::mhz(c.amplitude_mhz))?;
            if let Some(f) = c.drive_frequency_ghz {
                drive.frequency_ghz = f;
            }
            let opts = CrOptions {
                dt_ns: config.options().dt_ns,
                samples: c.samples,
                integrator: config.integrator,
            };
            let result = cr::cr_period(&config.device, &drive, c.duration_ns, opts)?;
            if let Some(trace_path) = &config.output.trace_path {
                let mut text = comment_header(command, config, "#");
                text += "t_ns,target_population\n";
                for (t, p) in result.times_ns.iter().zip(&result.target_population) {
                    text += &format!("{t},{p}\n");
                }
                write_target(Some(trace_path), &text, stdout)?;
            }
            write_target(out, &json_document(command, config, CrSummary::from(&result)), stdout)
        }
        Command::Iswap => {
            let c = require(&config.iswap, "iswap")?;
            let opts = config.options();
            let (device, template, calibration, synchronization) = match &c.synchronize {
                Some(s) => {
                    let (q1, q2) = config.device.qubit_modes();
                    let base = config.device.clone();
                    let make = move |g: f64| base.clone().with_coupling(q1, q2, Frequency::mhz(g));
                    let sync = iswap::synchronize_g12(&make, &c.template, s.g12_bracket_mhz, s.tolerance_mhz, opts)?;
                    let device = make(sync.g12_mhz);
                    let template = calibrated_template(&device, &c.template, &sync.calibration)?;
                    (device, template, Some(sync.calibration), Some(sync))
                }
                None if c.calibrate => {
                    let cal = iswap::calibrate_swap(&config.device, &c.template, opts)?;
                    let template = calibrated_template(&config.device, &c.template, &cal)?;
                    (config.device.clone(), template, Some(cal), None)
                }
                None => (config.device.clone(), c.template.resolved(&config.device)?, None, None),
            };
            let schedule = template.schedule(&device)?;
            let gate = iswap::iswap_unitary(&device, &schedule, opts)?;
            let metrics = crate::dynamics::metrics::gate_metrics(&gate.matrix, template.hold_time_ns);
            let matrix = (0..4)
                .map(|i| (0..4).map(|j| [gate.matrix[(i, j)].re, gate.matrix[(i, j)].im]).collect())
                .collect();
            let summary = IswapSummary {
                template,
                calibration,
                synchronization,
                metrics,
                leakage_per_input: gate.leakage,
                matrix,
            };
            write_target(out, &json_document(command, config, summary), stdout)
        }
        Command::Scan => {
            let c = require(&config.iswap, "iswap")?;
            let s = require(&config.scan, "scan")?;
            s.hold_axis_ns.validate("hold_axis_ns")?;
            let holds = s.hold_axis_ns.values();
            let rows = iswap::hold_scan(&config.device, &c.template, &holds, config.options())?;
            let mut text = comment_header(command, config, "#");
            text += "hold_ns,swap_error,leakage_l1,conditional_phase_error,fidelity\n";
            for m in rows {
                let dtheta = m.conditional_phase_error.map(|x| x.to_string()).unwrap_or_default();
                text += &format!("{},{},{},{},{}\n", m.hold_time_ns, m.swap_error, m.leakage_l1, dtheta, m.fidelity);
            }
            write_target(out, &text, stdout)
        }
    }
}

/// The template a calibration converged to, with Q2 as a bare target.
fn calibrated_template(device: &DeviceSpec, template: &IswapTemplate, cal: &Calibration) -> Result<IswapTemplate> {
    let t = IswapTemplate {
        qubit_target: iswap::QubitTarget::Dressed {
            offset_mhz: cal.offset_mhz,
        },
        hold_time_ns: cal.hold_time_ns,
        ..*template
    };
    t.resolved(device)
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <FILE> is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text)?.resolve(cli)
}

fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let config = load(cli)?;
    // rayon treats 0 as "one worker per core".
    let threads = match cli.command {
        Command::Sweep | Command::Branch | Command::Scan => config.threads.unwrap_or(0),
        _ => 1,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let mut buf = Vec::new();
    pool.install(|| execute(cli.command, &config, &mut buf))?;
    stdout.write_all(&buf)?;
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if let Error::IllDefined { overlaps, .. } = &e {
                for (label, w) in overlaps {
                    let _ = writeln!(stderr, "  {label}: {w}");
                }
            }
            exit_code(&e)
        }
    }
}
