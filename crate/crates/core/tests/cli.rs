use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;
use zzkit::model::presets;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zzkit"))
}

fn write_config(dir: &TempDir, name: &str, doc: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn straddling(g12: f64, levels: usize) -> Value {
    serde_json::to_value(presets::straddling_pair(6.0, g12, 0.0, levels)).unwrap()
}

#[test]
fn malformed_config_exits_one_with_field_path() {
    let dir = TempDir::new().unwrap();
    let mut doc = json!({"device": straddling(6.5, 4)});
    doc["device"]["modes"][1]["bogus"] = json!(1.0);
    let cfg = write_config(&dir, "bad.json", &doc);
    let out = run(&["spectrum"], &cfg);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("device.modes[1]"), "{err}");
}

#[test]
fn missing_config_file_exits_one() {
    let out = bin().args(["spectrum", "--config", "/nonexistent/run.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn negative_dt_override_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.json", &json!({"device": straddling(6.5, 4)}));
    let out = run(&["spectrum", "--dt", "-0.1"], &cfg);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn uncoupled_spectrum_reports_no_zz() {
    let dir = TempDir::new().unwrap();
    let mut device = straddling(0.0, 4);
    for c in device["couplings"].as_array_mut().unwrap() {
        c["strength_ghz"] = json!(0.0);
    }
    let cfg = write_config(&dir, "run.json", &json!({"device": device}));
    let doc = stdout_json(&run(&["spectrum"], &cfg));
    assert_eq!(doc["command"], "spectrum");
    assert_eq!(doc["config_sha256"].as_str().unwrap().len(), 64);
    assert!(doc["result"]["zeta_MHz"].as_f64().unwrap().abs() < 1e-9);
    assert!((doc["result"]["omega1_GHz"].as_f64().unwrap() - 5.114).abs() < 1e-9);
}

#[test]
fn levels_override_changes_hash() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.json", &json!({"device": straddling(6.5, 4)}));
    let a = stdout_json(&run(&["spectrum"], &cfg));
    let b = stdout_json(&run(&["spectrum", "--levels", "5"], &cfg));
    assert_ne!(a["config_sha256"], b["config_sha256"]);
    assert_eq!(b["config"]["device"]["modes"][0]["n_levels"], 5);
}

#[test]
fn single_point_grid_has_one_row() {
    let dir = TempDir::new().unwrap();
    let doc = json!({
        "device": straddling(0.0, 4),
        "sweep": {
            "wc_axis": {"start": 6.0, "stop": 6.0, "step": 0.1},
            "g12_axis": {"start": 6.5, "stop": 6.5, "step": 1.0},
            "quantity": "zeta_exact"
        }
    });
    let cfg = write_config(&dir, "run.json", &doc);
    let out = run(&["sweep"], &cfg);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# command=sweep\n"));
    assert!(text.contains("wc_GHz,g12_MHz,value,masked\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("6,6.5,"));
}

#[test]
fn sweep_writes_svg_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let svg = dir.path().join("map.svg");
    let doc = json!({
        "device": straddling(0.0, 4),
        "output": {"svg_path": svg},
        "sweep": {
            "wc_axis": {"start": 6.0, "stop": 7.0, "step": 0.5},
            "g12_axis": {"start": -2.0, "stop": 10.0, "step": 4.0},
            "quantity": "zeta_perturbative"
        }
    });
    let cfg = write_config(&dir, "run.json", &doc);
    let first = run(&["sweep", "--threads", "1"], &cfg);
    let svg_first = std::fs::read(&svg).unwrap();
    let second = run(&["sweep", "--threads", "3"], &cfg);
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(svg_first, std::fs::read(&svg).unwrap());
    assert_eq!(data_rows(&String::from_utf8(first.stdout).unwrap()).len(), 12);
    assert!(String::from_utf8(svg_first).unwrap().contains("<svg"));
}

#[test]
fn bracket_without_roots_gives_header_only_branch_csv() {
    let dir = TempDir::new().unwrap();
    let doc = json!({
        "device": straddling(0.0, 4),
        "branch": {
            "wc_axis": {"start": 6.0, "stop": 6.2, "step": 0.1},
            "g12_bracket_mhz": [-5.0, -4.0]
        }
    });
    let cfg = write_config(&dir, "run.json", &doc);
    let out = run(&["branch"], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("wc_GHz,g12_MHz,zeta_kHz,J_MHz,branch\n"));
    assert!(data_rows(&text).is_empty());
}

#[test]
fn branch_reports_two_roots_at_six_ghz() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("branches.csv");
    let doc = json!({
        "device": straddling(0.0, 4),
        "output": {"path": out_path},
        "branch": {
            "wc_axis": {"start": 6.0, "stop": 6.0, "step": 0.1},
            "g12_bracket_mhz": [-5.0, 15.0]
        }
    });
    let cfg = write_config(&dir, "run.json", &doc);
    let out = run(&["branch"], &cfg);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(out_path).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",lower") && rows[1].ends_with(",upper"));
}

#[test]
fn harmonic_rwa_branch_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let mut device = straddling(0.0, 3);
    for m in device["modes"].as_array_mut().unwrap() {
        m["anharmonicity_ghz"] = json!(0.0);
    }
    device["rwa"] = json!(true);
    let doc = json!({
        "device": device,
        "branch": {
            "wc_axis": {"start": 6.0, "stop": 6.0, "step": 0.1},
            "g12_bracket_mhz": [-5.0, 15.0]
        }
    });
    let cfg = write_config(&dir, "run.json", &doc);
    let out = run(&["branch"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn zero_drive_cr_is_unresolved() {
    let dir = TempDir::new().unwrap();
    let doc = json!({
        "device": straddling(6.5, 3),
        "cr": {"amplitude_mhz": 0.0, "duration_ns": 200.0, "samples": 50}
    });
    let cfg = write_config(&dir, "run.json", &doc);
    let doc = stdout_json(&run(&["cr", "--dt", "0.01"], &cfg));
    assert_eq!(doc["result"]["status"], "J below resolution");
    assert_eq!(doc["result"]["resolved"], false);
    assert!(doc["result"]["j_estimate_mhz"].is_null());
}

#[test]
fn zero_excursion_iswap_scores_four_tenths() {
    let dir = TempDir::new().unwrap();
    let device = serde_json::to_value(presets::iswap_pair(12.0, 3)).unwrap();
    let doc = json!({
        "device": device,
        "iswap": {
            "template": {
                "coupler_interaction_ghz": 8.70,
                "qubit_target": {"mode": "bare", "frequency_ghz": 6.45},
                "hold_time_ns": 10.0
            }
        }
    });
    let cfg = write_config(&dir, "run.json", &doc);
    let doc = stdout_json(&run(&["iswap", "--dt", "0.05"], &cfg));
    let m = &doc["result"]["metrics"];
    assert!((m["fidelity"].as_f64().unwrap() - 0.4).abs() < 0.01, "{m}");
    assert!(m["swap_error"].as_f64().unwrap() > 0.99);
    assert!(m["conditional_phase_error"].is_null());
}

#[test]
fn hold_scan_writes_one_row_per_hold() {
    let dir = TempDir::new().unwrap();
    let device = serde_json::to_value(presets::iswap_pair(12.0, 3)).unwrap();
    let doc = json!({
        "device": device,
        "iswap": {"template": {"coupler_interaction_ghz": 7.79, "hold_time_ns": 58.0}},
        "scan": {"hold_axis_ns": {"start": 0.0, "stop": 20.0, "step": 10.0}}
    });
    let cfg = write_config(&dir, "run.json", &doc);
    let out = run(&["scan", "--dt", "0.1", "--threads", "2"], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("hold_ns,swap_error,leakage_l1,conditional_phase_error,fidelity\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("0,"));
}

#[test]
fn missing_command_block_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.json", &json!({"device": straddling(6.5, 4)}));
    let out = run(&["sweep"], &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep"));
}
