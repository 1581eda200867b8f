//! End-to-end tests of the command-line binary: exit codes, report
//! content, shipped-config round-trips, and report determinism.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bandres::cli_runner::config::ProblemConfig;
use bandres::cli_runner::presets::{preset_runs, PresetParams, PRESET_NAMES};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bandres"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn bandres");
    assert!(
        out.status.success(),
        "expected success for {:?}\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn harmonic_config_reports_the_ground_level() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("h.json");
    let cfg = configs_dir().join("harmonic.cfg");
    let out = run_ok(&[
        "run",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("report written to"));

    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(parsed["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(parsed["provenance"]["dimensions"][0].as_u64(), Some(40));
    let records = parsed["runs"][0]["records"].as_array().unwrap();
    let ground = records
        .iter()
        .find(|r| (r["er"].as_f64().unwrap() - 1.0).abs() < 1e-10)
        .expect("eigenvalue 1.0 retained");
    assert!(ground["ei"].as_f64().unwrap().abs() < 1e-10);
    assert!(ground["residual"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn shipped_triple_well_config_reproduces_the_ground_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("tw.json");
    let cfg = configs_dir().join("triple_well_g020.cfg");
    run_ok(&[
        "run",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let first = &parsed["runs"][0]["records"][0];
    let er = first["er"].as_f64().unwrap();
    let ei = first["ei"].as_f64().unwrap();
    assert!(
        (er - 0.93255571582478).abs() <= 1e-10,
        "first-record ER {er}"
    );
    assert!(
        (ei.abs() - 7.94775543926e-5).abs() <= 1e-12,
        "first-record |EI| {}",
        ei.abs()
    );
}

#[test]
fn misspelled_key_exits_two_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(
        &bad,
        r#"
alpha = 1.0
w = [1.0, 0.0]
paritty = "even"
dim = 10
[scan]
e_min = 0.5
e_max = 1.5
de = 0.5
[[potential]]
power = 2
coeff_re = 1.0
"#,
    )
    .unwrap();
    let out = bin().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("paritty"), "stderr: {stderr}");
}

#[test]
fn unreadable_config_path_exits_two() {
    let out = bin()
        .args(["run", "/nonexistent/nowhere.cfg"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn starved_iteration_budget_exits_three() {
    let cfg = configs_dir().join("harmonic.cfg");
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["run", cfg.to_str().unwrap(), "--max-iters", "1"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 3);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("no scan step converged"),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn unknown_preset_and_override_exit_two() {
    let out = bin().args(["preset", "nonsense"]).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));

    let out = bin()
        .args(["preset", "double-well", "--set", "phi=0.1"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi"));

    let out = bin()
        .args(["preset", "double-well", "--set", "lambda"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unordered_sweep_dims_exit_two() {
    let cfg = configs_dir().join("harmonic.cfg");
    let out = bin()
        .args([
            "sweep-dims",
            cfg.to_str().unwrap(),
            "--dims",
            "20,10",
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn sweep_dims_emits_one_block_per_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.txt");
    let cfg = configs_dir().join("harmonic.cfg");
    run_ok(&[
        "sweep-dims",
        cfg.to_str().unwrap(),
        "--dims",
        "10,20",
        "--format",
        "text",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("harmonic/dim=10"), "{text}");
    assert!(text.contains("harmonic/dim=20"), "{text}");
}

#[test]
fn cubic_oscillator_preset_csv_has_eleven_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("t4.csv");
    run_ok(&[
        "preset",
        "cubic-oscillator",
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("er,ei,"), "header: {header}");
    let data: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
    assert_eq!(data.len(), 11, "expected 11 rows, got {}", data.len());
    for (i, row) in data.iter().enumerate() {
        let run_label = row.split(',').nth(6).unwrap();
        assert!(
            run_label.starts_with("phi="),
            "row {i} run label {run_label}"
        );
    }
}

#[test]
fn default_output_name_uses_the_config_stem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("harmonic.cfg");
    let out = bin()
        .current_dir(dir.path())
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    assert!(dir.path().join("harmonic_report.json").is_file());
}

#[test]
fn all_shipped_configs_round_trip_losslessly() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("cfg") {
            continue;
        }
        seen += 1;
        let text = std::fs::read_to_string(&path).unwrap();
        let cfg = ProblemConfig::from_toml(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let emitted = cfg.to_toml();
        let back = ProblemConfig::from_toml(&emitted).unwrap();
        assert_eq!(cfg, back, "round-trip drift for {}", path.display());
    }
    assert_eq!(seen, 7, "expected the seven shipped configs");
}

#[test]
fn all_preset_configs_round_trip_losslessly() {
    for name in PRESET_NAMES {
        let runs = preset_runs(name, &PresetParams::default()).unwrap();
        assert!(!runs.is_empty());
        for run in runs {
            let emitted = run.config.to_toml();
            let back = ProblemConfig::from_toml(&emitted)
                .unwrap_or_else(|e| panic!("preset {name} run {}: {e}", run.label));
            assert_eq!(run.config, back, "preset {name} run {}", run.label);
        }
    }
}

#[test]
fn identical_runs_produce_identical_reports_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("harmonic.cfg");
    let strip = |s: &str| -> String {
        s.lines()
            .filter(|l| !l.contains("timestamp"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    for format in ["json", "text", "csv"] {
        let a_path = dir.path().join(format!("a.{format}"));
        let b_path = dir.path().join(format!("b.{format}"));
        for p in [&a_path, &b_path] {
            run_ok(&[
                "run",
                cfg.to_str().unwrap(),
                "--format",
                format,
                "--out",
                p.to_str().unwrap(),
            ]);
        }
        let a = strip(&std::fs::read_to_string(&a_path).unwrap());
        let b = strip(&std::fs::read_to_string(&b_path).unwrap());
        assert_eq!(a, b, "format {format} not deterministic");
    }
}
