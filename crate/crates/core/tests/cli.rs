//! Config parsing, run directories, artifacts and the `singfrac` binary.

use std::fs;
use std::path::Path;
use std::process::Command as Process;

use singular_fractional::cli::artifacts::{table_csv, MANIFEST};
use singular_fractional::cli::commands::{EXIT_CERTIFICATE, EXIT_CONFIG, EXIT_OK};
use singular_fractional::cli::config::DEFAULT_INTERVAL_MODES;
use singular_fractional::cli::{load_config, run_command, Command, Manifest, RunConfig};
use singular_fractional::geometry::{Domain, EigenBasis, Grid};
use singular_fractional::Error;
use tempfile::tempdir;

const SMALL: &str = r#"
[domain]
kind = "interval"
length = 3.141592653589793

[discretization]
n_modes = 16

[schedule]
eps0 = 0.5
ratio = 0.5
steps = 4
"#;

fn small() -> RunConfig {
    RunConfig::from_toml_str(SMALL).unwrap()
}

fn config_message(text: &str) -> String {
    match RunConfig::from_toml_str(text) {
        Err(e @ Error::Config(_)) | Err(e @ Error::InvalidParameter { .. }) => e.to_string(),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn minimal_config_takes_defaults() {
    let cfg = RunConfig::from_toml_str("[domain]\nkind = \"interval\"\nlength = 2.0\n").unwrap();
    assert_eq!(cfg.exponents.s, 0.5);
    assert_eq!(cfg.schedule.steps, 14);
    assert_eq!(cfg.tolerances.tol_pos, 1e-8);
    assert_eq!(cfg.output_dir, Path::new("runs"));
    assert_eq!(cfg.basis().unwrap().len(), DEFAULT_INTERVAL_MODES);
}

#[test]
fn out_of_range_exponent_names_field_and_bound() {
    let msg = config_message(&format!("{SMALL}\n[exponents]\ns = 1.5\np = 0.5\n"));
    assert!(
        msg.contains("`s`") && msg.contains("1.5") && msg.contains("0 < s <= 1"),
        "{msg}"
    );
}

#[test]
fn unknown_key_is_named() {
    let msg = config_message(&format!("{SMALL}\n[solver]\nwarmstart = true\n"));
    assert!(msg.contains("warmstart"), "{msg}");
}

#[test]
fn syntax_error_reports_position() {
    let msg = config_message("[domain]\nkind = \"interval\"\nlength = = 2\n");
    assert!(msg.contains("line 3"), "{msg}");
}

#[test]
fn conflicting_discretization_is_rejected() {
    let text = SMALL.replace("n_modes = 16", "n_modes = 16\nmodes_per_axis = [4]");
    assert!(config_message(&text).contains("not both"));
}

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = small();
    cfg.exponents.p = 0.3;
    cfg.solver.warm_start = false;
    let again = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn missing_file_is_a_config_error() {
    let dir = tempdir().unwrap();
    let err = load_config(&dir.path().join("absent.toml")).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn command_names_round_trip() {
    for c in Command::ALL {
        assert_eq!(c.name().parse::<Command>().unwrap(), c);
    }
    assert!("solve".parse::<Command>().is_err());
}

#[test]
fn basis_check_writes_verified_manifest() {
    let dir = tempdir().unwrap();
    let out = run_command(Command::BasisCheck, &small(), dir.path()).unwrap();
    assert_eq!(out.exit_code(), EXIT_OK);
    let root = dir.path().join("basis-check");
    assert_eq!(out.dir, root);
    for f in ["eigenvalues.csv", "modes.csv", "report.json", MANIFEST] {
        assert!(root.join(f).is_file(), "{f}");
    }
    assert!(!root.join("failure.json").exists());
    let manifest = Manifest::load(&root).unwrap();
    assert!(manifest.mismatches(&root).unwrap().is_empty());
    let paths: Vec<_> = manifest.files.iter().map(|e| e.path.clone()).collect();
    let mut sorted = paths.clone();
    sorted.sort();
    assert_eq!(paths, sorted);

    fs::write(root.join("modes.csv"), "tampered\n").unwrap();
    assert_eq!(
        manifest.mismatches(&root).unwrap(),
        vec!["modes.csv".to_string()]
    );

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("report.json")).unwrap()).unwrap();
    for key in [
        "config_echo",
        "certificates",
        "traces",
        "limit",
        "calibration",
    ] {
        assert!(report.get(key).is_some(), "{key}");
    }
}

#[test]
fn first_mode_csv_on_five_nodes() {
    let domain = Domain::interval(std::f64::consts::PI).unwrap();
    let grid = std::sync::Arc::new(Grid::uniform(&domain, &[5]).unwrap());
    let b = EigenBasis::new(domain, 1, grid).unwrap();
    let csv = singular_fractional::cli::artifacts::solution_csv(&b.mode_field(0));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], "x,u");
    for line in [lines[1], lines[5]] {
        let u: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(u, 0.0);
    }
    let mid: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((mid - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    assert!(!csv.contains('\r'));
}

#[test]
fn empty_table_is_header_only() {
    assert_eq!(table_csv(&["a", "b"], Vec::<Vec<f64>>::new()), "a,b\n");
    assert_eq!(
        table_csv(&["a"], vec![vec![0.5]]),
        "a\n5.0000000000000000e-1\n"
    );
}

#[test]
fn continue_certificates_follow_schedule() {
    let dir = tempdir().unwrap();
    let out = run_command(Command::Continue, &small(), dir.path()).unwrap();
    let names: Vec<&str> = out
        .report
        .certificates
        .iter()
        .map(|c| c.name.as_str())
        .collect();
    let solves: Vec<&str> = names
        .iter()
        .copied()
        .filter(|n| n.contains("/solve-"))
        .collect();
    assert_eq!(
        solves,
        [
            "continue/solve-00",
            "continue/solve-01",
            "continue/solve-02",
            "continue/solve-03",
            "continue/solve-04"
        ]
    );
    let pos = |n: &str| names.iter().position(|x| *x == n).unwrap();
    assert!(pos("continue/solve-01") < pos("continue/ordering-01"));
    assert!(pos("continue/ordering-01") < pos("continue/solve-02"));
    for k in 0..5 {
        assert!(out.dir.join(format!("steps/u_{k:02}.csv")).is_file());
    }
    assert!(out.dir.join("limit.csv").is_file());
}

#[test]
fn existing_run_directory_is_not_overwritten() {
    let dir = tempdir().unwrap();
    run_command(Command::BasisCheck, &small(), dir.path()).unwrap();
    let err = run_command(Command::BasisCheck, &small(), dir.path()).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn failed_certificate_writes_failure_record() {
    let dir = tempdir().unwrap();
    let mut cfg = small();
    cfg.solver.max_iter = 1;
    let out = run_command(Command::SolveEps, &cfg, dir.path()).unwrap();
    assert_eq!(out.exit_code(), EXIT_CERTIFICATE);
    let first = out.first_failure().unwrap().name.clone();
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.dir.join("failure.json")).unwrap()).unwrap();
    assert_eq!(record["command"], "solve-eps");
    assert_eq!(record["certificate"]["name"], first.as_str());
    assert!(record["failed_count"].as_u64().unwrap() >= 1);
}

#[test]
fn extension_at_half_recovers_unit_constant() {
    let dir = tempdir().unwrap();
    let out = run_command(Command::ValidateExtension, &small(), dir.path()).unwrap();
    assert!(out.passed(), "{:?}", out.first_failure());
    let cal = out.report.calibration.unwrap();
    assert!((cal.c_s - 1.0).abs() < 1e-2);
    assert!(out.dir.join("profiles.csv").is_file());
}

#[test]
fn continue_is_deterministic() {
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    let ra = run_command(Command::Continue, &small(), a.path()).unwrap();
    let rb = run_command(Command::Continue, &small(), b.path()).unwrap();
    assert_eq!(ra.manifest, rb.manifest);
    for e in &ra.manifest.files {
        assert_eq!(
            fs::read(ra.dir.join(&e.path)).unwrap(),
            fs::read(rb.dir.join(&e.path)).unwrap()
        );
    }
}

fn singfrac(args: &[&str]) -> i32 {
    Process::new(env!("CARGO_BIN_EXE_singfrac"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, SMALL).unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, format!("{SMALL}\n[exponents]\ns = 1.5\np = 0.5\n")).unwrap();
    let failing = dir.path().join("failing.toml");
    fs::write(&failing, format!("{SMALL}\n[solver]\nmax_iter = 1\n")).unwrap();
    let out = dir.path().join("runs");
    let out = out.to_str().unwrap();

    let run = |cmd: &str, cfg: &Path, out: &str| {
        singfrac(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out])
    };
    assert_eq!(run("basis-check", &good, out), EXIT_OK);
    assert_eq!(run("basis-check", &good, out), EXIT_CONFIG);
    assert_eq!(run("basis-check", &bad, out), EXIT_CONFIG);
    assert_eq!(run("bogus", &good, out), EXIT_CONFIG);
    assert_eq!(run("solve-eps", &failing, out), EXIT_CERTIFICATE);
}
