use std::path::Path;
use std::process::Command as Process;

use curvband_cli::run::{run_command, Command, ERROR_MARKER, SUMMARY_FILE};
use curvband_cli::{parse_config, RunConfig};

fn config(text: &str, out: &Path) -> RunConfig {
    let mut c = parse_config(text).unwrap();
    c.output_path = out.to_string_lossy().into_owned();
    c
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn flat_geometry_has_no_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("[surface]\nkind = \"flat\"\nrho_max = 1.0\n[grid]\nn_points = 50\n", dir.path());
    run_command(&c, Command::Geometry).unwrap();
    let csv = read(&dir.path().join("geometry.csv"));
    assert!(csv.starts_with("rho,Z,H,K,Hsq_minus_K,F_at_q0\n"));
    assert_eq!(csv.lines().count(), 51);
    for name in ["H", "K", "Hsq_minus_K"] {
        assert!(column(&csv, name).iter().all(|v| *v == 0.0));
    }
    assert!(column(&csv, "F_at_q0").iter().all(|v| *v == 1.0));
}

#[test]
fn flat_disc_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("[surface]\nkind = \"flat\"\nrho_max = 1.0\n", dir.path());
    run_command(&c, Command::Spectrum).unwrap();
    let csv = read(&dir.path().join("spectrum_m0.csv"));
    assert!(csv.starts_with("m,index,re_E,im_E,residual\n"));
    let re = column(&csv, "re_E");
    assert_eq!(re.len(), 6);
    // j_{0,1}^2 / 2
    assert!((re[0] - 2.891592).abs() < 1e-5, "{}", re[0]);
    let summary = read(&dir.path().join(SUMMARY_FILE));
    assert!(summary.contains("mode: hermitian-corrected"));
    assert!(summary.contains("hermitian = true"));
    assert!(summary.contains("status: ok"));
}

#[test]
fn evolve_reports_growth_slope() {
    let dir = tempfile::tempdir().unwrap();
    let text = "dt = 1e-3\nsteps = 1000\nomega = 1e4\n\
                [surface]\nkind = \"sphere-cap\"\nradius = 2.0\nrho_max = 1.0\n\
                [field]\nkind = \"frame-synthetic\"\na3 = 0.4\n[grid]\nn_points = 100\n";
    let c = config(text, dir.path());
    run_command(&c, Command::Evolve).unwrap();
    let summary = read(&dir.path().join(SUMMARY_FILE));
    let slope: f64 = summary
        .lines()
        .find_map(|l| l.split("log-norm slope = ").nth(1))
        .and_then(|r| r.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((slope - 0.2).abs() < 1e-4, "{slope}");
    assert!(summary.contains("decoupling: omega"));
    let csv = read(&dir.path().join("trace_m0.csv"));
    assert!(csv.starts_with("t,norm,log_norm\n"));
    assert_eq!(csv.lines().count(), 1002);
}

#[test]
fn gauge_check_flags_nothing_for_axial_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[surface]\nkind = \"gaussian\"\namplitude = 0.4\nsigma = 0.5\nrho_max = 1.0\n\
                [field]\nkind = \"axial-uniform\"\nb = 2.0\n[grid]\nn_points = 40\n";
    run_command(&config(text, dir.path()), Command::GaugeCheck).unwrap();
    assert!(read(&dir.path().join(SUMMARY_FILE)).contains("gauge: passed = true"));
    assert_eq!(read(&dir.path().join("gauge.csv")).lines().count(), 41);
}

#[test]
fn outputs_are_deterministic() {
    let text = "m_list = [0, 1, 2]\nk_eigen = 4\n\
                [surface]\nkind = \"paraboloid\"\na = 0.5\nrho_max = 1.0\n\
                [field]\nkind = \"frame-synthetic\"\na3 = 1.0\n[grid]\nn_points = 80\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_command(&config(text, a.path()), Command::Spectrum).unwrap();
    run_command(&config(text, b.path()), Command::Spectrum).unwrap();
    for m in 0..3 {
        let name = format!("spectrum_m{m}.csv");
        assert_eq!(read(&a.path().join(&name)), read(&b.path().join(&name)));
    }
}

#[test]
fn failing_command_leaves_error_in_summary() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("[surface]\nkind = \"flat\"\nrho_max = 1.0\n[grid]\nn_points = 20\n", dir.path());
    let err = run_command(&c, Command::Evolve).unwrap_err();
    assert!(err.to_string().contains("dt"));
    assert!(read(&dir.path().join(SUMMARY_FILE)).contains("status: error"));
    // no partial CSV without a marker
    if let Ok(csv) = std::fs::read_to_string(dir.path().join("trace_m0.csv")) {
        assert!(csv.lines().last().unwrap().starts_with(ERROR_MARKER));
    }
}

#[test]
fn binary_applies_flags_and_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[surface]\nkind = \"flat\"\nrho_max = 1.0\n").unwrap();
    let out = dir.path().join("out");
    let status = Process::new(env!("CARGO_BIN_EXE_curvband"))
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .args(["--m", "1,2", "--n-points", "64", "--mode", "as-written"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("spectrum_m1.csv").exists());
    assert!(out.join("spectrum_m2.csv").exists());
    assert!(!out.join("spectrum_m0.csv").exists());
    assert!(read(&out.join(SUMMARY_FILE)).contains("mode: as-written"));

    let bad = Process::new(env!("CARGO_BIN_EXE_curvband"))
        .args(["geometry", "--config"])
        .arg(&cfg)
        .args(["--n-points", "4"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("n_points ≥ 16"));

    let missing = Process::new(env!("CARGO_BIN_EXE_curvband")).arg("geometry").output().unwrap();
    assert!(!missing.status.success());
}
