//! End-to-end tests of the `pistonpipe` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pistonpipe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pistonpipe"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("case.ini");
    std::fs::write(&path, text).unwrap();
    path
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn read_series(path: &Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect()
}

const OUTFLOW: &str = "\
[numerics]
n_cells = 32

[schedule]
t_star = 0
t_end = 20
u_out = constant -0.5
";

#[test]
fn equilibrium_defaults_complete() {
    let tmp = TempDir::new().unwrap();
    let out = pistonpipe(tmp.path(), &["--cells", "32", "--out", "res", "run"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(&tmp.path().join("res"));
    assert_eq!(s["exit_code"], 0);
    let series = read_series(&tmp.path().join("res/series.csv"));
    let last = series.last().unwrap();
    assert!((last[0] - 1.0).abs() < 1e-12);
    assert!((last[1] - 1.0).abs() < 1e-10, "b drifted to {}", last[1]);
}

#[test]
fn strong_outflow_ends_after_the_bound() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), OUTFLOW);
    let out = pistonpipe(
        tmp.path(),
        &["--config", cfg.to_str().unwrap(), "--out", ".", "run"],
    );
    let code = out.status.code().unwrap();
    assert!(
        code == 2 || code == 3,
        "exit {code}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(tmp.path());
    let t = s["event_time"].as_f64().unwrap();
    let bound = s["contact_time_lower_bound"].as_f64().unwrap();
    assert!(t >= bound, "event {t} before bound {bound}");
    assert_eq!(s["bound_respected"], true);
}

#[test]
fn repeated_runs_write_identical_series() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[numerics]\nn_cells = 32\n[schedule]\nt_end = 0.5\nu_in = sinusoid 0.2 0.2 0.25\n",
    );
    let cfg = cfg.to_str().unwrap();
    for dir in ["a", "b"] {
        let out = pistonpipe(tmp.path(), &["--config", cfg, "--out", dir, "run"]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(tmp.path().join("a/series.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("b/series.csv")).unwrap();
    assert_eq!(a, b);

    let out = pistonpipe(
        tmp.path(),
        &["--config", cfg, "--out", "c", "--seed-free", "run"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn resume_reproduces_the_remaining_series() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[numerics]\nn_cells = 32\n\
         [initial]\nb0 = 1.1\nrho = constant 0.9090909090909091\n\
         [schedule]\nt_star = 0.3\nt_end = 0.6\nu_out = ramp 0.3 0 0.5 -0.3\n\
         [outputs]\nsnapshot_interval = 0.2\n",
    );
    let cfg = cfg.to_str().unwrap();
    let full = pistonpipe(tmp.path(), &["--config", cfg, "--out", "full", "run"]);
    assert_eq!(
        full.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&full.stderr)
    );
    let snaps = summary(&tmp.path().join("full"))["snapshots"]
        .as_array()
        .unwrap()
        .clone();
    assert!(snaps.len() >= 2);
    let snap = tmp.path().join("full").join(snaps[0].as_str().unwrap());

    let resumed = pistonpipe(
        tmp.path(),
        &[
            "--config",
            cfg,
            "--out",
            "resumed",
            "run",
            "--resume",
            snap.to_str().unwrap(),
        ],
    );
    assert_eq!(
        resumed.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&resumed.stderr)
    );

    let full = read_series(&tmp.path().join("full/series.csv"));
    let tail = read_series(&tmp.path().join("resumed/series.csv"));
    assert!(!tail.is_empty());
    let start = full
        .iter()
        .position(|r| (r[0] - tail[0][0]).abs() < 1e-14)
        .expect("resume time in full series");
    assert_eq!(full.len() - start, tail.len());
    for (a, b) in full[start..].iter().zip(&tail) {
        for (x, y) in a.iter().zip(b) {
            assert!(
                (x.is_nan() && y.is_nan()) || (x - y).abs() <= 1e-12 * x.abs().max(1.0),
                "{x} vs {y}"
            );
        }
    }
}

#[test]
fn resume_rejects_a_different_grid() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[numerics]\nn_cells = 16\n[schedule]\nt_end = 0.2\n[outputs]\nsnapshot_interval = 0.1\n",
    );
    let cfg = cfg.to_str().unwrap();
    assert_eq!(
        pistonpipe(tmp.path(), &["--config", cfg, "run"])
            .status
            .code(),
        Some(0)
    );
    let out = pistonpipe(
        tmp.path(),
        &[
            "--config",
            cfg,
            "--cells",
            "32",
            "--out",
            "x",
            "run",
            "--resume",
            "out/snapshot_0000.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("16 cells"));
}

#[test]
fn invalid_gamma_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[params]\ngamma = 0.9\n");
    let out = pistonpipe(tmp.path(), &["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("params.gamma") && err.contains("gamma > 1"),
        "{err}"
    );
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn positive_tabulated_outflow_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("out.csv"), "t,u\n0,-0.2\n0.5,0.1\n1,-0.2\n").unwrap();
    let cfg = write_config(tmp.path(), "[schedule]\nt_end = 1\nu_out = table out.csv\n");
    let out = pistonpipe(tmp.path(), &["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("schedule.u_out") && err.contains("u_out <= 0"),
        "{err}"
    );
}

#[test]
fn unknown_key_lists_valid_keys() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[params]\nviscosity = 1\n");
    let out = pistonpipe(tmp.path(), &["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu"));
}

#[test]
fn bad_usage_exits_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        pistonpipe(tmp.path(), &["frobnicate"]).status.code(),
        Some(1)
    );
    assert_eq!(
        pistonpipe(tmp.path(), &["--cells", "many", "run"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn oversized_first_step_is_shortened() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[numerics]\nn_cells = 32\ndt_initial = 0.5\ndt_max = 0.5\n[initial]\nb0 = 1.1\nrho = constant 0.9090909090909091\n[schedule]\nt_end = 0.3\n",
    );
    let out = pistonpipe(tmp.path(), &["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(&tmp.path().join("out"));
    assert!(s["stats"]["rejections"].as_u64().unwrap() > 0, "{s}");
}

#[test]
fn closed_pipe_estimate_is_unbounded() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[numerics]\nn_cells = 32\n[schedule]\nt_end = 0.5\n",
    );
    let out = pistonpipe(
        tmp.path(),
        &["--config", cfg.to_str().unwrap(), "estimate-contact"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("unbounded"));
    let est: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("out/contact_estimate.json")).unwrap(),
    )
    .unwrap();
    assert!(est["lower_bound"].is_null());
}

#[test]
fn sweep_bounds_decrease() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), OUTFLOW);
    let out = pistonpipe(
        tmp.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "estimate-contact",
            "--sweep",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let rows: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("out/contact_sweep.json")).unwrap(),
    )
    .unwrap();
    let bounds: Vec<f64> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["estimate"]["lower_bound"].as_f64().unwrap())
        .collect();
    assert_eq!(bounds.len(), 10);
    assert!(bounds.windows(2).all(|w| w[1] <= w[0]), "{bounds:?}");
}

#[test]
fn verify_single_suite() {
    let tmp = TempDir::new().unwrap();
    let out = pistonpipe(tmp.path(), &["verify", "mass"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        stdout
            .lines()
            .filter(|l| l.starts_with("criterion"))
            .count(),
        1
    );
    assert!(stdout.contains("PASS"));
}

#[test]
fn shipped_configs_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("ini") {
            continue;
        }
        seen += 1;
        let tmp = TempDir::new().unwrap();
        let out = pistonpipe(
            tmp.path(),
            &[
                "--config",
                path.to_str().unwrap(),
                "--cells",
                "32",
                "--out",
                ".",
                "run",
            ],
        );
        let code = out.status.code().unwrap();
        assert!(
            matches!(code, 0 | 2 | 3),
            "{}: exit {code}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
        assert_ne!(
            summary(tmp.path())["bound_respected"],
            false,
            "{}",
            path.display()
        );
    }
    assert!(seen >= 3);
}
