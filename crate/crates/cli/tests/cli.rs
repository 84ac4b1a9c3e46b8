use std::fs;
use std::process::Command;

use tunneltime_cli::{read_curves, run_scenario, validate_config, RunSummary};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tunneltime"))
}

#[test]
fn lists_every_scenario() {
    let out = bin().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig1a", "fig1b", "fig2", "fig3a", "fig3b", "fig4", "custom"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from\n{text}");
    }
}

#[test]
fn validate_prints_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "scenario = \"fig3b\"\n[grid]\nn = 11\n").unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["grid"]["n"], 11);
    assert_eq!(v["regime"], "relativistic");
    assert_eq!(v["contour"]["method"], "steepest_descent");
}

#[test]
fn bad_config_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "scenario = \"custom\"\nregime = \"relativistic\"\nkappa = 140.0\nratio = 1.0\n").unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa"));

    fs::write(&path, "[grid]\nspacing = \"log\"\n").unwrap();
    let out = bin().args(["run", "--scenario", "fig1a", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn run_writes_into_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, "[grid]\nn = 26\n").unwrap();
    let out = bin()
        .args(["run", "--scenario", "fig1b", "--threads", "2", "--config"])
        .arg(&cfg)
        .env("TUNNELTIME_OUT", dir.path().join("env_out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("env_out/fig1b_curves.txt").exists());
    assert!(dir.path().join("env_out/fig1b_summary.json").exists());
}

#[test]
fn summary_matches_curves_file() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig1b", "fig3b", "fig4"] {
        let cfg = validate_config("", Some(name)).unwrap();
        let r = run_scenario(&cfg, dir.path()).unwrap();
        let s: RunSummary = serde_json::from_str(&fs::read_to_string(&r.summary_path).unwrap()).unwrap();
        let d = s.delay.or(s.z_offset).unwrap();
        let (lo, hi) = d.plateau_window;
        let rows = read_curves(&fs::read_to_string(&r.curves_path).unwrap()).unwrap();
        assert_eq!(rows.len(), cfg.grid.n);
        assert_eq!(rows[0][1], 0.0, "curve must start at zero");
        let delta: Vec<f64> = rows.iter().filter(|r| r[0] >= lo && r[0] <= hi).map(|r| r[3]).collect();
        let mean = delta.iter().sum::<f64>() / delta.len() as f64;
        assert_eq!(mean, d.tau_w, "{name}");
        if name != "fig4" {
            assert_eq!(s.tau_w, Some(mean));
        }
    }
}

#[test]
fn scan_file_has_momentum_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = validate_config("[scan]\nn = 41\n", Some("fig2")).unwrap();
    let r = run_scenario(&cfg, dir.path()).unwrap();
    let rows = read_curves(&fs::read_to_string(&r.curves_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 41);
    let top = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    assert_eq!(top, 1.0);
    let text = fs::read_to_string(&r.curves_path).unwrap();
    assert!(text.contains(&format!("pz_star = {:.16e}", r.summary.pz_star.unwrap())));
}
