use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn qflow(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["qflow"];
    full.extend_from_slice(args);
    let code = qflow_cli::execute(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn box_scenario_meets_its_residual_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("box");
    let (code, stdout, stderr) = qflow(&[
        "run",
        scenario("box_n1.cfg").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let r = report(&out);
    assert_eq!(r["pass"], true);
    let qhj = &r["checks"]["qhj_residual"];
    assert!(qhj["Linf"].as_f64().unwrap() <= 1e-8, "{qhj}");
    assert_eq!(qhj["tolerance"], 1e-8);
    assert_eq!(r["tolerances"]["config"]["qhj_residual"], 1e-8);
    assert_eq!(r["tolerances"]["defaults"]["qhj_residual"], 1e-5);
    for f in [
        "madelung.csv",
        "weak.csv",
        "wigner.csv",
        "flowlines.csv",
        "flowlines.gp",
        "trace/manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let listed: Vec<&str> = r["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(listed.contains(&"report.json") && listed.contains(&"projection.csv"));
}

/// Positions per line id from a 1D flow-line CSV.
fn read_lines(path: &Path) -> BTreeMap<usize, Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("line_id,t,x,v,q,e_bohm,status"));
    let mut out: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        out.entry(cols[0].parse().unwrap())
            .or_default()
            .push(cols[2].parse().unwrap());
    }
    out
}

#[test]
fn two_slit_lines_never_cross_the_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ts");
    let (code, stdout, stderr) = qflow(&[
        "run",
        scenario("two_slit.cfg").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let lines = read_lines(&out.join("flowlines.csv"));
    assert_eq!(lines.len(), 10_000);
    let crossings = lines
        .values()
        .filter(|xs| xs.iter().any(|x| x.signum() != xs[0].signum()))
        .count();
    assert_eq!(crossings, 0);
    let r = report(&out);
    assert_eq!(r["checks"]["axis_crossings"]["count"], 0.0);
    assert!(r["checks"]["endpoint_l1"]["L1"].as_f64().unwrap() <= 0.05);
}

#[test]
fn seed_count_flag_sets_the_bundle_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ts");
    let (code, _, stderr) = qflow(&[
        "run",
        scenario("two_slit.cfg").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed-count",
        "200",
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(read_lines(&out.join("flowlines.csv")).len(), 200);
    let r = report(&out);
    // too few lines for the histogram check; it is reported as information
    assert!(r["checks"].get("endpoint_l1").is_none());
    assert!(r["info"]["endpoint_l1"].is_number());
}

#[test]
fn hydrogen_force_balance_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h");
    let (code, stdout, _) = qflow(&[
        "run",
        "--case",
        "hydrogen-1s",
        "--check",
        "force-balance",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("oracle.force-balance"));
    let r = report(&out);
    let checks = r["checks"].as_object().unwrap();
    assert_eq!(checks.len(), 1);
    let fb = &checks["oracle.force-balance"];
    assert!(fb["max_error"].as_f64().unwrap() <= 1e-6 && fb["pass"] == true);
}

#[test]
fn hbar_flag_rescales_the_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let (code, _, _) = qflow(&[
        "run",
        "--case",
        "box",
        "--hbar",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r = report(&out);
    let e = r["info"]["energy"].as_f64().unwrap();
    assert!((e - 0.25 * std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    assert_eq!(r["info"]["hbar"], 0.5);
}

#[test]
fn list_and_describe() {
    let (code, stdout, _) = qflow(&["list-cases"]);
    assert_eq!(code, 0);
    for name in ["box", "delta-well", "hydrogen-1s", "entangled-gaussian"] {
        assert!(
            stdout.lines().any(|l| l.trim_start().starts_with(name)),
            "{name}"
        );
    }
    let (code, stdout, _) = qflow(&["describe", "box"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("Q_n = n^2 hbar^2 pi^2 / (2 m a^2)"));
    assert!(stdout.contains("tolerance 1e-6"));
    let (code, stdout, _) = qflow(&["describe", "two_slit"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("kind = \"two-slit\""));
    let (code, _, stderr) = qflow(&["describe", "unknown"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown"));
}

#[test]
fn config_errors_are_line_anchored() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    let src = fs::read_to_string(scenario("box_n1.cfg"))
        .unwrap()
        .replace("madelung = true", "madelung = false");
    fs::write(&bad, &src).unwrap();
    let (code, _, stderr) = qflow(&["validate-config", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    let line = src
        .lines()
        .position(|l| l.starts_with("trajectories"))
        .unwrap()
        + 1;
    assert!(
        stderr.contains(&format!("line {line}: trajectories require")),
        "{stderr}"
    );

    fs::write(
        &bad,
        "name = \"x\"\n[initial]\nkind = \"gaussian\"\nx0 = 0.0\nwidth = 1.0\n",
    )
    .unwrap();
    let (code, _, stderr) = qflow(&["run", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(
        stderr.contains("line 5") && stderr.contains("width"),
        "{stderr}"
    );

    let (code, stdout, _) = qflow(&["validate-config", scenario("box_n1.cfg").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("ok"));
}

#[test]
fn numerical_guard_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("guard.cfg");
    fs::write(
        &cfg,
        "name = \"guard\"\n[grid]\nboundary = \"periodic\"\nn = 64\nx_min = -5.0\nx_max = 5.0\n\
         [potential]\nkind = \"quartic\"\nlambda = 100.0\n[initial]\nkind = \"gaussian\"\nx0 = 0.0\nsigma = 1.0\n\
         [evolution]\ndt = 0.1\nsteps = 3\n",
    )
    .unwrap();
    let (code, _, stderr) = qflow(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("phase-wrap"), "{stderr}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qflow(&["frobnicate"]).0, 2);
    assert_eq!(qflow(&["run"]).0, 2);
    assert_eq!(qflow(&["run", "--case", "muonium"]).0, 2);
    assert_eq!(qflow(&["run", "--case", "box", "--hbar", "-1"]).0, 2);
    assert_eq!(qflow(&["--help"]).0, 0);
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let (code, _, _) = qflow(&[
            "run",
            scenario("box_n1.cfg").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let fa = files(&a);
    assert!(fa.len() > 20);
    for f in fa {
        let rel = f.strip_prefix(&a).unwrap();
        assert_eq!(
            fs::read(&f).unwrap(),
            fs::read(b.join(rel)).unwrap(),
            "{}",
            rel.display()
        );
    }
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qflow");
    let ok = Command::new(bin).arg("list-cases").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin)
        .args(["describe", "unknown"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
