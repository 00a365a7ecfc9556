//! End-to-end runs of the `recoherence` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_recoherence");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("RECOHERENCE_OUT")
        .output()
        .expect("binary starts")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

/// Short dephasing round trip with both the closed form and the mode oracle.
const SHORT_ROUNDTRIP: &str = r#"
scenario = "dephasing"
sample_dt = 0.1

[bath]
mass = 10.0
cutoff = 0.05

[schedule]
segments = [
  { kind = "smooth-ramp", duration = 3.0, to = 1.0 },
  { kind = "hold", duration = 1.0 },
  { kind = "smooth-ramp", duration = 3.0, to = 0.0 },
]

[dephasing]
initial = [1.0, 0.0, 0.0]
analytic = true
oracle = true
oracle_dt = 0.01
"#;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("cfg.toml");
    fs::write(&p, body).unwrap();
    p
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn repeated_runs_are_byte_identical_and_digests_match() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SHORT_ROUNDTRIP);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    }
    let csvs: Vec<PathBuf> = files(&a)
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    let names: Vec<_> = csvs.iter().map(|p| p.file_name().unwrap().to_owned()).collect();
    assert!(
        names.contains(&"analytic.csv".into()) && names.contains(&"oracle.csv".into()),
        "{names:?}"
    );
    for p in &csvs {
        let other = b.join(p.file_name().unwrap());
        assert_eq!(fs::read(p).unwrap(), fs::read(other).unwrap(), "{}", p.display());
    }

    let manifest: toml::Value = fs::read_to_string(a.join("manifest.toml")).unwrap().parse().unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), csvs.len());
    for rec in outputs {
        let bytes = fs::read(a.join(rec["path"].as_str().unwrap())).unwrap();
        assert_eq!(rec["bytes"].as_integer().unwrap() as usize, bytes.len());
        assert_eq!(rec["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    assert_eq!(manifest["scenario"].as_str(), Some("dephasing"));
    assert!(manifest["points"][0]["diagnostics"]["adiabaticity_metric"]
        .as_float()
        .is_some());
    assert!(!a.join("manifest.toml.partial").exists());
}

#[test]
fn theta_sweep_writes_one_point_per_value() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sweep");
    let o = run(&[
        "run",
        "--scenario",
        "sudden",
        "--sweep",
        "theta=0:pi:36",
        "--workers",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let points = files(&out).into_iter().filter(|p| p.is_dir()).count();
    assert_eq!(points, 36);
    let index = fs::read_to_string(out.join("index.csv")).unwrap();
    let mut lines = index.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("point,directory,sudden.theta,"), "{header}");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 36);
    let last_theta: f64 = rows[35].split(',').nth(2).unwrap().parse().unwrap();
    assert!((last_theta - std::f64::consts::PI).abs() < 1e-15);
    assert!(out.join("point_0035").join("rotation.csv").is_file());
}

#[test]
fn sweep_results_do_not_depend_on_worker_count() {
    let tmp = TempDir::new().unwrap();
    let (one, many) = (tmp.path().join("one"), tmp.path().join("many"));
    for (out, w) in [(&one, "1"), (&many, "4")] {
        let o = run(&[
            "run",
            "--scenario",
            "sudden",
            "--sweep",
            "theta=0,1,2,3",
            "--workers",
            w,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    }
    assert_eq!(
        fs::read(one.join("index.csv")).unwrap(),
        fs::read(many.join("index.csv")).unwrap()
    );
}

fn trace(dir: &Path, name: &str, rows: &[[f64; 3]]) -> PathBuf {
    let p = dir.join(name);
    let mut s = String::from("t,x,y\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r[0], r[1], r[2]));
    }
    fs::write(&p, s).unwrap();
    p
}

#[test]
fn compare_reports_agreement_and_the_location_of_a_mismatch() {
    let tmp = TempDir::new().unwrap();
    let rows = [[0.0, 1.0, 2.0], [0.5, 1.5, 2.5], [1.0, 2.0, 3.0]];
    let a = trace(tmp.path(), "a.csv", &rows);
    let mut bumped = rows;
    bumped[1][2] += 1e-3;
    let b = trace(tmp.path(), "b.csv", &bumped);
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());

    let same = run(&["compare", a, a]);
    assert_eq!(code(&same), 0, "{}", text(&same.stdout));

    let diff = run(&["compare", a, b]);
    assert_eq!(code(&diff), 3);
    let report = text(&diff.stdout);
    let y = report.lines().find(|l| l.starts_with('y')).unwrap();
    assert!(
        y.contains("row 1") && y.contains("t = 5e-1") && y.contains("FAIL"),
        "{report}"
    );

    let loose = run(&["compare", a, b, "--tol", "1e-2"]);
    assert_eq!(code(&loose), 0);

    let only_x = run(&["compare", a, b, "--column", "x"]);
    assert_eq!(code(&only_x), 0);
}

#[test]
fn compare_rejects_missing_columns_and_bad_cells() {
    let tmp = TempDir::new().unwrap();
    let a = trace(tmp.path(), "a.csv", &[[0.0, 1.0, 2.0]]);
    let a = a.to_str().unwrap();
    let o = run(&["compare", a, a, "--column", "z"]);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stderr).contains("`z`"));

    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "t,x,y\n0,oops,1\n").unwrap();
    let o = run(&["compare", a, bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stderr).contains("oops"));
}

#[test]
fn unknown_config_key_is_rejected_with_its_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "scenario = \"sudden\"\n\n[sudden]\nthetta = 1.0\n");
    let out = tmp.path().join("never");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = text(&o.stderr);
    assert!(err.contains("thetta") && err.contains("line 4"), "{err}");
    assert!(!out.exists());
}

#[test]
fn invalid_sweep_point_stops_the_run_before_any_output() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("never");
    let o = run(&[
        "run",
        "--scenario",
        "dephasing",
        "--sweep",
        "bath.mass=1,-1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1, "{}", text(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&run(&["run"])), 1);
    assert_eq!(code(&run(&["run", "--example", "no_such_example"])), 1);
    assert_eq!(
        code(&run(&["run", "--example", "sudden_flip", "--scenario", "dephasing"])),
        1
    );
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn output_root_variable_places_relative_directories() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(BIN)
        .args(["run", "--example", "sudden_flip"])
        .env("RECOHERENCE_OUT", tmp.path())
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let manifests: Vec<PathBuf> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.join("manifest.toml").is_file())
        .collect();
    assert_eq!(manifests.len(), 1, "{:?}", files(tmp.path()));
    assert!(text(&o.stdout).contains(&tmp.path().display().to_string()));
}

#[test]
fn list_examples_names_every_bundled_config() {
    let o = run(&["list-examples"]);
    assert_eq!(code(&o), 0);
    let listing = text(&o.stdout);
    for name in [
        "roundtrip",
        "sudden_decoupling",
        "cutoff_sweep",
        "theta_sweep",
        "calibrate",
        "ode_match",
    ] {
        assert!(listing.lines().any(|l| l.starts_with(name)), "{name}");
    }
    assert_eq!(listing.lines().count(), 12);
}
