use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn deltaprime(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deltaprime"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn resonance_scan_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = deltaprime(dir.path(), &["resonances", "--profile", "step", "--window", "0", "60"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let alphas: Vec<f64> = rows(&dir.path().join("resonances.csv")).iter().map(|r| r[0]).collect();
    assert_eq!(alphas.len(), 3);
    for (a, e) in alphas.iter().zip([0.0, 15.42, 49.96]) {
        assert!((a - e).abs() < 5e-3, "{a}");
    }
    assert!(dir.path().join("resonances.manifest.json").exists());
}

#[test]
fn scatter_on_resonance_matches_limit() {
    let dir = tempfile::tempdir().unwrap();
    let o = deltaprime(dir.path(), &["scatter", "--alpha", "15.418", "--eps", "1e-3", "--k", "1"]);
    assert!(o.status.success());
    let t2 = rows(&dir.path().join("scatter.csv"))[0][7];
    let o = deltaprime(dir.path(), &["theta", "--alpha", "15.418"]);
    assert!(o.status.success());
    let theta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("theta.json")).unwrap()).unwrap();
    let limit = theta["transmission_limit"].as_f64().unwrap();
    assert!((t2 - limit).abs() < 1e-2, "{t2} vs {limit}");
}

#[test]
fn scatter_sweep_has_all_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = deltaprime(dir.path(), &["scatter", "--alpha", "-3,4", "--eps", "0.1,0.01", "--k", "0.5,1,2"]);
    assert!(o.status.success());
    let r = rows(&dir.path().join("scatter.csv"));
    assert_eq!(r.len(), 12);
    for row in &r {
        let unit = row[3] * row[3] + row[4] * row[4] + row[5] * row[5] + row[6] * row[6];
        assert!((unit - 1.0).abs() < 1e-10);
    }
}

#[test]
fn classify_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = deltaprime(dir.path(), &["classify", "--profile", "step"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class"], "delta_prime_like");
    assert_eq!(v["c"], 1.0);
    assert_eq!(v["m0"], 0.0);
    assert_eq!(v["m1"], -1.0);
}

#[test]
fn profile_from_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    fs::write(
        &path,
        r#"{"label": "odd", "segments": [{"interval": [-1, 1], "coeffs": [0, -3.75, 0, 3.75]}]}"#,
    )
    .unwrap();
    let o = deltaprime(dir.path(), &["classify", "--profile-json", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class"], "delta_prime_like");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(deltaprime(dir.path(), &["bogus"]).status.code(), Some(2));
    assert_eq!(deltaprime(dir.path(), &["classify", "--profile", "nope"]).status.code(), Some(2));
    assert_eq!(deltaprime(dir.path(), &["dive", "--alpha", "0"]).status.code(), Some(4));
    assert_eq!(
        deltaprime(dir.path(), &["dive", "--profile", "even_parabola", "--alpha", "1"]).status.code(),
        Some(4)
    );
    // walls too close for the requested levels
    assert_eq!(
        deltaprime(dir.path(), &["spectrum", "--potential", "0,0,1", "--radius", "3", "--count", "6", "--coupling", "theta:1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        deltaprime(dir.path(), &["--rel-tol", "-1", "theta", "--alpha", "15.4"]).status.code(),
        Some(2)
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--mode", "perturbed", "--alpha", "5", "--eps", "0.02", "--count", "3"];
    assert!(deltaprime(a.path(), &args).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_deltaprime"))
        .env("PB_THREADS", "1")
        .arg("--out")
        .arg(b.path())
        .args(args)
        .output()
        .unwrap();
    assert!(out.status.success());
    let x = fs::read(a.path().join("spectrum.csv")).unwrap();
    let y = fs::read(b.path().join("spectrum.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn bad_thread_cap_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_deltaprime"))
        .env("PB_THREADS", "zero")
        .arg("--out")
        .arg(dir.path())
        .args(["classify"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = deltaprime(dir.path(), &["converge", "--alpha", "5", "--count", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest_path = dir.path().join("converge.manifest.json");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["tool"], "deltaprime");
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(manifest["invocation"]["command"]["Converge"]["alpha"], 5.0);
    let before = fs::read(dir.path().join("converge_eigenvalues.csv")).unwrap();
    fs::remove_file(dir.path().join("converge_eigenvalues.csv")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_deltaprime"))
        .args(["replay", manifest_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read(dir.path().join("converge_eigenvalues.csv")).unwrap(), before);
}

#[test]
fn interval_and_hypothesis_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = deltaprime(dir.path(), &["interval", "--alpha", "15.418", "--count", "3"]);
    assert!(o.status.success());
    for r in rows(&dir.path().join("interval.csv")) {
        assert!(r[4] < 1e-3 * r[3], "{r:?}");
    }
    let o = deltaprime(dir.path(), &["hypothesis", "--profiles", "step", "--window", "-20", "20"]);
    assert!(o.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("hypothesis.json")).unwrap()).unwrap();
    assert_eq!(report["profiles"][0]["all_satisfied"], true);
    assert_eq!(report["even"]["passed"], true);
    assert!(dir.path().join("hypothesis_hypothesis.csv").exists());
}

#[test]
fn dive_reports_scaled_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = deltaprime(dir.path(), &["dive", "--alpha", "1"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("dive.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["mu"].as_f64().unwrap() < 0.0);
}
