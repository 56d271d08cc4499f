use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_disperse"));
    cmd.env_remove("DISPERSE_QUAD_RELTOL");
    cmd
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_in(dir: &Path, files: &[PathBuf]) -> Output {
    let mut cmd = bin();
    cmd.arg("run");
    cmd.args(files);
    cmd.arg("-o").arg(dir);
    cmd.output().unwrap()
}

fn report(dir: &Path, id: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{id}.report.json"))).unwrap()).unwrap()
}

fn gate<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["gates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|g| g["name"] == name)
        .unwrap_or_else(|| panic!("no gate {name} in {r}"))
}

fn write_scenario(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.json");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn drude_residual_reaches_the_closed_form_limit() {
    let out = TempDir::new().unwrap();
    let o = run_in(out.path(), &[scenario("drude_residual.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let r = report(out.path(), "drude_residual");
    assert_eq!(r["status"], "pass");
    let d_plus = r["result"]["horizon"]["d_plus"].as_f64().unwrap();
    assert!((d_plus - 7.926_654_6).abs() <= 1e-5, "{d_plus}");
    assert!(gate(&r, "d_plus_at_horizon")["passed"].as_bool().unwrap());

    let csv = fs::read_to_string(out.path().join("drude_residual.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,E,D_conv,D_spec,D_closed,flags"));
    assert_eq!(lines.count(), 201);
}

#[test]
fn lorentz_paths_agree() {
    let out = TempDir::new().unwrap();
    let o = run_in(out.path(), &[scenario("lorentz_consistency.json")]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(out.path(), "lorentz_consistency");
    let gates = r["gates"].as_array().unwrap();
    assert_eq!(gates.len(), 3);
    for g in gates {
        assert!(g["value"].as_f64().unwrap() <= 1e-6, "{g}");
    }
}

#[test]
fn every_bundled_scenario_passes() {
    let out = TempDir::new().unwrap();
    let mut files: Vec<PathBuf> = fs::read_dir(scenario(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    assert!(files.len() >= 6);
    let mut cmd = bin();
    cmd.args(["run", "--jobs", "4", "-o"]).arg(out.path()).args(&files);
    let o = cmd.output().unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS ")).count(), files.len());

    // scenarios report in the order given, whatever the job count
    let ids: Vec<&str> = stdout.lines().map(|l| l.split(' ').nth(1).unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn list_covers_every_experiment() {
    let o = run(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().count() >= 6);
    for exp in [
        "kernel",
        "recovery",
        "displacement",
        "consistency",
        "limit-probe",
        "kk",
        "specialfn-selftest",
    ] {
        assert!(
            stdout.lines().any(|l| l.split_whitespace().nth(1) == Some(exp)),
            "{exp} missing from\n{stdout}"
        );
    }
    assert!(stdout.contains("drude_residual") && stdout.contains("lorentz_consistency"));
}

#[test]
fn describe_known_and_unknown() {
    let o = run(&["describe", "limit-probe"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("ladders.theta") && text.contains("ladders.T"));

    let o = run(&["describe", "fourier"]);
    assert_ne!(o.status.code(), Some(0));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("kernel") && err.contains("limit-probe"), "{err}");
}

#[test]
fn missing_beta_is_a_malformed_scenario() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(
        dir.path(),
        r#"{"id": "nobeta", "experiment": "displacement",
            "model": {"type": "drude", "omega_p": 1.0, "gamma": 0.5},
            "pulse": {"E0": 1.0},
            "grids": {"t": {"min": -1.0, "max": 1.0, "n": 3}}}"#,
    );
    let o = run_in(&dir.path().join("out"), &[path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("pulse.beta: required"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_json_and_missing_files_exit_2() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(dir.path(), "{ not json");
    assert_eq!(run_in(dir.path(), &[path]).status.code(), Some(2));
    assert_eq!(
        run_in(dir.path(), &[dir.path().join("absent.json")]).status.code(),
        Some(2)
    );
}

#[test]
fn tight_gate_fails_with_exit_1() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(
        dir.path(),
        r#"{"id": "coarse", "experiment": "recovery",
            "model": {"type": "drude", "omega_p": 1.0, "gamma": 0.5},
            "grids": {"tau": {"min": 1.0, "max": 2.0, "n": 2}},
            "ladders": {"theta": [0.1, 0.05, 0.025]},
            "tolerances": {"quad_rel": 1e-12, "recovery": 1e-6}}"#,
    );
    let o = run_in(dir.path(), &[path]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(dir.path(), "coarse");
    assert_eq!(r["status"], "gate_failure");
    assert!(gate(&r, "recovery_rel_err")["value"].as_f64().unwrap() > 1e-6);
}

#[test]
fn numerical_failure_exits_3() {
    // η = 1e-9 stretches the plasma kernel's horizon past what the
    // quadrature can resolve at 1e-14.
    let dir = TempDir::new().unwrap();
    let path = write_scenario(
        dir.path(),
        r#"{"id": "diverge", "experiment": "kernel",
            "model": {"type": "plasma", "omega_p": 1.0},
            "grids": {"tau": {"max": 5.0, "n": 5}, "omega": {"min": 0.5, "max": 1.0, "n": 2}},
            "ladders": {"eta": [1e-1, 1e-5, 1e-9]},
            "tolerances": {"quad_rel": 1e-14}}"#,
    );
    let o = run_in(dir.path(), &[path]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(dir.path(), "diverge");
    assert_eq!(r["status"], "numerical_failure");
    assert!(r["error"].is_string());
}

#[test]
fn outputs_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let files = [
        scenario("drude_spectral_offset.json"),
        scenario("theta_consistency.json"),
        scenario("drude_recovery.json"),
    ];
    assert_eq!(run_in(a.path(), &files).status.code(), Some(0));
    let mut cmd = bin();
    cmd.args(["run", "--jobs", "3", "-o"]).arg(b.path()).args(&files);
    assert_eq!(cmd.output().unwrap().status.code(), Some(0));
    for id in ["drude_spectral_offset", "theta_consistency", "drude_recovery"] {
        for ext in ["csv", "report.json"] {
            let name = format!("{id}.{ext}");
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap(),
                "{name} differs"
            );
        }
    }
}

#[test]
fn env_tolerance_applies_when_scenario_is_silent() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(
        dir.path(),
        r#"{"id": "env", "experiment": "displacement",
            "model": {"type": "regularized_drude", "omega_p": 1.0, "gamma": 0.5, "theta": 0.1},
            "pulse": {"E0": 1.0, "beta": 0.2},
            "grids": {"t": {"min": -1.0, "max": 1.0, "n": 3}}}"#,
    );
    let o = bin()
        .env("DISPERSE_QUAD_RELTOL", "1e-7")
        .args(["run", path.to_str().unwrap(), "-o", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(dir.path(), "env")["scenario"]["tolerances"]["quad_rel"], 1e-7);

    let o = bin()
        .env("DISPERSE_QUAD_RELTOL", "loose")
        .args(["run", path.to_str().unwrap(), "-o", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_writes_artifacts() {
    let dir = TempDir::new().unwrap();
    let o = bin()
        .args(["selftest-specialfn", "-o"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "specialfn-selftest");
    assert_eq!(r["gates"].as_array().unwrap().len(), 6);
    let csv = fs::read_to_string(dir.path().join("specialfn-selftest.csv")).unwrap();
    assert!(csv.starts_with("x,erf,erfc,erfcx\n"));
}
