use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn mmot(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmot"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_two_point_three_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let mps = dir.path().join("lp.mps");
    let o = mmot(
        dir.path(),
        &[
            "solve",
            "--mu",
            path_str(&fixture("uniform2.json")),
            "--cost",
            "gaussian:s=0.7071067811865476",
            "--n",
            "3",
            "--mps",
            path_str(&mps),
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).contains("F_3 = 0.578586"), "{}", stdout(&o));
    let exact = (1.0 + 2.0 * (-1.0f64).exp()) / 3.0;
    let doc = read_json(&dir.path().join("result.json"));
    let value = doc["report"]["value"].as_f64().unwrap();
    assert!((value - exact).abs() < 1e-9, "{value}");
    assert!(fs::read_to_string(&mps).unwrap().starts_with("NAME"));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn solve_with_rounded_width_is_close() {
    let dir = tempfile::tempdir().unwrap();
    let mu = fixture("uniform2.json");
    let o = mmot(
        dir.path(),
        &["solve", "--mu", path_str(&mu), "--cost", "gaussian:s=0.7071", "--n", "3", "--formulation", "reduced"],
    );
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let value = read_json(&dir.path().join("result.json"))["report"]["value"].as_f64().unwrap();
    assert!((value - 0.578586).abs() < 1e-5, "{value}");
}

#[test]
fn repcheck_anticorrelated() {
    let dir = tempfile::tempdir().unwrap();
    let mu2 = fixture("anticorr.json");
    let o = mmot(dir.path(), &["repcheck", "--mu2", path_str(&mu2), "--n", "3"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert_eq!(stdout(&o).lines().next(), Some("infeasible"));
    let answer = &read_json(&dir.path().join("result.json"))["answer"];
    assert_eq!(answer["verdict"], "infeasible");
    assert_eq!(answer["certificate_verified"], true);
    assert!(answer["certificate"]["margin"].as_f64().unwrap() > 0.0);

    let o = mmot(dir.path(), &["repcheck", "--mu2", path_str(&mu2), "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("feasible"));
}

#[test]
fn lift_and_fourier() {
    let dir = tempfile::tempdir().unwrap();
    let o = mmot(dir.path(), &["lift", "--gamma", path_str(&fixture("gamma3.json")), "--k", "2"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let doc = read_json(&dir.path().join("result.json"));
    // product of uniform two-point: off-diagonal mass 1/2, so tv = (2/3) (1/2)
    let tv = doc["pair_bound"]["tv"].as_f64().unwrap();
    assert!((tv - 1.0 / 3.0).abs() < 1e-12, "{tv}");

    let o = mmot(
        dir.path(),
        &["fourier", "--mixture", path_str(&fixture("mixture.json")), "--cost", "gaussian:s=1"],
    );
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let dec = &read_json(&dir.path().join("result.json"))["decomposition"];
    assert!(dec["identity_error"].as_f64().unwrap() < 1e-12);
    assert!(dec["variance_term"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn experiment_is_deterministic() {
    let config = fixture("convergence.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = mmot(a.path(), &["--jobs", "1", "experiment", path_str(&config)]);
    let ob = mmot(b.path(), &["--jobs", "3", "experiment", path_str(&config)]);
    assert_eq!(oa.status.code(), Some(0), "{oa:?}");
    assert_eq!(ob.status.code(), Some(0), "{ob:?}");
    for name in ["convergence.csv", "convergence.svg", "result.json", "manifest.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    let manifest = read_json(&a.path().join("manifest.json"));
    assert_eq!(manifest["data_files"], 1);
    let names: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["convergence.csv", "convergence.svg", "result.json"]);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = mmot(dir.path(), &["--json-errors", "experiment", path_str(&fixture("bad.toml"))]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains("colour"));

    let mu = fixture("uniform2.json");
    let o = mmot(dir.path(), &["solve", "--mu", path_str(&mu), "--cost", "nope", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mmot(dir.path(), &["repcheck", "--mu2", "/nonexistent.json", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mmot(dir.path(), &["--json-errors", "frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(serde_json::from_slice::<Value>(&o.stderr).is_ok());
}

#[test]
fn domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let mu = fixture("uniform2.json");
    let o = mmot(
        dir.path(),
        &["--budget", "3", "--json-errors", "solve", "--mu", path_str(&mu), "--cost", "coulomb", "--n", "6"],
    );
    assert_eq!(o.status.code(), Some(1), "{o:?}");
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "budget");
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = mmot(dir.path(), &["--seed", "11", "validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    assert_eq!(read_json(&dir.path().join("result.json"))["seed"], 11);
}
