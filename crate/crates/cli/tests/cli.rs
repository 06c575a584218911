use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fbx(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbx")).current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

const JULIA: &str = r#"{"measure":{"variant":"julia","lambda":2.9}}"#;

#[test]
fn dims_writes_spectrum_with_header() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "julia29.json", JULIA);
    let o = fbx(d.path(), &["dims", "--manifest", "julia29.json", "--q", "-2:0.25:3", "--out", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.path().join("out/dims.csv")).unwrap();
    assert!(csv.starts_with("# fbx "));
    assert!(csv.contains("# manifest_sha256: "));
    assert!(csv.contains(r#"# measure: {"lambda":2.9,"variant":"julia"}"#));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "q,D_q,residual,method");
    assert_eq!(rows.len(), 1 + 21);
    let d2: f64 = rows.iter().find(|r| r.starts_with("2.0000000000000000e0")).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((d2 - 0.6112).abs() < 1e-4);
}

#[test]
fn identical_manifests_give_identical_bytes() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "m.json", r#"{"measure":{"variant":"arcsine"},"t":"0:0.5:10","n":8}"#);
    for out in ["a", "b"] {
        assert_eq!(fbx(d.path(), &["evolve", "--manifest", "m.json", "--out", out]).status.code(), Some(0));
    }
    for f in ["evolve.csv", "evolve.json"] {
        assert_eq!(fs::read(d.path().join("a").join(f)).unwrap(), fs::read(d.path().join("b").join(f)).unwrap());
    }
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("a/evolve.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    let text = fs::read_to_string(d.path().join("a/evolve.json")).unwrap();
    assert!(text.trim_start().starts_with("{\n  \"header\""));
}

#[test]
fn lambda_below_two_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "bad.json", r#"{"measure":{"variant":"julia","lambda":1.5}}"#);
    let o = fbx(d.path(), &["evolve", "--manifest", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "LambdaBelowTwo");
}

#[test]
fn malformed_manifests_and_grids_exit_2() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "typo.json", r#"{"measur":{"variant":"arcsine"}}"#);
    assert_eq!(fbx(d.path(), &["dims", "--manifest", "typo.json"]).status.code(), Some(2));
    write(d.path(), "ok.json", JULIA);
    let o = fbx(d.path(), &["dims", "--manifest", "ok.json", "--q", "3:-1:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ManifestInvalid"));
}

#[test]
fn unknown_or_missing_subcommand_exits_64() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(fbx(d.path(), &["frobnicate"]).status.code(), Some(64));
    assert_eq!(fbx(d.path(), &[]).status.code(), Some(64));
}

#[test]
fn numerical_failure_keeps_partial_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let barrier = r#"{"barrier":{"theta":1.5,"theta_range":[1,2],"eta":0.5,"sparseness":2.0,"sites":[10,20,40],"size":100}}"#;
    write(d.path(), "b.json", barrier);
    let o = fbx(d.path(), &["fit-front", "--manifest", "b.json", "--t-grid", "10:*10:10000", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "TruncationTooSmall");
    let partial = fs::read_to_string(d.path().join("o/front.csv.partial")).unwrap();
    assert!(partial.contains("# manifest_sha256: "));
    assert!(!d.path().join("o/front.csv").exists());
}

#[test]
fn cell_cap_from_environment() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "j.json", JULIA);
    let o = Command::new(env!("CARGO_BIN_EXE_fbx"))
        .current_dir(d.path())
        .env("FBX_CELL_CAP", "1000")
        .args(["dims", "--manifest", "j.json", "--q", "2"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("LevelTooLarge"));
}

#[test]
fn recipes_produce_runnable_manifests() {
    let d = tempfile::tempdir().unwrap();
    let o = fbx(d.path(), &["recipes", "--out", "r"]);
    assert_eq!(o.status.code(), Some(0));
    let listing = String::from_utf8_lossy(&o.stdout);
    assert!(listing.contains("fbx fit-gamma --manifest r/fbes4.json"));
    assert!(listing.contains("fbx exp-threemap --manifest r/zorro_threemap.json"));
    let fbes3: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("r/fbes3.json")).unwrap()).unwrap();
    assert_eq!(fbes3["measure"]["lambda"], 2.9);
    assert_eq!(fbes3["alphas"][0], 0.0);
    let o = fbx(d.path(), &["measure-info", "--manifest", "r/distr_b.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cells = fs::read_to_string(d.path().join("distr_b/cylinders.csv")).unwrap();
    let last = cells.lines().last().unwrap();
    let m: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!((m - 1.0).abs() < 1e-12);
    assert_eq!(fbx(d.path(), &["recipes", "nosuch"]).status.code(), Some(2));
}

#[test]
fn julia_experiment_summary() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "j.json", r#"{"measure":{"variant":"julia","lambda":2.9},"t_grid":"10:*3.1622776601683795:1000","alphas":[1.0]}"#);
    let o = fbx(d.path(), &["exp-julia", "--manifest", "j.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("o/julia.json")).unwrap()).unwrap();
    let row = &s["result"][0];
    assert_eq!(row["alpha"], 1.0);
    assert!(row["gap"].as_f64().unwrap().abs() < 0.05);
    assert_eq!(s["checks"][0]["pass"], true);
}
