use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tracklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracklab"))
        .args(args)
        .output()
        .unwrap()
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn run_writes_reports() {
    let out = tempfile::tempdir().unwrap();
    let cfg = scenario("abs-two-minimizers.json");
    let o = tracklab(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("clusters: 2 (2 global)"), "{stdout}");
    let csv = fs::read_to_string(out.path().join("abs-two-minimizers.csv")).unwrap();
    assert!(csv.starts_with("seed,n_starts,cluster_id,J,u_0\n1,64,0,"));
    let json = fs::read_to_string(out.path().join("abs-two-minimizers.json")).unwrap();
    assert!(json.contains("\"config_sha256\""));
    assert!(!json.contains("wall"));
    assert!(out.path().join("abs-two-minimizers.summary.txt").exists());
}

#[test]
fn seed_override_changes_provenance_only_where_expected() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = scenario("abs-two-minimizers.json");
    let cfg = cfg.to_str().unwrap();
    for (dir, seed) in [(&a, "5"), (&b, "6")] {
        let o = tracklab(&[
            "run",
            cfg,
            "--seed",
            seed,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ja = fs::read_to_string(a.path().join("abs-two-minimizers.json")).unwrap();
    let jb = fs::read_to_string(b.path().join("abs-two-minimizers.json")).unwrap();
    assert!(ja.contains("\"seed\": 5") && jb.contains("\"seed\": 6"));
    assert_ne!(ja, jb);
}

#[test]
fn validate_and_exit_codes() {
    let o = tracklab(&[
        "validate",
        scenario("semilinear-ridge.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok: semilinear-ridge"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"name": "bad", "map": {"kind": "abs", "dim": 1},
            "problem": {"y_d": [1.0, 2.0]},
            "solver": {"n_starts": 4, "bounds": {"lo": -1, "hi": 1}},
            "experiment": {"kind": "solve"}}"#,
    );
    let bad = bad.to_str().unwrap();
    assert_eq!(tracklab(&["validate", bad]).status.code(), Some(2));
    let o = tracklab(&["run", bad, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let garbage = write(dir.path(), "garbage.json", "{ not json");
    assert_eq!(
        tracklab(&["validate", garbage.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    // An affine map has no nonunique targets: the ridge search fails to converge.
    let affine = write(
        dir.path(),
        "affine.json",
        r#"{"name": "affine-ridge", "map": {"kind": "affine", "matrix": [[1.0]]},
            "problem": {"y_d": [1.0]},
            "solver": {"n_starts": 16, "bounds": {"lo": -2, "hi": 2}},
            "experiment": {"kind": "find-nonunique", "path": {"kind": "symmetric", "half_width": 0.2}}}"#,
    );
    let o = tracklab(&[
        "run",
        affine.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("path does not cross the exceptional set"));

    // A tiny Newton budget on a sign-changing control.
    let strict = write(
        dir.path(),
        "strict.json",
        r#"{"name": "strict", "map": {"kind": "semilinear1d", "n": 20, "max_iter": 1},
            "problem": {"y_d": {"profile": "constant", "value": 1.0}},
            "solver": {"n_starts": 2, "bounds": {"lo": -50, "hi": 50}},
            "experiment": {"kind": "solve"}}"#,
    );
    let o = tracklab(&[
        "run",
        strict.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let missing = tracklab(&["validate", "/nonexistent/scenario.json"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn listings() {
    let maps = String::from_utf8(tracklab(&["list-maps"]).stdout).unwrap();
    for m in [
        "affine",
        "abs",
        "square",
        "semilinear1d",
        "parabolic-obstacle",
    ] {
        assert!(maps.lines().any(|l| l.starts_with(m)), "{m}");
    }
    let exps = String::from_utf8(tracklab(&["list-experiments"]).stdout).unwrap();
    assert_eq!(exps.lines().count(), 8);
    assert!(exps.contains("find-nonunique"));
}

#[test]
fn every_bundled_scenario_validates() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let o = tracklab(&["validate", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", p.display());
    }
}
