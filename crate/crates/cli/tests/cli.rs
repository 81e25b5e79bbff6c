use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SPHERE08: &str = r#"{
  "metric": {
    "link": { "kind": "scaled_sphere", "dim": 2, "radius": 0.8 },
    "r_min": 1.0,
    "r_max": 200.0
  },
  "radii": [5.0, 10.0]
}"#;

const UNIT: &str = r#"{
  "metric": {
    "link": { "kind": "scaled_sphere", "dim": 2, "radius": 1.0 },
    "r_min": 1.0,
    "r_max": 200.0
  }
}"#;

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn coniso(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coniso"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn spectrum_writes_csv_json_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SPHERE08);
    let out = dir.path().join("out");
    let o = coniso(&["spectrum"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(names(&out), ["lichnerowicz.json", "metadata.json", "spectrum.csv"]);
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue"));
    let first: Vec<f64> = lines
        .take(4)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // Eigenvalues of S²_0.8 are l(l + 1)/0.64.
    let want = [0.0, 3.125, 3.125, 3.125];
    for (a, b) in first.iter().zip(want) {
        assert!((a - b).abs() < 1e-10);
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "spectrum");
    assert!(meta["outputs"].as_array().unwrap().len() >= 2);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("absent.json");
    assert_eq!(coniso(&["spectrum"], &missing, &out).status.code(), Some(2));
    let unknown = write(dir.path(), "u.json", &SPHERE08.replace("\"radii\"", "\"radiuses\""));
    assert_eq!(coniso(&["spectrum"], &unknown, &out).status.code(), Some(2));
    let invalid = write(dir.path(), "i.json", &SPHERE08.replace("0.8 }", "-0.8 }"));
    assert_eq!(coniso(&["spectrum"], &invalid, &out).status.code(), Some(2));
    let garbage = write(dir.path(), "g.json", "{ not json");
    assert_eq!(coniso(&["curvature"], &garbage, &out).status.code(), Some(2));
    let bad_list = write(dir.path(), "ok.json", SPHERE08);
    assert_eq!(
        coniso(&["foliate", "--volumes", "1,x"], &bad_list, &out).status.code(),
        Some(2)
    );
}

#[test]
fn usage_errors_and_help() {
    let bin = env!("CARGO_BIN_EXE_coniso");
    assert_eq!(Command::new(bin).arg("frobnicate").output().unwrap().status.code(), Some(2));
    assert_eq!(Command::new(bin).arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn unit_sphere_foliation_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "unit.json", UNIT);
    let o = coniso(&["foliate"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("spectral gap hypothesis"), "{err}");
}

#[test]
fn foliate_and_stability_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SPHERE08);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = coniso(&["foliate"], &cfg, out);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(coniso(&["stability"], &cfg, out).status.code(), Some(0));
    }
    for name in ["leaves.csv", "leaves.json", "foliation_report.csv", "jacobi.csv"] {
        let x = std::fs::read(a.join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    // Only final files remain: nothing temporary is left behind.
    assert!(names(&a).iter().all(|n| !n.starts_with('.')));
}

#[test]
fn overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SPHERE08);
    let out = dir.path().join("out");
    let o = coniso(&["profile", "--betas", "0.25,0.5"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().skip(1).all(|l| l.ends_with("confirmed")));
}

#[test]
fn cone_angle_reports_area_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SPHERE08);
    let out = dir.path().join("out");
    assert_eq!(coniso(&["cone-angle"], &cfg, &out).status.code(), Some(0));
    let iso: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("iso.json")).unwrap()).unwrap();
    let text = iso.to_string();
    assert!(text.contains("0.64"), "{text}");
}
