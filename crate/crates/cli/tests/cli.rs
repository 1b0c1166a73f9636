use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const GAUSS_IDEAL: &str = r#"{
  "model": {"dimension": 3, "mass": 0.0},
  "alice": {
    "profile": {"kind": "gaussian", "center": [0, 0, 0], "width": 1.0},
    "lambda2_sq_w2": 0.01
  },
  "bob": {"mode": "ideal"},
  "sweep": {"parameter": "lambda2_sq_w2", "values": [0.1, 0.05, 0.01, 0.001]}
}"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn udwq(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udwq"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("UDWQ_THREADS")
        .output()
        .unwrap()
}

/// Data rows of a CSV with `#` comments and a header row.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let data = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, data)
}

fn quantity(path: &Path, name: &str) -> f64 {
    let (_, data) = rows(path);
    data.iter().find(|r| r[0] == name).unwrap()[1].parse().unwrap()
}

#[test]
fn coupling_sweep_approaches_the_perfect_channel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.json", GAUSS_IDEAL);
    let out = udwq(&["sweep"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, data) = rows(&dir.path().join("sweep.csv"));
    assert_eq!(&header[..6], &["lambda2_sq_w2", "E12", "margin", "I_c", "negativity", "signaling"]);
    let mut prev = f64::NEG_INFINITY;
    for r in &data {
        let x: f64 = r[0].parse().unwrap();
        let ic: f64 = r[3].parse().unwrap();
        let neg: f64 = r[4].parse().unwrap();
        assert!(ic > prev);
        prev = ic;
        assert!((neg - 0.5 * (-2.0 * x).exp()).abs() < 1e-10);
    }
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.json", GAUSS_IDEAL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(udwq(&["sweep", "--threads", "1"], &cfg, &a).status.success());
    assert!(udwq(&["sweep", "--threads", "4"], &cfg, &b).status.success());
    assert_eq!(fs::read(a.join("sweep.csv")).unwrap(), fs::read(b.join("sweep.csv")).unwrap());
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.json", GAUSS_IDEAL);
    let first = dir.path().join("first");
    assert!(udwq(&["sweep"], &cfg, &first).status.success());
    let echo = first.join("sweep.config.json");
    let second = dir.path().join("second");
    assert!(udwq(&["sweep"], &echo, &second).status.success());
    assert_eq!(fs::read(first.join("sweep.csv")).unwrap(), fs::read(second.join("sweep.csv")).unwrap());
}

#[test]
fn empty_sweep_exits_with_a_line_anchored_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSS_IDEAL.replace("[0.1, 0.05, 0.01, 0.001]", "[]");
    let cfg = write_config(dir.path(), "empty.json", &text);
    let out = udwq(&["sweep"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 8"), "{err}");
}

#[test]
fn malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\n  \"model\": {\"dimension\": 3,,}\n}");
    let out = udwq(&["channel"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn spacelike_run_reports_no_signaling() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "model": {"dimension": 3, "mass": 0.0},
  "alice": {
    "profile": {"kind": "bump", "center": [0, 0, 0], "radius": 1.0},
    "lambda2": 1.0, "c": 2.0
  },
  "bob": {"mode": "spacelike_offset", "offset": [5.0, 0, 0], "time": 1.0}
}"#;
    let cfg = write_config(dir.path(), "spacelike.json", text);
    let out = udwq(&["spacelike"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("spacelike.csv");
    assert!(quantity(&csv, "signaling") <= 1e-12);
    assert!(quantity(&csv, "I_c_channel_max") <= 1e-12);
    assert!(quantity(&csv, "negativity") <= 1e-12);
}

#[test]
fn spacelike_subcommand_rejects_connected_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "model": {"dimension": 3, "mass": 0.0},
  "alice": {
    "profile": {"kind": "bump", "center": [0, 0, 0], "radius": 1.0},
    "lambda2": 1.0, "c": 2.0
  },
  "bob": {"mode": "offset", "offset": [1.0, 0, 0], "time": 2.0}
}"#;
    let cfg = write_config(dir.path(), "connected.json", text);
    let out = udwq(&["spacelike"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 7"));
}

#[test]
fn huygens_run_passes_its_contract() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "model": {"dimension": 3, "mass": 0.0},
  "alice": {
    "profile": {"kind": "bump", "center": [0, 0, 0], "radius": 1.0},
    "lambda2": 1.0, "c": 2.0
  },
  "bob": {"mode": "offset", "offset": [0.5, 0, 0], "time": 4.0}
}"#;
    let cfg = write_config(dir.path(), "huygens.json", text);
    let out = udwq(&["huygens"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(quantity(&dir.path().join("huygens.csv"), "cross_ratio") <= 1e-8);
}

#[test]
fn oracle_check_passes_and_truncation_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let ok = GAUSS_IDEAL.replace("\"sweep\"", "\"oracle\": {\"models\": 6},\n  \"sweep\"");
    let cfg = write_config(dir.path(), "oracle.json", &ok);
    let out = udwq(&["oracle-check"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, data) = rows(&dir.path().join("oracle_check.csv"));
    assert_eq!(data.len(), 6);
    let bad = GAUSS_IDEAL.replace("\"sweep\"", "\"oracle\": {\"models\": 2, \"truncation\": 1},\n  \"sweep\"");
    let cfg = write_config(dir.path(), "bad_oracle.json", &bad);
    let out = udwq(&["oracle-check"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Fock truncation"));
}

#[test]
fn bob_solve_emits_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSS_IDEAL.replace("{\"mode\": \"ideal\"}", "{\"mode\": \"solve\", \"time\": 2.0}");
    let cfg = write_config(dir.path(), "solve.json", &text);
    let out = udwq(&["bob-solve"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, data) = rows(&dir.path().join("bob_solve.csv"));
    assert_eq!(header.len(), 9);
    assert!(!data.is_empty());
    let out = udwq(&["channel"], &cfg, dir.path());
    assert!(out.status.success());
}

#[test]
fn bilinears_table_is_antisymmetric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "b.json", GAUSS_IDEAL);
    assert!(udwq(&["bilinears"], &cfg, dir.path()).status.success());
    let (_, data) = rows(&dir.path().join("bilinears.csv"));
    let e: Vec<Vec<f64>> = data[..4].iter().map(|r| r[2..].iter().map(|v| v.parse().unwrap()).collect()).collect();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(e[i][j], -e[j][i]);
        }
    }
}
