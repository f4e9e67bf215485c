use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use symlab_cli::output::{num, Table};
use symlab_cli::RunConfig;

fn symlab(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_symlab")).args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn malformed_config_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let bad = [
        r#"{"family": "example1-const-a", "grids": {"cone": {"lattice": 10, "colour": 1}}}"#,
        r#"{"family": {"expr": {"name": "m", "n": 2, "d": 1, "params": {"names": [], "lo": [], "hi": [], "samples": []},
            "coefficients": [[["1", "0"], ["0", "1"]]]}}}"#,
        r#"{"family": "example1-const-a", "grids": {"cone": {"nu": [1, 0]}}}"#,
        r#"{"family": "example1-const-a", "tolerances": {"max_im": 1e-6}}"#,
        r#"{"command": "certify", "family": "example1-const-a"}"#,
        r#"{"family": "example1-holder", "grids": {"growth": {"etas": [16, 64]}}}"#,
        "{ not json",
    ];
    for (i, text) in bad.iter().enumerate() {
        let cfg = write(d, &format!("bad{i}.json"), text);
        let cmd = if text.contains("growth") { "growth" } else { "cone" };
        let out = symlab(&[cmd, "--config", &cfg, "--out", "out"], d);
        assert_eq!(out.status.code(), Some(2), "config {i}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!d.join("out").exists(), "config {i} left outputs");
    }
    assert_eq!(symlab(&["cone"], d).status.code(), Some(2));
    assert_eq!(symlab(&["bogus"], d).status.code(), Some(2));
}

#[test]
fn cone_run_is_byte_identical_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write(d, "cone.json", r#"{"family": "example1-const-a", "grids": {"cone": {"sphere": 300}}}"#);
    for out in ["a", "b"] {
        let o = symlab(&["cone", "--config", &cfg, "--out", out, "--seed", "3", "--workers", "1"], d);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["report.json", "cone.csv"] {
        assert_eq!(std::fs::read(d.join("a").join(f)).unwrap(), std::fs::read(d.join("b").join(f)).unwrap());
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["pass"], true);
    assert_eq!(report["command"]["seed"], 3);
    let text = std::fs::read_to_string(d.join("a/report.json")).unwrap();
    assert!(text.starts_with("{\n  \"checks\""));
}

#[test]
fn growth_writes_csv_and_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write(
        d,
        "g.json",
        r#"{"family": "example1-holder", "plots": true,
            "grids": {"growth": {"etas": [16, 64, 256, 1024], "expected_exponent": 0.25}}}"#,
    );
    let o = symlab(&["growth", "--config", &cfg, "--out", "out"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(d.join("out/growth.csv")).unwrap();
    let t = Table::from_csv(&csv).unwrap();
    assert_eq!(t.header, ["eta", "sigma", "r2", "dropped"]);
    assert_eq!(t.rows.len(), 4);
    assert!(std::fs::read_to_string(d.join("out/growth.svg")).unwrap().contains("<polyline"));
}

#[test]
fn failing_check_exits_1_with_report() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    // the rotation symbol has imaginary roots
    let cfg = write(
        d,
        "rot.json",
        r#"{"family": {"expr": {"name": "rot", "n": 2, "d": 1, "params": {"names": [], "lo": [], "hi": [], "samples": []},
            "coefficients": [[["1", "0"], ["0", "1"]], [["0", "1"], ["-1", "0"]]]}},
            "grids": {"certify": {"nu": [1, 0], "sphere": 8}}}"#,
    );
    let o = symlab(&["certify", "--config", &cfg, "--out", "out"], d);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    assert!(!report["failing"].as_array().unwrap().is_empty());
}

proptest! {
    #[test]
    fn unknown_top_level_keys_are_rejected(key in "[a-z_]{1,12}") {
        let known = ["command", "family", "grids", "tolerances", "seed", "out_dir", "plots", "workers", "reduced"];
        prop_assume!(!known.contains(&key.as_str()));
        let text = format!("{{\"{}\": 1}}", key);
        prop_assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn csv_numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }
}
