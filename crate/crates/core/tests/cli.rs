//! End-to-end checks of the `ngrc` binary.

use std::path::Path;
use std::process::{Command, Output};

fn ngrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ngrc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn invalid_config_exits_with_2_and_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "task = \"forecast-lorenz\"\nalpha = -1.0\n");
    for cmd in ["validate", "run"] {
        let out = ngrc(&[cmd, &cfg]);
        assert_eq!(out.status.code(), Some(2));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("alpha"), "{err}");
        assert_eq!(err.lines().count(), 1);
    }
}

#[test]
fn unknown_key_and_missing_file_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "typo.toml", "task = \"complexity\"\nalhpa = 1.0\n");
    assert_eq!(ngrc(&["validate", &cfg]).status.code(), Some(2));
    let missing = tmp.path().join("nope.toml").display().to_string();
    assert_eq!(ngrc(&["validate", &missing]).status.code(), Some(2));
}

#[test]
fn validate_prints_resolved_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "min.toml", "task = \"forecast-lorenz\"\n");
    let out = ngrc(&["validate", &cfg, "--seed", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let parsed = ngrc::experiment::parse_config(&text).unwrap();
    assert_eq!(parsed.seed, 9);
    assert_eq!((parsed.k, parsed.s, parsed.train_points), (2, 1, 400));
}

#[test]
fn singular_fit_exits_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("run");
    let cfg = write(
        tmp.path(),
        "sing.toml",
        "task = \"forecast-lorenz\"\nalpha = 0.0\nreturn_map_time = 0.0\n",
    );
    let out = ngrc(&["run", &cfg, "--out", out_dir.to_str().unwrap(), "--quiet"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("training"));
}

#[test]
fn run_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("scroll");
    let cfg = write(
        tmp.path(),
        "scroll.toml",
        "task = \"forecast-doublescroll\"\nsegments = 2\n",
    );
    let out = ngrc(&["run", &cfg, "--out", out_dir.to_str().unwrap(), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    for f in [
        "summary.json",
        "resolved-config.toml",
        "train.csv",
        "truth.csv",
        "forecast.csv",
        "uss.csv",
        "weights.csv",
    ] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["feature_dim"], 62);
    assert_eq!(summary["readout_shape"], serde_json::json!([3, 62]));

    let report = ngrc(&["report", out_dir.to_str().unwrap()]);
    assert!(report.status.success());
    let text = String::from_utf8_lossy(&report.stdout);
    assert!(text.contains("forecast-doublescroll"));
    assert!(text.contains("valid_time_lyapunov"));
}

#[test]
fn complexity_report_lists_quoted_ranges() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("cost");
    let cfg = write(tmp.path(), "cost.toml", "task = \"complexity\"\n");
    assert!(ngrc(&["run", &cfg, "--out", out_dir.to_str().unwrap(), "-q"])
        .status
        .success());
    let text = String::from_utf8_lossy(&ngrc(&["report", out_dir.to_str().unwrap()]).stdout).to_string();
    assert!(text.contains("33-163") && text.contains("8-41"), "{text}");
}
