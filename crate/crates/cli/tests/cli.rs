use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade-motifs"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn ok(out: &Path, args: &[&str]) {
    let o = cli(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

const SMALL: [&str; 10] = [
    "--seed",
    "4",
    "--set",
    "synth.n_cascades=12",
    "--set",
    "significance.enabled=false",
    "--set",
    "prediction.folds=3",
    "--set",
    "prediction.st=[1]",
];

#[test]
fn help_lists_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["--help"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for cmd in ["synth", "ingest", "analyze", "predict", "calibrate", "report"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn missing_input_exits_with_two_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.csv");
    let o = cli(dir.path(), &["ingest", "--cascades", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere.csv"));
}

#[test]
fn bad_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["synth", "--set", "windows.size=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("windows.size"));
}

#[test]
fn repeated_runs_write_identical_tables() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        for cmd in ["synth", "ingest", "analyze", "predict", "report"] {
            let mut args = vec![cmd];
            args.extend(SMALL);
            ok(d.path(), &args);
        }
    }
    for f in ["synth/cascades.csv", "ingest/types.csv", "analyze/lifecycle.csv", "predict/mae_table.csv", "report/report.md"] {
        let a = fs::read(dirs[0].path().join(f)).unwrap();
        assert!(!a.is_empty(), "{f} is empty");
        assert_eq!(a, fs::read(dirs[1].path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn flags_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["synth", "--beta", "0.3", "--penalty", "L2"];
    args.extend(SMALL);
    ok(dir.path(), &args);
    let manifest = fs::read_to_string(dir.path().join("synth/manifest.json")).unwrap();
    assert!(manifest.contains("\"beta\": 0.3"), "{manifest}");
    assert!(manifest.contains("\"penalty\": \"l2\""), "{manifest}");
}
