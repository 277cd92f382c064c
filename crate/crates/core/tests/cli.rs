use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const STAGES: [&str; 8] = [
    "ingest-check",
    "train-extractor",
    "extract",
    "base-forecast",
    "train-meta",
    "forecast",
    "evaluate",
    "analyze",
];

fn dataset() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic20.csv")
}

fn quick_config(dir: &Path) -> PathBuf {
    let path = dir.join("run.conf");
    fs::write(
        &path,
        "# small and fast\nconv_blocks = 8x8,16x5,8x3\nwindow_length = 24\nepochs = 4\nmax_per_series = 24\nrounds = 20\nrestarts = 3\n",
    )
    .unwrap();
    path
}

fn tsfeat(dir: &Path, args: &[&str]) -> Output {
    let config = quick_config(dir);
    Command::new(env!("CARGO_BIN_EXE_tsfeat"))
        .args(args)
        .arg("--config")
        .arg(&config)
        .arg("--data")
        .arg(dataset())
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    for stage in fs::read_dir(dir).unwrap() {
        for f in fs::read_dir(stage.unwrap().path()).unwrap() {
            let p = f.unwrap().path();
            files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
        }
    }
    files
}

fn manifest_value(dir: &Path, stage: &str, key: &str) -> Option<String> {
    let text = fs::read_to_string(dir.join("out").join(stage).join("run_manifest.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
}

#[test]
fn every_stage_runs_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    for stage in STAGES {
        let o = tsfeat(dir.path(), &[stage]);
        assert!(o.status.success(), "{stage}: {}", stderr(&o));
    }
    let summary = fs::read_to_string(dir.path().join("out/evaluate/summary.csv")).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("combined,")), "{summary}");
    let first = snapshot(&dir.path().join("out"));
    assert!(first.keys().any(|k| k.ends_with("clusters.csv")));
    for stage in STAGES {
        assert!(tsfeat(dir.path(), &[stage]).status.success());
    }
    assert_eq!(first, snapshot(&dir.path().join("out")));
}

#[test]
fn missing_artifact_names_the_producing_stage() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsfeat(dir.path(), &["extract"]);
    assert!(!o.status.success());
    let msg = stderr(&o);
    assert!(msg.contains("train-extractor") && msg.contains("extractor.txt"), "{msg}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsfeat(dir.path(), &["ingest-check", "--set", "widnow_length=3"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("widnow_length"));
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "epochs = 2\nbogus = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tsfeat"))
        .args(["ingest-check", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn flags_override_set_which_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsfeat(dir.path(), &["ingest-check", "--set", "epochs=9", "--set", "seed=5", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(manifest_value(dir.path(), "ingest-check", "config.epochs").as_deref(), Some("9"));
    assert_eq!(manifest_value(dir.path(), "ingest-check", "config.seed").as_deref(), Some("7"));
    assert_eq!(manifest_value(dir.path(), "ingest-check", "config.rounds").as_deref(), Some("20"));
    assert!(manifest_value(dir.path(), "ingest-check", "artifact.series_summary.csv.sha256").is_some());
}
