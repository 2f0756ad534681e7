#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn golden_dir() -> PathBuf {
    data_dir().join("golden")
}

pub fn woodmask<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_woodmask"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("run woodmask")
}

pub fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Report files compared with the committed goldens: (golden name, path
/// below the run directory).
pub const GOLDEN: [(&str, &str); 11] = [
    ("ingest_manifest.json", "ingest/manifest.json"),
    ("flatten_manifest.json", "flat/manifest.json"),
    ("flatten.csv", "flat/flatten.csv"),
    ("stats.csv", "stats.csv"),
    ("split.csv", "split.csv"),
    ("metrics.csv", "eval/metrics.csv"),
    ("per_sample.csv", "eval/per_sample.csv"),
    ("confusion.csv", "eval/confusion.csv"),
    ("confusion_normalized.csv", "eval/confusion_normalized.csv"),
    ("histograms.csv", "eval/histograms.csv"),
    ("agreement.csv", "agreement.csv"),
];

pub const MORPHOLOGY: [&str; 4] = ["--min-hole", "6", "--min-object", "6"];

/// ingest, flatten, stats, split, eval, agree on the committed fixture, all
/// outputs below `run`.
pub fn pipeline(run: &Path, workers: usize) {
    let data = data_dir();
    let p = |rel: &str| run.join(rel).into_os_string().into_string().unwrap();
    let w = workers.to_string();
    let steps: Vec<Vec<String>> = vec![
        vec!["ingest".into(), "--export".into(), data.join("export.json").display().to_string(), "--out".into(), p("ingest/manifest.json"), "--split-seed".into(), "42".into()],
        [
            vec!["flatten".into(), "--manifest".into(), p("ingest/manifest.json"), "--out-manifest".into(), p("flat/manifest.json"), "--report".into(), p("flat/flatten.csv")],
            MORPHOLOGY.map(String::from).to_vec(),
        ]
        .concat(),
        vec!["stats".into(), "--manifest".into(), p("flat/manifest.json"), "--out".into(), p("stats.csv")],
        vec!["split".into(), "--manifest".into(), p("flat/manifest.json"), "--out".into(), p("split.csv")],
        vec!["eval".into(), "--manifest".into(), p("flat/manifest.json"), "--predictions".into(), data.join("predictions").display().to_string(), "--out-dir".into(), p("eval")],
        [
            vec!["agree".into(), "--manifest".into(), p("flat/manifest.json"), "--baseline".into(), "ann1@lab".into(), "--out".into(), p("agreement.csv")],
            MORPHOLOGY.map(String::from).to_vec(),
        ]
        .concat(),
    ];
    for mut step in steps {
        step.extend(["--workers".to_string(), w.clone()]);
        ok(&woodmask(&step));
    }
}

/// Names of golden files whose bytes differ from the run's output.
pub fn golden_mismatches(run: &Path) -> Vec<String> {
    GOLDEN
        .iter()
        .filter(|(name, rel)| {
            let got = std::fs::read(run.join(rel)).unwrap_or_default();
            let want = std::fs::read(golden_dir().join(name)).unwrap_or_default();
            want.is_empty() || got != want
        })
        .map(|(name, _)| name.to_string())
        .collect()
}
