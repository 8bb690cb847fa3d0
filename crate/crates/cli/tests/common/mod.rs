#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hourcast")
}

pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(bin()).args(args).output().expect("binary runs")
}

pub fn run_ok<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = run(args);
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// `train.csv`, `test.csv` and `test_truth.csv` under `dir/data`.
pub fn synth_into(dir: &Path, days: usize, test_days: usize, seed: u64) -> PathBuf {
    let data = dir.join("data");
    run_ok([
        "synth".to_string(),
        "--out-dir".into(),
        data.display().to_string(),
        "--days".into(),
        days.to_string(),
        "--test-days".into(),
        test_days.to_string(),
        "--seed".into(),
        seed.to_string(),
    ]);
    data
}

pub fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

pub fn arg(p: &Path) -> String {
    p.display().to_string()
}

/// A small boosting config that keeps command tests fast.
pub const SMALL_GBTREE: &str = "family = \"gbtree\"\nrounds = 40\nmax_depth = 3\nlearning_rate = 0.2\n";
