#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chaos-bci"))
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

pub fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

/// Two-channel recording (`ch1` logistic r = 4, `ch2` AR(1) φ = 0.9) and a
/// trials file alternating between them, `per_class` windows of `len` each.
pub fn two_class_corpus(dir: &Path, per_class: usize, len: usize) -> (PathBuf, PathBuf) {
    let n = (per_class * len).to_string();
    ok(dir, &["synth", "--system", "logistic", "--r", "4", "--n", &n, "--transient", "100", "--out", "ch1.csv"]);
    ok(dir, &["synth", "--system", "ar1", "--phi", "0.9", "--seed", "3", "--n", &n, "--transient", "100", "--out", "ch2.csv"]);
    let a: Vec<String> = read(dir, "ch1.csv").lines().skip(1).map(String::from).collect();
    let b: Vec<String> = read(dir, "ch2.csv").lines().skip(1).map(String::from).collect();
    let mut rec = String::from("ch1,ch2\n");
    for (x, y) in a.iter().zip(&b) {
        rec.push_str(&format!("{x},{y}\n"));
    }
    std::fs::write(dir.join("rec.csv"), rec).unwrap();
    let mut trials = String::from("trial_id,channel,onset_sample,offset_sample,label\n");
    for i in 0..per_class {
        let (on, off) = (i * len, (i + 1) * len);
        trials.push_str(&format!("{},ch1,{on},{off},1\n", 2 * i));
        trials.push_str(&format!("{},ch2,{on},{off},-1\n", 2 * i + 1));
    }
    std::fs::write(dir.join("trials.csv"), trials).unwrap();
    (dir.join("rec.csv"), dir.join("trials.csv"))
}

pub const EXTRACT_MAP: [&str; 9] = [
    "extract", "--recording", "rec.csv", "--trials", "trials.csv", "--kind", "map", "--out", "features.csv",
];
