mod common;

use common::*;
use tempfile::tempdir;

#[test]
fn synth_is_byte_identical() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    for out in ["a.csv", "b.csv"] {
        ok(d, &["synth", "--system", "logistic", "--r", "4.0", "--n", "10000", "--seed", "7", "--out", out]);
    }
    assert_eq!(read(d, "a.csv"), read(d, "b.csv"));
    assert_eq!(read(d, "a.csv").lines().next(), Some("value"));
    assert!(read(d, "a.csv.config.json").contains("\"system\": \"logistic\""));
}

#[test]
fn lorenz_row_count() {
    let dir = tempdir().unwrap();
    ok(dir.path(), &["synth", "--system", "lorenz", "--dt", "0.01", "--n", "20000", "--out", "l.csv"]);
    assert_eq!(read(dir.path(), "l.csv").lines().count(), 20_001);
}

#[test]
fn invalid_regime_is_a_usage_error() {
    let dir = tempdir().unwrap();
    let out = run(dir.path(), &["synth", "--system", "logistic", "--r", "5.0", "--n", "10", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(0, 4]"));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn extract_rows_skips_and_determinism() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    two_class_corpus(d, 5, 600);
    ok(d, &EXTRACT_MAP);
    let first = read(d, "features.csv");
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "trial_id,label,lle,mi,med,d2");
    assert_eq!(lines.len(), 11);
    assert!(lines[1].starts_with("0,1,") && lines[2].starts_with("1,-1,"));
    ok(d, &EXTRACT_MAP);
    assert_eq!(read(d, "features.csv"), first);

    // a window past the end of the recording is skipped with a warning
    let mut trials = read(d, "trials.csv");
    trials.push_str("99,ch1,2900,3600,1\n");
    std::fs::write(d.join("trials.csv"), trials).unwrap();
    let out = ok(d, &EXTRACT_MAP);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("skipped trial 99") && err.contains("1 of 11 trials skipped"), "{err}");
    assert_eq!(read(d, "features.csv"), first);
    assert!(read(d, "features.csv.config.json").contains("\"trial_id\": 99"));
}

#[test]
fn malformed_trial_line_is_reported() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    two_class_corpus(d, 2, 600);
    let mut trials = read(d, "trials.csv");
    trials.push_str("7,ch1,abc,600,1\n");
    std::fs::write(d.join("trials.csv"), trials).unwrap();
    let out = run(d, &EXTRACT_MAP);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(d, &["extract", "--recording", "rec.csv", "--trials", "trials.csv", "--channel", "ch9", "--out", "f.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_and_eval_on_separable_corpus() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    two_class_corpus(d, 12, 600);
    ok(d, &EXTRACT_MAP);
    for model in ["mlp", "km-svm"] {
        ok(d, &["train", "--features", "features.csv", "--model", model, "--seed", "1", "--out", "m.json"]);
        let out = ok(d, &["eval", "--features", "features.csv", "--model", "m.json", "--out", "r.json"]);
        assert!(String::from_utf8_lossy(&out.stdout).contains("accuracy 100.0%"), "{model}: {}", String::from_utf8_lossy(&out.stdout));
        let report: serde_json::Value = serde_json::from_str(&read(d, "r.json")).unwrap();
        assert_eq!(report["accuracy_percent"], "100.0%");
        assert_eq!(report["n_test"], 24);
        assert!(report["config"]["train_config"].is_object());
    }
}

#[test]
fn eval_confusion_fixture() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let mut fixture = String::from("predicted,actual\n");
    for (p, a, n) in [(1, 1, 435), (1, -1, 15), (-1, 1, 25), (-1, -1, 425)] {
        for _ in 0..n {
            fixture.push_str(&format!("{p},{a}\n"));
        }
    }
    std::fs::write(d.join("pairs.csv"), fixture).unwrap();
    let out = ok(d, &["eval", "--predictions", "pairs.csv", "--reference-mse", "0.1788", "--out", "r.json"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("accuracy 95.6%") && stdout.contains("mse 0.1778"), "{stdout}");
    let r: serde_json::Value = serde_json::from_str(&read(d, "r.json")).unwrap();
    assert_eq!(r["confusion"], serde_json::json!([[435, 15], [25, 425]]));
    assert_eq!(r["n_test"], 900);
    assert_eq!(r["mse_text"], "0.1778");
    assert!((r["reference_mse"]["deviation"].as_f64().unwrap() + 0.001).abs() < 1e-4);
}

fn write_features(d: &std::path::Path, rows: &[(u64, i8, [f64; 4])]) {
    let mut s = String::from("trial_id,label,lle,mi,med,d2\n");
    for (id, l, v) in rows {
        s.push_str(&format!("{id},{l},{},{},{},{}\n", v[0], v[1], v[2], v[3]));
    }
    std::fs::write(d.join("f.csv"), s).unwrap();
}

#[test]
fn hist_with_one_class() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    write_features(d, &[(1, 1, [0.1, 0.2, 3.0, 1.0]), (2, 1, [0.3, 0.2, 3.0, 1.5]), (3, 1, [0.5, 0.1, 2.0, 1.2])]);
    ok(d, &["hist", "--features", "f.csv", "--index", "lle", "--bins", "4", "--out", "h.csv"]);
    let h = read(d, "h.csv");
    let lines: Vec<&str> = h.lines().collect();
    assert_eq!(lines[0], "bin_center,freq_pos,freq_neg");
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        assert!(l.ends_with(",0.000000000"), "{l}");
    }
    assert!(read(d, "h.csv.config.json").contains("\"index\": \"lle\""));
}

#[test]
fn summary_table() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    write_features(d, &[(1, 1, [0.0, 1.0, 2.0, 1.0]), (2, 1, [1.0, 1.0, 2.0, 2.0]), (3, -1, [0.5, 0.5, 3.0, 1.0])]);
    let out = ok(d, &["summary", "--features", "f.csv"]);
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("Largest Lyapunov exponent") && table.contains("0.5000 (0.7071)"), "{table}");
}

#[test]
fn train_needs_both_classes() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    write_features(d, &[(1, 1, [0.0, 1.0, 2.0, 1.0]), (2, 1, [1.0, 1.0, 2.0, 2.0])]);
    let out = run(d, &["train", "--features", "f.csv", "--model", "mlp", "--no-pca", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing class") || err.contains("constant"), "{err}");
}
