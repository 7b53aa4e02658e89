use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use speakerbench::corpus::{CountDistribution, SynthConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_speakerbench"))
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// synth → normalize → build-trials → score (two scorers) → train-head →
/// score head → evaluate → ablate → report, all inside `dir`.
fn pipeline(dir: &Path) -> Vec<PathBuf> {
    let cfg = SynthConfig {
        n_speakers: 40,
        n_topics: 5,
        conversations_per_speaker: 4,
        utterances_per_side: CountDistribution { mean: 30.0, spread: 5.0 },
        seed: 3,
        ..SynthConfig::default()
    };
    let cfg_path = dir.join("synth.toml");
    std::fs::write(&cfg_path, cfg.to_toml_string()).unwrap();
    let raw = dir.join("raw.jsonl");
    let norm = dir.join("norm.jsonl");
    let trials = dir.join("trials.jsonl");
    let train_trials = dir.join("train.jsonl");
    let stats = dir.join("stats.csv");
    let tfidf = dir.join("tfidf.jsonl");
    let char4 = dir.join("char4.jsonl");
    let head = dir.join("head.bin");
    let head_scores = dir.join("head_scores.jsonl");
    let report = dir.join("report.csv");
    let sweep = dir.join("sweep.csv");
    let md = dir.join("report.md");

    run(&["synth", "--config", s(&cfg_path), "--out", s(&raw)]);
    run(&["normalize", "--style", "normldc", "--in", s(&raw), "--out", s(&norm)]);
    run(&[
        "build-trials", "--in", s(&norm), "--difficulty", "hard", "--split", "test", "--seed", "1", "--out",
        s(&trials), "--stats", s(&stats), "--lexicon", "synthetic",
    ]);
    run(&[
        "build-trials", "--in", s(&norm), "--difficulty", "harder", "--split", "train", "--seed", "1", "--out",
        s(&train_trials),
    ]);
    for (scorer, out) in [("tfidf", &tfidf), ("char4", &char4)] {
        run(&[
            "score", "--scorer", scorer, "--corpus", s(&norm), "--trials", s(&trials), "--reference-split", "train",
            "--out", s(out),
        ]);
    }
    run(&[
        "train-head", "--corpus", s(&norm), "--trials", s(&train_trials), "--reference-split", "train",
        "--max-features", "500", "--out", s(&head),
    ]);
    run(&[
        "score", "--scorer", "head", "--corpus", s(&norm), "--trials", s(&trials), "--reference-split", "train",
        "--max-features", "500", "--head", s(&head), "--out", s(&head_scores),
    ]);
    run(&[
        "evaluate", "--scores", s(&tfidf), "--scores", s(&char4), "--scores", s(&head_scores), "--bootstrap", "200",
        "--compare", "ttest,wilcoxon", "--out", s(&report),
    ]);
    run(&[
        "ablate", "sweep", "--corpus", s(&norm), "--trials", s(&trials), "--scorer", "tfidf", "--reference-split",
        "train", "--ks", "5,10,full", "--bootstrap", "100", "--out", s(&sweep),
    ]);
    run(&["report", "--in", s(&report), "--format", "md", "--out", s(&md)]);
    vec![
        raw,
        norm,
        trials,
        train_trials,
        stats,
        tfidf,
        char4,
        head,
        head_scores,
        report.clone(),
        report.with_extension("significance.csv"),
        sweep,
        md,
    ]
}

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    for (x, y) in first.iter().zip(&second) {
        let (bx, by) = (std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        assert!(!bx.is_empty(), "{} is empty", x.display());
        // text outputs record their input paths, which differ between the two dirs
        match (String::from_utf8(bx.clone()), String::from_utf8(by.clone())) {
            (Ok(tx), Ok(ty)) => assert_eq!(
                tx.replace(s(a.path()), "<dir>"),
                ty.replace(s(b.path()), "<dir>"),
                "{} differs between runs",
                x.display()
            ),
            _ => assert_eq!(bx, by, "{} differs between runs", x.display()),
        }
    }
    let report = std::fs::read_to_string(&first[9]).unwrap();
    assert!(report.contains("auc") && report.contains("eer"));
    let sig = std::fs::read_to_string(&first[10]).unwrap();
    // header, then 3 pairs x 2 metrics x 2 tests
    assert_eq!(sig.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 2 * 2);
    assert!(!sig.contains("-0.000000"));
}

#[test]
fn single_score_file_has_no_significance_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.jsonl");
    let lines: String = [("t1", "positive", 0.9), ("t2", "negative", 0.2), ("t3", "positive", 0.6), ("t4", "negative", 0.4)]
        .iter()
        .map(|(id, label, score)| {
            format!(
                "{{\"trial_id\":\"{id}\",\"label\":\"{label}\",\"score\":{score},\"scorer\":\"x\",\"difficulty\":\"base\",\"encoding\":\"LDC\"}}\n"
            )
        })
        .collect();
    std::fs::write(&path, lines).unwrap();
    let out = dir.path().join("r.csv");
    run(&["evaluate", "--scores", s(&path), "--bootstrap", "50", "--compare", "ttest", "--out", s(&out)]);
    assert!(out.exists());
    assert!(!out.with_extension("significance.csv").exists());
}

#[test]
fn usage_errors_exit_with_2() {
    let out = bin().args(["synth", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["--threads", "0", "synth", "--out", "/dev/null"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_1() {
    let out = bin()
        .args(["normalize", "--in", "/nonexistent/corpus.jsonl", "--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
