//! Fit the MLP verification head on harder training trials and compare it
//! with raw TF-IDF cosine on harder test trials.
//!
//! Training positives are capped at the number of eligible negatives so the
//! head sees balanced classes. Features are TF-IDF vectors (top 1000 terms)
//! fit on the training split.
//!
//!     cargo run --release --example train_head -- [n_seeds]

use speakerbench::corpus::{generate_synthetic, split_speakers, Split, SplitRatios, SynthConfig};
use speakerbench::eval::score_auc;
use speakerbench::head::{save_head, load_head, train_head_with_report, HeadConfig, HeadScorer};
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::scoring::{fit_tfidf_with, score_trials, Analyzer, Similarity, VectorScorer};
use speakerbench::trials::{build_trials, Difficulty, TrialTargets};

fn main() -> speakerbench::Result<()> {
    let n_seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = HeadConfig::default();
    println!("head config:\n{}", cfg.to_toml_string());
    let mut uplift = 0.0;
    for seed in 0..n_seeds {
        let (corpus, _) =
            prepare_corpus(&generate_synthetic(&SynthConfig::benchmark(seed))?, 5, Some(Style::NormLdc))?;
        let assignment = split_speakers(&corpus, SplitRatios::default(), seed)?;
        let train_docs: Vec<String> = corpus
            .sides()
            .iter()
            .filter(|s| assignment.split_of(&s.speaker_id) == Some(Split::Train))
            .map(|s| s.text())
            .collect();
        let model = fit_tfidf_with(&train_docs, Analyzer::Word, Some(1000))?;

        let probe = build_trials(&corpus, &assignment, Split::Train, Difficulty::Harder, seed, TrialTargets::default())?;
        let balanced = TrialTargets {
            positives: Some(probe.stats.eligible_negative),
            ..TrialTargets::default()
        };
        let train = build_trials(&corpus, &assignment, Split::Train, Difficulty::Harder, seed, balanced)?;
        let test = build_trials(&corpus, &assignment, Split::Test, Difficulty::Harder, seed, TrialTargets::default())?;

        let (head, report) = train_head_with_report(&train.trials, &corpus, &model, &cfg)?;
        let path = std::env::temp_dir().join(format!("speakerbench-head-{}-{seed}.bin", std::process::id()));
        save_head(&head, &path)?;
        let head = load_head(&path)?;
        std::fs::remove_file(&path).ok();

        let head_auc = score_auc(&score_trials(&test.trials, &corpus, &HeadScorer::new("head", head, model.clone()))?)?;
        let cos_auc = score_auc(&score_trials(&test.trials, &corpus, &VectorScorer::new("cos", model, Similarity::Cosine))?)?;
        uplift += head_auc - cos_auc;
        println!(
            "seed {seed}: {} train trials, {} epochs, test AUC head {head_auc:.3} vs cosine {cos_auc:.3}",
            train.trials.len(),
            report.epochs()
        );
    }
    println!("mean uplift {:.3}", uplift / n_seeds as f64);
    Ok(())
}
