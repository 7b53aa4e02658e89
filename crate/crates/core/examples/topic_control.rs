//! Topic control on synthetic conversations: TF-IDF cosine AUC falls as the
//! trial construction removes topic as a shortcut.
//!
//!     cargo run --release --example topic_control -- [n_seeds]

use speakerbench::corpus::{generate_synthetic, split_speakers, Split, SplitRatios, SynthConfig};
use speakerbench::eval::{bootstrap, Metric};
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::scoring::{fit_tfidf, score_trials, Analyzer, Similarity, VectorScorer};
use speakerbench::trials::{build_trials, Difficulty, TrialTargets};

fn main() -> speakerbench::Result<()> {
    let n_seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut totals = [0.0; 3];
    for seed in 0..n_seeds {
        let raw = generate_synthetic(&SynthConfig::benchmark(seed))?;
        let (corpus, _) = prepare_corpus(&raw, 5, Some(Style::NormLdc))?;
        let assignment = split_speakers(&corpus, SplitRatios::default(), seed)?;
        let train_docs: Vec<String> = corpus
            .sides()
            .iter()
            .filter(|s| assignment.split_of(&s.speaker_id) == Some(Split::Train))
            .map(|s| s.text())
            .collect();
        let scorer = VectorScorer::new("tfidf", fit_tfidf(&train_docs, Analyzer::Word)?, Similarity::Cosine);
        let mut line = format!("seed {seed}:");
        for (i, difficulty) in Difficulty::ALL.into_iter().enumerate() {
            let trials = build_trials(&corpus, &assignment, Split::Test, difficulty, seed, TrialTargets::default())?;
            let scores = score_trials(&trials.trials, &corpus, &scorer)?;
            let b = bootstrap(Metric::Auc, &scores.scores(), &scores.labels(), 1000, seed)?;
            totals[i] += b.mean;
            line += &format!("  {difficulty} {:.3}±{:.3} (n={})", b.mean, b.standard_error, trials.trials.len());
        }
        println!("{line}");
    }
    let n = n_seeds as f64;
    println!(
        "mean AUC  base {:.3}  hard {:.3}  harder {:.3}",
        totals[0] / n,
        totals[1] / n,
        totals[2] / n
    );
    Ok(())
}
