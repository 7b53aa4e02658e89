//! First versus last utterances of long sides. With style accommodation,
//! interlocutors converge over a call, so the last utterances of two
//! same-call speakers look alike and same-call negatives get harder.
//!
//!     cargo run --release --example first_last

use speakerbench::corpus::{generate_synthetic, split_speakers, CountDistribution, Split, SplitRatios, SynthConfig};
use speakerbench::eval::{first_last_experiment, BootstrapSettings};
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::scoring::{fit_tfidf, Analyzer, Scorer, Similarity, VectorScorer};
use speakerbench::trials::{build_trials, Difficulty, TrialTargets};

fn main() -> speakerbench::Result<()> {
    for accommodation in [0.0, 0.5] {
        let cfg = SynthConfig {
            n_speakers: 60,
            topic_strength: 0.0,
            accommodation_rate: accommodation,
            utterances_per_side: CountDistribution { mean: 150.0, spread: 30.0 },
            ..SynthConfig::benchmark(0)
        };
        let (corpus, _) = prepare_corpus(&generate_synthetic(&cfg)?, 5, Some(Style::NormLdc))?;
        let assignment = split_speakers(&corpus, SplitRatios::default(), 0)?;
        let docs: Vec<String> = corpus
            .sides()
            .iter()
            .filter(|s| assignment.split_of(&s.speaker_id) == Some(Split::Train))
            .map(|s| s.text())
            .collect();
        let word = VectorScorer::new("tfidf", fit_tfidf(&docs, Analyzer::Word)?, Similarity::Cosine);
        let char4 = VectorScorer::new("char4", fit_tfidf(&docs, Analyzer::Char4)?, Similarity::Cosine);
        let trials = build_trials(&corpus, &assignment, Split::Test, Difficulty::Harder, 0, TrialTargets::default())?;
        let scorers: [&dyn Scorer; 2] = [&word, &char4];
        let result =
            first_last_experiment(&trials.trials, &corpus, &scorers, 50, 100, BootstrapSettings::default())?;
        println!("accommodation {accommodation}: {} trials with both sides >= 100 utterances", result.n_trials);
        for row in &result.rows {
            println!(
                "  {:<6} first 50 {:.3} ({:.3})  last 50 {:.3} ({:.3})",
                row.scorer, row.first.mean, row.first.standard_error, row.last.mean, row.last.standard_error
            );
        }
    }
    Ok(())
}
