//! Out-of-the-box scorers: word TF-IDF fit on out-of-domain reference text,
//! character 4-gram TF-IDF, and TF-IDF fit on training transcripts.
//!
//!     cargo run --release --example baseline_scorers

use speakerbench::corpus::{generate_synthetic, split_speakers, Split, SplitRatios, SynthConfig};
use speakerbench::eval::{score_auc, score_eer};
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::scoring::{fit_tfidf, news_reference, score_trials, Analyzer, Similarity, VectorScorer};
use speakerbench::trials::{build_trials, Difficulty, TrialTargets};

fn main() -> speakerbench::Result<()> {
    let (corpus, _) = prepare_corpus(&generate_synthetic(&SynthConfig::benchmark(1))?, 5, Some(Style::NormLdc))?;
    let assignment = split_speakers(&corpus, SplitRatios::default(), 1)?;
    let trials = build_trials(&corpus, &assignment, Split::Test, Difficulty::Base, 1, TrialTargets::default())?;

    let news = news_reference();
    let train_docs: Vec<String> = corpus
        .sides()
        .iter()
        .filter(|s| assignment.split_of(&s.speaker_id) == Some(Split::Train))
        .map(|s| s.text())
        .collect();
    let scorers = [
        VectorScorer::new("tfidf-news", fit_tfidf(&news, Analyzer::Word)?, Similarity::Cosine),
        VectorScorer::new("char4-news", fit_tfidf(&news, Analyzer::Char4)?, Similarity::Cosine),
        VectorScorer::new("tfidf-train", fit_tfidf(&train_docs, Analyzer::Word)?, Similarity::Cosine),
    ];
    println!("{} base test trials", trials.trials.len());
    for scorer in &scorers {
        let scores = score_trials(&trials.trials, &corpus, scorer)?;
        println!(
            "{:<12} AUC {:.3}  EER {:.3}  degenerate {}",
            scorer.name,
            score_auc(&scores)?,
            score_eer(&scores)?,
            scores.degenerate
        );
    }
    Ok(())
}
