//! How much speech is needed: AUC as sides are cut to their first k
//! utterances, written as CSV and an SVG line plot.
//!
//!     cargo run --release --example utterance_sweep -- [out.svg]

use speakerbench::corpus::{generate_synthetic, split_speakers, Split, SplitRatios, SynthConfig};
use speakerbench::eval::{parse_window_sizes, sweep_csv, sweep_svg, sweep_utterances, BootstrapSettings, SweepPoint};
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::scoring::{fit_tfidf, Analyzer, Similarity, VectorScorer};
use speakerbench::trials::{build_trials, Difficulty, TrialTargets};

fn main() -> speakerbench::Result<()> {
    let out = std::env::args().nth(1);
    let (corpus, _) = prepare_corpus(&generate_synthetic(&SynthConfig::benchmark(0))?, 5, Some(Style::NormLdc))?;
    let assignment = split_speakers(&corpus, SplitRatios::default(), 0)?;
    let docs: Vec<String> = corpus
        .sides()
        .iter()
        .filter(|s| assignment.split_of(&s.speaker_id) == Some(Split::Train))
        .map(|s| s.text())
        .collect();
    let trials = build_trials(&corpus, &assignment, Split::Test, Difficulty::Base, 0, TrialTargets::default())?;
    let ks = parse_window_sizes("10,25,50,75,full")?;
    let boot = BootstrapSettings { resamples: 500, seed: 0 };

    let mut points = Vec::new();
    for (name, analyzer) in [("tfidf", Analyzer::Word), ("char4", Analyzer::Char4)] {
        let scorer = VectorScorer::new(name, fit_tfidf(&docs, analyzer)?, Similarity::Cosine);
        let rows = sweep_utterances(&trials.trials, &corpus, &scorer, &ks, boot)?;
        points.extend(rows.iter().map(SweepPoint::from));
    }
    print!("{}", sweep_csv(&points, &[])?);
    if let Some(path) = out {
        std::fs::write(&path, sweep_svg(&points)).map_err(|e| speakerbench::Error::io(&path, e))?;
        println!("wrote {path}");
    }
    Ok(())
}
