//! Speaker-disjoint splits and trials at the three topic-control levels,
//! with the noun-lemma overlap summary per level.
//!
//!     cargo run --release --example build_trials

use speakerbench::corpus::{
    generate_synthetic, split_speakers, synthetic_noun_lexicon, vocabulary, Split, SplitRatios, SynthConfig,
};
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::trials::{build_trials, trialset_report, Difficulty, LemmaSource, OverlapMode, TrialTargets};

fn main() -> speakerbench::Result<()> {
    let cfg = SynthConfig::benchmark(7);
    let (corpus, _) = prepare_corpus(&generate_synthetic(&cfg)?, 5, Some(Style::NormLdc))?;
    let assignment = split_speakers(&corpus, SplitRatios::default(), 7)?;
    for split in Split::ALL {
        println!("{split}: {} speakers", assignment.count(split));
    }

    let lemmas = LemmaSource::Lexicon(synthetic_noun_lexicon(&vocabulary(cfg.n_topics)));
    println!("\nlevel    pos   neg   %overlap pos  %overlap neg");
    for difficulty in Difficulty::ALL {
        let set = build_trials(&corpus, &assignment, Split::Test, difficulty, 7, TrialTargets::default())?;
        let r = trialset_report(&set.trials, &corpus, &lemmas, OverlapMode::Jaccard)?;
        println!(
            "{:<8} {:>4}  {:>4}  {:>12.1}  {:>12.1}",
            difficulty.as_str(),
            r.n_pos,
            r.n_neg,
            r.pct_pos,
            r.pct_neg
        );
    }
    let set = build_trials(&corpus, &assignment, Split::Test, Difficulty::Harder, 7, TrialTargets::default())?;
    let t = &set.trials[0];
    println!("\nfirst harder trial: {} {} vs {} ({:?})", t.trial_id, t.left, t.right, t.label);
    Ok(())
}
