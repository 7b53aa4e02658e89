use speakerbench::corpus::{generate_synthetic, split_speakers, Corpus, CountDistribution, Split, SplitAssignment, SplitRatios, SynthConfig};
use speakerbench::eval::{first_last_experiment, parse_window_sizes, sweep_utterances, BootstrapSettings, WindowSize};
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::scoring::{fit_tfidf, Analyzer, Scorer, Similarity, VectorScorer};
use speakerbench::trials::{build_trials, Difficulty, TrialTargets};

fn prepared(cfg: &SynthConfig) -> (Corpus, SplitAssignment, VectorScorer<speakerbench::scoring::TfidfModel>) {
    let (corpus, _) = prepare_corpus(&generate_synthetic(cfg).unwrap(), 5, Some(Style::NormLdc)).unwrap();
    let assignment = split_speakers(&corpus, SplitRatios::default(), 0).unwrap();
    let docs: Vec<String> = corpus
        .sides()
        .iter()
        .filter(|s| assignment.split_of(&s.speaker_id) == Some(Split::Train))
        .map(|s| s.text())
        .collect();
    let scorer = VectorScorer::new("tfidf", fit_tfidf(&docs, Analyzer::Word).unwrap(), Similarity::Cosine);
    (corpus, assignment, scorer)
}

#[test]
fn more_speech_scores_better() {
    let (corpus, assignment, scorer) = prepared(&SynthConfig::benchmark(0));
    let trials = build_trials(&corpus, &assignment, Split::Test, Difficulty::Base, 0, TrialTargets::default()).unwrap();
    let ks = parse_window_sizes("10,25,75,full").unwrap();
    let rows = sweep_utterances(&trials.trials, &corpus, &scorer, &ks, BootstrapSettings { resamples: 200, seed: 0 })
        .unwrap();
    let aucs: Vec<f64> = rows.iter().map(|r| r.auc.mean).collect();
    assert!(aucs[0] < aucs[1] && aucs[1] < aucs[2], "{aucs:?}");
    assert_eq!(rows[3].window, WindowSize::Full);
    assert_eq!(rows[3].short_sides, 0);
    assert!(rows[2].short_sides > 0);
    assert!(sweep_utterances(&trials.trials, &corpus, &scorer, &[WindowSize::Count(5), WindowSize::Count(5)], BootstrapSettings::default()).is_err());
}

#[test]
fn accommodation_makes_last_utterances_harder() {
    let mut gaps = Vec::new();
    for accommodation in [0.0, 0.5] {
        let cfg = SynthConfig {
            n_speakers: 60,
            topic_strength: 0.0,
            accommodation_rate: accommodation,
            utterances_per_side: CountDistribution { mean: 150.0, spread: 30.0 },
            ..SynthConfig::benchmark(0)
        };
        let (corpus, assignment, scorer) = prepared(&cfg);
        let trials =
            build_trials(&corpus, &assignment, Split::Test, Difficulty::Harder, 0, TrialTargets::default()).unwrap();
        let scorers: [&dyn Scorer; 1] = [&scorer];
        let result = first_last_experiment(
            &trials.trials,
            &corpus,
            &scorers,
            50,
            100,
            BootstrapSettings { resamples: 200, seed: 0 },
        )
        .unwrap();
        assert!(result.n_trials > 20);
        let row = &result.rows[0];
        gaps.push(row.first.mean - row.last.mean);
    }
    assert!(gaps[1] > 0.1, "{gaps:?}");
    assert!(gaps[1] > gaps[0] + 0.1, "{gaps:?}");
}

#[test]
fn first_last_without_long_sides_has_a_note() {
    let (corpus, assignment, scorer) = prepared(&SynthConfig {
        n_speakers: 12,
        utterances_per_side: CountDistribution { mean: 20.0, spread: 2.0 },
        ..SynthConfig::benchmark(1)
    });
    let trials = build_trials(&corpus, &assignment, Split::Test, Difficulty::Base, 0, TrialTargets::default()).unwrap();
    let scorers: [&dyn Scorer; 1] = [&scorer];
    let result = first_last_experiment(&trials.trials, &corpus, &scorers, 50, 100, BootstrapSettings::default()).unwrap();
    assert_eq!(result.n_trials, 0);
    assert!(result.rows.is_empty() && result.note.is_some());
}
