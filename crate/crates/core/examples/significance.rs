//! Bootstrap standard errors for two scorers on the same trials, paired
//! significance tests over the resamples, and the report tables.
//!
//!     cargo run --release --example significance

use speakerbench::corpus::{generate_synthetic, split_speakers, Split, SplitRatios, SynthConfig};
use speakerbench::eval::{
    bootstrap, paired_ttest, report_csv, report_markdown, wilcoxon, EvalRow, Metric,
};
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::scoring::{fit_tfidf, news_reference, score_trials, Analyzer, Similarity, VectorScorer};
use speakerbench::trials::{build_trials, Difficulty, TrialTargets};

fn main() -> speakerbench::Result<()> {
    let (corpus, _) = prepare_corpus(&generate_synthetic(&SynthConfig::benchmark(4))?, 5, Some(Style::NormLdc))?;
    let assignment = split_speakers(&corpus, SplitRatios::default(), 4)?;
    let news = news_reference();
    let word = VectorScorer::new("tfidf", fit_tfidf(&news, Analyzer::Word)?, Similarity::Cosine);
    let char4 = VectorScorer::new("char4", fit_tfidf(&news, Analyzer::Char4)?, Similarity::Cosine);

    let (n, seed) = (1000, 11);
    let mut rows = Vec::new();
    for difficulty in Difficulty::ALL {
        let trials = build_trials(&corpus, &assignment, Split::Test, difficulty, 4, TrialTargets::default())?;
        let mut aucs = Vec::new();
        for scorer in [&word, &char4] {
            let s = score_trials(&trials.trials, &corpus, scorer)?;
            let auc = bootstrap(Metric::Auc, &s.scores(), &s.labels(), n, seed)?;
            let eer = bootstrap(Metric::Eer, &s.scores(), &s.labels(), n, seed)?;
            rows.push(EvalRow {
                model: scorer.name.clone(),
                encoding: s.encoding.clone().unwrap_or_default(),
                difficulty: difficulty.to_string(),
                n_trials: s.len(),
                auc: Some(auc.mean),
                auc_se: Some(auc.standard_error),
                eer: Some(eer.mean),
                eer_se: Some(eer.standard_error),
                resamples: n,
                seed,
                redraws: auc.redraws,
            });
            aucs.push(auc);
        }
        // same seed and labels, so resample i is the same trial multiset for both
        let t = paired_ttest(&aucs[0].resample_values, &aucs[1].resample_values)?;
        let w = wilcoxon(&aucs[0].resample_values, &aucs[1].resample_values)?;
        println!(
            "{difficulty}: tfidf vs char4  t = {:.2} (p = {:.2e}), W = {} (p = {:.2e})",
            t.statistic, t.p_value, w.statistic, w.p_value
        );
    }
    println!("\n{}", report_markdown(&rows));
    print!("{}", report_csv(&rows, &[("seed".into(), seed.to_string())])?);
    Ok(())
}
