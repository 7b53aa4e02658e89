use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{LemmaSource, OverlapMode, Trial};
use crate::corpus::{Corpus, SideKey};
use crate::error::{Error, Result};

/// Per-label overlap summary of a trial set.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrialReport {
    /// Mean noun-lemma overlap of positive trials, in percent.
    pub pct_pos: f64,
    pub pct_neg: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_total: usize,
    pub n_speakers: usize,
}

pub fn trialset_report(
    trials: &[Trial],
    corpus: &Corpus,
    source: &LemmaSource,
    mode: OverlapMode,
) -> Result<TrialReport> {
    let mut keys: BTreeSet<&SideKey> = BTreeSet::new();
    for t in trials {
        keys.insert(&t.left);
        keys.insert(&t.right);
    }
    let mut sides = Vec::with_capacity(keys.len());
    for t in trials {
        for k in [&t.left, &t.right] {
            if corpus.side(k).is_none() {
                return Err(Error::UnresolvedKey {
                    trial_id: t.trial_id.clone(),
                    key: k.to_string(),
                });
            }
        }
    }
    for k in keys {
        sides.push((k, corpus.side(k).expect("checked above")));
    }
    let lemmas: HashMap<&SideKey, BTreeSet<String>> =
        sides.par_iter().map(|(k, s)| (*k, source.lemmas(s))).collect();
    let overlaps: Vec<(bool, f64)> = trials
        .par_iter()
        .map(|t| {
            let o = super::noun_lemma_overlap(&lemmas[&t.left], &lemmas[&t.right], mode);
            (t.label.is_positive(), o)
        })
        .collect();

    let mean = |pos: bool| {
        let v: Vec<f64> = overlaps.iter().filter(|(p, _)| *p == pos).map(|(_, o)| *o).collect();
        if v.is_empty() {
            0.0
        } else {
            100.0 * v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let n_pos = overlaps.iter().filter(|(p, _)| *p).count();
    let speakers: BTreeSet<&str> = trials
        .iter()
        .flat_map(|t| [&t.left, &t.right])
        .filter_map(|k| corpus.side(k))
        .map(|s| s.speaker_id.as_str())
        .collect();
    Ok(TrialReport {
        pct_pos: mean(true),
        pct_neg: mean(false),
        n_pos,
        n_neg: trials.len() - n_pos,
        n_total: trials.len(),
        n_speakers: speakers.len(),
    })
}

/// Write rows of the trial statistics table (one row per labelled report).
pub fn write_stats_csv(rows: &[(String, TrialReport)], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "set,pct_pos,pct_neg,n_pos,n_neg,n_total,n_speakers").map_err(io)?;
    for (name, r) in rows {
        writeln!(
            w,
            "{name},{:.1},{:.1},{},{},{},{}",
            r.pct_pos, r.pct_neg, r.n_pos, r.n_neg, r.n_total, r.n_speakers
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Channel, Provenance, SpeakerSide, Utterance};
    use crate::trials::{Difficulty, Label, NounLexicon};

    fn corpus() -> Corpus {
        let mk = |conv: &str, spk: &str, ch, text: &str| SpeakerSide {
            conversation_id: conv.into(),
            speaker_id: spk.into(),
            channel: ch,
            topic_id: "t".into(),
            encoding: "LDC".into(),
            utterances: vec![Utterance::new(0, text)],
        };
        Corpus::new(
            vec![
                mk("c1", "a", Channel::Left, "my dogs and fish"),
                mk("c1", "b", Channel::Right, "my dog"),
                mk("c2", "a", Channel::Left, "fish and dogs"),
                mk("c2", "c", Channel::Right, "cars"),
            ],
            Provenance::Canonical,
        )
        .unwrap()
    }

    fn lex() -> LemmaSource {
        LemmaSource::Lexicon(NounLexicon::from_pairs(
            [("dogs", "dog"), ("dog", "dog"), ("fish", "fish"), ("cars", "car")]
                .map(|(a, b)| (a.to_string(), b.to_string())),
        ))
    }

    fn trial(l: &str, r: &str, label: Label) -> Trial {
        Trial {
            trial_id: format!("{l}-{r}"),
            left: l.into(),
            right: r.into(),
            label,
            difficulty: Difficulty::Base,
        }
    }

    #[test]
    fn identical_positive_is_100() {
        let r = trialset_report(
            &[trial("c1/left", "c2/left", Label::Positive), trial("c1/left", "c1/right", Label::Negative)],
            &corpus(),
            &lex(),
            OverlapMode::Jaccard,
        )
        .unwrap();
        assert_eq!(r.pct_pos, 100.0);
        assert_eq!(r.pct_neg, 50.0);
        assert_eq!((r.n_pos, r.n_neg, r.n_total, r.n_speakers), (1, 1, 2, 2));
    }

    #[test]
    fn empty_is_zero() {
        let r = trialset_report(&[], &corpus(), &lex(), OverlapMode::Jaccard).unwrap();
        assert_eq!(r, TrialReport::default());
    }

    #[test]
    fn unresolved_key() {
        let err = trialset_report(&[trial("c9/left", "c1/left", Label::Negative)], &corpus(), &lex(), OverlapMode::Jaccard)
            .unwrap_err();
        assert!(matches!(err, Error::UnresolvedKey { .. }));
    }
}
