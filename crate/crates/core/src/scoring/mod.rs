//! Trial scorers: TF-IDF cosine (word and character 4-gram analyzers),
//! embedding cosine with utterance mean pooling, negated Euclidean distance,
//! and the embedding store that feeds them.

mod embeddings;
mod scores;
mod tfidf;
mod vector;

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

pub use embeddings::{load_embeddings, payload_path, save_embeddings, EmbeddingStore, Granularity};
pub use scores::{read_scores, write_scores, ScoreRecord, ScoreSet};
pub use tfidf::{char_ngrams, fit_tfidf, fit_tfidf_with, vectorize, word_tokens, Analyzer, TfidfModel};
pub use vector::{cosine, mean_pool, neg_euclidean, SparseVec};

use crate::corpus::{encoding, Corpus, SideKey, SpeakerSide};
use crate::error::{Error, Result};
use crate::normalize::Flagged;
use crate::trials::Trial;

/// A small bundled sample of newswire-style text, one document per line,
/// for fitting TF-IDF models on out-of-domain reference text.
pub fn news_reference() -> Vec<&'static str> {
    include_str!("../../data/news_reference.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .collect()
}

/// Anything that maps a side to a feature vector.
pub trait FeatureSource: Sync {
    fn dim(&self) -> usize;

    /// Feature vector for a side; flagged when degenerate (e.g. all-OOV text).
    fn features(&self, side: &SpeakerSide) -> Result<Flagged<SparseVec>>;

    /// Keys the source knows about that `used` does not mention.
    fn unused_keys(&self, _used: &BTreeSet<&SideKey>) -> Vec<SideKey> {
        Vec::new()
    }
}

/// Either kind of bundled feature source, for choosing one at run time.
#[derive(Debug, Clone)]
pub enum Features {
    Tfidf(TfidfModel),
    Embeddings(EmbeddingStore),
}

impl FeatureSource for Features {
    fn dim(&self) -> usize {
        match self {
            Features::Tfidf(m) => m.dim(),
            Features::Embeddings(e) => e.dim(),
        }
    }

    fn features(&self, side: &SpeakerSide) -> Result<Flagged<SparseVec>> {
        match self {
            Features::Tfidf(m) => m.features(side),
            Features::Embeddings(e) => e.features(side),
        }
    }

    fn unused_keys(&self, used: &BTreeSet<&SideKey>) -> Vec<SideKey> {
        match self {
            Features::Tfidf(m) => m.unused_keys(used),
            Features::Embeddings(e) => e.unused_keys(used),
        }
    }
}

/// A similarity score for one pair, with a degeneracy flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub score: f64,
    pub degenerate: bool,
}

/// Two-phase trial scorer: represent each side once, then compare pairs.
pub trait TrialScorer: Sync {
    type Repr: Send + Sync;

    fn name(&self) -> String;

    fn represent(&self, side: &SpeakerSide) -> Result<Self::Repr>;

    fn compare(&self, left: &Self::Repr, right: &Self::Repr) -> Result<PairScore>;

    fn warnings(&self, _used: &BTreeSet<&SideKey>) -> Vec<String> {
        Vec::new()
    }
}

/// Object-safe view of a [`TrialScorer`], for driving several scorers of
/// different representation types together.
pub trait Scorer: Sync {
    fn scorer_name(&self) -> String;

    fn score(&self, trials: &[Trial], corpus: &Corpus) -> Result<ScoreSet>;
}

impl<T: TrialScorer> Scorer for T {
    fn scorer_name(&self) -> String {
        self.name()
    }

    fn score(&self, trials: &[Trial], corpus: &Corpus) -> Result<ScoreSet> {
        score_trials(trials, corpus, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Similarity {
    Cosine,
    /// Negated Euclidean distance (larger means more similar).
    NegEuclidean,
}

/// Scores pairs by a similarity between their feature vectors.
#[derive(Debug, Clone)]
pub struct VectorScorer<F> {
    pub name: String,
    pub features: F,
    pub similarity: Similarity,
}

impl<F: FeatureSource> VectorScorer<F> {
    pub fn new(name: impl Into<String>, features: F, similarity: Similarity) -> Self {
        VectorScorer {
            name: name.into(),
            features,
            similarity,
        }
    }
}

impl<F: FeatureSource> TrialScorer for VectorScorer<F> {
    type Repr = Flagged<SparseVec>;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn represent(&self, side: &SpeakerSide) -> Result<Self::Repr> {
        self.features.features(side)
    }

    fn compare(&self, left: &Self::Repr, right: &Self::Repr) -> Result<PairScore> {
        let degenerate = left.flagged || right.flagged;
        let score = match self.similarity {
            Similarity::Cosine => {
                let c = left.value.cosine(&right.value)?;
                return Ok(PairScore {
                    score: c.value,
                    degenerate: degenerate || c.flagged,
                });
            }
            Similarity::NegEuclidean => -left.value.euclidean(&right.value)?,
        };
        Ok(PairScore { score, degenerate })
    }

    fn warnings(&self, used: &BTreeSet<&SideKey>) -> Vec<String> {
        let unused = self.features.unused_keys(used);
        if unused.is_empty() {
            Vec::new()
        } else {
            vec![format!(
                "{} embedding keys not referenced by any trial (first: {})",
                unused.len(),
                unused[0]
            )]
        }
    }
}

/// Score every trial. Sides are resolved through `corpus`; output records
/// are ordered by trial id.
pub fn score_trials<S: TrialScorer>(trials: &[Trial], corpus: &Corpus, scorer: &S) -> Result<ScoreSet> {
    let mut used: BTreeSet<&SideKey> = BTreeSet::new();
    for t in trials {
        for k in [&t.left, &t.right] {
            if corpus.side(k).is_none() {
                return Err(Error::UnresolvedKey {
                    trial_id: t.trial_id.clone(),
                    key: k.to_string(),
                });
            }
            used.insert(k);
        }
    }
    let keys: Vec<&SideKey> = used.iter().copied().collect();
    let reprs: HashMap<&SideKey, S::Repr> = keys
        .par_iter()
        .map(|k| {
            let side = corpus.side(k).expect("resolved above");
            scorer.represent(side).map(|r| (*k, r)).map_err(|e| match e {
                Error::UnresolvedKey { key, .. } => Error::UnresolvedKey {
                    trial_id: trials
                        .iter()
                        .find(|t| t.left == **k || t.right == **k)
                        .map(|t| t.trial_id.clone())
                        .unwrap_or_default(),
                    key,
                },
                other => other,
            })
        })
        .collect::<Result<_>>()?;

    let mut records: Vec<ScoreRecord> = trials
        .par_iter()
        .map(|t| {
            let s = scorer.compare(&reprs[&t.left], &reprs[&t.right])?;
            if !s.score.is_finite() {
                return Err(Error::Config(format!(
                    "scorer {} produced a non-finite score for trial {}",
                    scorer.name(),
                    t.trial_id
                )));
            }
            Ok(ScoreRecord {
                    trial_id: t.trial_id.clone(),
                    label: t.label,
                    score: s.score,
                    degenerate: s.degenerate,
                })
        })
        .collect::<Result<_>>()?;

    let degenerate = records.iter().filter(|r| r.degenerate).count();
    records.sort_by(|a, b| a.trial_id.cmp(&b.trial_id));
    let warnings = scorer.warnings(&used);
    for w in &warnings {
        log::warn!("{w}");
    }
    let encoding = trials
        .first()
        .and_then(|t| corpus.side(&t.left))
        .map(|s| encoding::current(&s.encoding).to_string());
    Ok(ScoreSet {
        records,
        scorer: scorer.name(),
        higher_is_same: true,
        degenerate,
        warnings,
        difficulty: trials.first().map(|t| t.difficulty),
        encoding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Channel, Provenance, Utterance};
    use crate::trials::{Difficulty, Label};

    fn corpus() -> Corpus {
        let mk = |conv: &str, spk: &str, ch, text: &str| SpeakerSide {
            conversation_id: conv.into(),
            speaker_id: spk.into(),
            channel: ch,
            topic_id: "t".into(),
            encoding: "LDC→NormLDC".into(),
            utterances: vec![Utterance::new(0, text)],
        };
        Corpus::new(
            vec![
                mk("c1", "a", Channel::Left, "the dog barked"),
                mk("c1", "b", Channel::Right, "a cat sat"),
            ],
            Provenance::Canonical,
        )
        .unwrap()
    }

    fn trial(id: &str, l: &str, r: &str) -> Trial {
        Trial {
            trial_id: id.into(),
            left: l.into(),
            right: r.into(),
            label: Label::Negative,
            difficulty: Difficulty::Harder,
        }
    }

    fn scorer() -> VectorScorer<TfidfModel> {
        let model = fit_tfidf(&["the dog barked", "a cat sat", "the cat"], Analyzer::Word).unwrap();
        VectorScorer::new("tfidf", model, Similarity::Cosine)
    }

    #[test]
    fn self_pair_scores_one() {
        let s = score_trials(&[trial("t1", "c1/left", "c1/left")], &corpus(), &scorer()).unwrap();
        assert!((s.records[0].score - 1.0).abs() < 1e-12);
        assert_eq!(s.encoding.as_deref(), Some("NormLDC"));
    }

    #[test]
    fn empty_trials_empty_scores() {
        let s = score_trials(&[], &corpus(), &scorer()).unwrap();
        assert!(s.records.is_empty());
    }

    #[test]
    fn unresolvable_key_names_trial() {
        match score_trials(&[trial("t9", "c1/left", "zz/right")], &corpus(), &scorer()) {
            Err(Error::UnresolvedKey { trial_id, key }) => {
                assert_eq!(trial_id, "t9");
                assert_eq!(key, "zz/right");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn records_sorted_by_trial_id() {
        let s = score_trials(
            &[trial("b", "c1/left", "c1/right"), trial("a", "c1/right", "c1/left")],
            &corpus(),
            &scorer(),
        )
        .unwrap();
        let ids: Vec<_> = s.records.iter().map(|r| r.trial_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }
}
