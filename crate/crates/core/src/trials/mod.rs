//! Verification trials at three topic-control levels.
//!
//! * base: positives pair one speaker across two calls; negatives pair two
//!   speakers from two different calls, with no topic constraint.
//! * hard: positives additionally need different call topics; negatives pair
//!   different speakers from different calls with the same topic.
//! * harder: hard's positives; negatives are the two sides of one call.

mod io;
mod lexicon;
mod report;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use io::{read_trials, write_trials, TrialRecord};
pub use lexicon::{
    extract_noun_lemmas, noun_lemma_overlap, read_lemma_sets, LemmaSource, NounLexicon, OverlapMode,
};
pub use report::{trialset_report, write_stats_csv, TrialReport};

use crate::corpus::{Corpus, SideKey, SpeakerSide, Split, SplitAssignment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Base,
    Hard,
    Harder,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Base, Difficulty::Hard, Difficulty::Harder];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Base => "base",
            Difficulty::Hard => "hard",
            Difficulty::Harder => "harder",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Difficulty::Base),
            "hard" => Ok(Difficulty::Hard),
            "harder" => Ok(Difficulty::Harder),
            other => Err(Error::Config(format!("unknown difficulty {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    fn short(self) -> &'static str {
        match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trial {
    pub trial_id: String,
    pub left: SideKey,
    pub right: SideKey,
    pub label: Label,
    pub difficulty: Difficulty,
}

/// Requested trial counts. `None` positives means every eligible positive;
/// `None` negatives means as many negatives as positives were produced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialTargets {
    pub positives: Option<usize>,
    pub negatives: Option<usize>,
    /// Cap on the number of trials any one speaker takes part in.
    pub max_per_speaker: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub eligible_positive: usize,
    pub eligible_negative: usize,
    pub requested_positive: usize,
    pub requested_negative: usize,
    pub positives: usize,
    pub negatives: usize,
    pub speakers: usize,
    /// Fraction of trials that share at least one side with another trial.
    pub shared_side_rate: f64,
}

impl BuildStats {
    pub fn positive_shortfall(&self) -> usize {
        self.requested_positive.saturating_sub(self.positives)
    }

    pub fn negative_shortfall(&self) -> usize {
        self.requested_negative.saturating_sub(self.negatives)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub trials: Vec<Trial>,
    pub split: Split,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub stats: BuildStats,
}

/// Whether two sides form an eligible positive pair at `difficulty`.
pub fn is_positive_pair(a: &SpeakerSide, b: &SpeakerSide, difficulty: Difficulty) -> bool {
    a.speaker_id == b.speaker_id
        && a.conversation_id != b.conversation_id
        && (difficulty == Difficulty::Base || a.topic_id != b.topic_id)
}

/// Whether two sides form an eligible negative pair at `difficulty`.
pub fn is_negative_pair(a: &SpeakerSide, b: &SpeakerSide, difficulty: Difficulty) -> bool {
    if a.speaker_id == b.speaker_id {
        return false;
    }
    match difficulty {
        Difficulty::Base => a.conversation_id != b.conversation_id,
        Difficulty::Hard => a.conversation_id != b.conversation_id && a.topic_id == b.topic_id,
        Difficulty::Harder => a.conversation_id == b.conversation_id,
    }
}

type Pair = (usize, usize);

fn positive_population(sides: &[&SpeakerSide], difficulty: Difficulty) -> Vec<Pair> {
    let mut by_speaker: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in sides.iter().enumerate() {
        by_speaker.entry(&s.speaker_id).or_default().push(i);
    }
    let mut pop = Vec::new();
    for group in by_speaker.values() {
        for (x, &i) in group.iter().enumerate() {
            for &j in &group[x + 1..] {
                if is_positive_pair(sides[i], sides[j], difficulty) {
                    pop.push((i, j));
                }
            }
        }
    }
    pop.sort_unstable();
    pop
}

fn negative_population(sides: &[&SpeakerSide], difficulty: Difficulty) -> Vec<Pair> {
    let mut pop = Vec::new();
    match difficulty {
        Difficulty::Base => {
            for i in 0..sides.len() {
                for j in i + 1..sides.len() {
                    if is_negative_pair(sides[i], sides[j], difficulty) {
                        pop.push((i, j));
                    }
                }
            }
        }
        Difficulty::Hard => {
            let mut by_topic: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, s) in sides.iter().enumerate() {
                by_topic.entry(&s.topic_id).or_default().push(i);
            }
            for group in by_topic.values() {
                for (x, &i) in group.iter().enumerate() {
                    for &j in &group[x + 1..] {
                        if is_negative_pair(sides[i], sides[j], difficulty) {
                            pop.push((i, j));
                        }
                    }
                }
            }
            pop.sort_unstable();
        }
        Difficulty::Harder => {
            // sides are sorted by (conversation, channel), so a call's two sides are adjacent
            for i in 0..sides.len().saturating_sub(1) {
                if is_negative_pair(sides[i], sides[i + 1], difficulty) {
                    pop.push((i, i + 1));
                }
            }
        }
    }
    pop
}

fn sample_pairs(
    rng: &mut ChaCha8Rng,
    population: &[Pair],
    k: usize,
    sides: &[&SpeakerSide],
    cap: Option<usize>,
    usage: &mut HashMap<String, usize>,
) -> Vec<Pair> {
    let k = k.min(population.len());
    match cap {
        None => {
            let mut idx = rand::seq::index::sample(rng, population.len(), k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| population[i]).collect()
        }
        Some(cap) => {
            let mut order: Vec<usize> = (0..population.len()).collect();
            order.shuffle(rng);
            let mut chosen = Vec::with_capacity(k);
            for i in order {
                if chosen.len() == k {
                    break;
                }
                let (a, b) = population[i];
                let (sa, sb) = (&sides[a].speaker_id, &sides[b].speaker_id);
                let ua = usage.get(sa).copied().unwrap_or(0);
                let ub = usage.get(sb).copied().unwrap_or(0);
                let fits = if sa == sb { ua + 2 <= cap } else { ua < cap && ub < cap };
                if fits {
                    *usage.entry(sa.clone()).or_default() += 1;
                    *usage.entry(sb.clone()).or_default() += 1;
                    chosen.push(population[i]);
                }
            }
            chosen.sort_unstable();
            chosen
        }
    }
}

/// Build the trial set of one split at one difficulty level.
///
/// Eligible pairs are enumerated exhaustively and sampled uniformly without
/// replacement; a population smaller than the target is a shortfall recorded
/// in the stats, not an error.
pub fn build_trials(
    corpus: &Corpus,
    assignment: &SplitAssignment,
    split: Split,
    difficulty: Difficulty,
    seed: u64,
    targets: TrialTargets,
) -> Result<TrialSet> {
    let mut sides: Vec<&SpeakerSide> = Vec::new();
    for side in corpus.sides() {
        let s = assignment.split_of(&side.speaker_id).ok_or_else(|| {
            Error::Config(format!("speaker {} has no split assignment", side.speaker_id))
        })?;
        if s == split {
            sides.push(side);
        }
    }

    let positives_pop = positive_population(&sides, difficulty);
    let negatives_pop = negative_population(&sides, difficulty);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut usage = HashMap::new();
    let want_pos = targets.positives.unwrap_or(positives_pop.len());
    let positives = sample_pairs(
        &mut rng,
        &positives_pop,
        want_pos,
        &sides,
        targets.max_per_speaker,
        &mut usage,
    );
    let want_neg = targets.negatives.unwrap_or(positives.len());
    let negatives = sample_pairs(
        &mut rng,
        &negatives_pop,
        want_neg,
        &sides,
        targets.max_per_speaker,
        &mut usage,
    );

    let mut trials = Vec::with_capacity(positives.len() + negatives.len());
    for (label, pairs) in [(Label::Positive, &positives), (Label::Negative, &negatives)] {
        for (n, &(a, b)) in pairs.iter().enumerate() {
            trials.push(Trial {
                trial_id: format!("{difficulty}-{split}-{}-{n:05}", label.short()),
                left: sides[a].key(),
                right: sides[b].key(),
                label,
                difficulty,
            });
        }
    }

    let mut side_uses: HashMap<&SideKey, usize> = HashMap::new();
    for t in &trials {
        *side_uses.entry(&t.left).or_default() += 1;
        *side_uses.entry(&t.right).or_default() += 1;
    }
    let shared = trials
        .iter()
        .filter(|t| side_uses[&t.left] > 1 || side_uses[&t.right] > 1)
        .count();
    let speakers: BTreeSet<&str> = positives
        .iter()
        .chain(&negatives)
        .flat_map(|&(a, b)| [sides[a].speaker_id.as_str(), sides[b].speaker_id.as_str()])
        .collect();

    let stats = BuildStats {
        eligible_positive: positives_pop.len(),
        eligible_negative: negatives_pop.len(),
        requested_positive: want_pos,
        requested_negative: want_neg,
        positives: positives.len(),
        negatives: negatives.len(),
        speakers: speakers.len(),
        shared_side_rate: if trials.is_empty() {
            0.0
        } else {
            shared as f64 / trials.len() as f64
        },
    };
    if stats.positive_shortfall() > 0 || stats.negative_shortfall() > 0 {
        log::info!(
            "{difficulty}/{split}: shortfall of {} positive and {} negative trials",
            stats.positive_shortfall(),
            stats.negative_shortfall()
        );
    }
    Ok(TrialSet {
        trials,
        split,
        difficulty,
        seed,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Channel, Provenance, Utterance};

    fn side(conv: &str, spk: &str, ch: Channel, topic: &str) -> SpeakerSide {
        SpeakerSide {
            conversation_id: conv.into(),
            speaker_id: spk.into(),
            channel: ch,
            topic_id: topic.into(),
            encoding: "LDC".into(),
            utterances: vec![Utterance::new(0, "text")],
        }
    }

    fn two_call_corpus() -> (Corpus, SplitAssignment) {
        let corpus = Corpus::new(
            vec![
                side("C1", "s1", Channel::Left, "T1"),
                side("C1", "s2", Channel::Right, "T1"),
                side("C2", "s1", Channel::Left, "T2"),
                side("C2", "s3", Channel::Right, "T2"),
            ],
            Provenance::Canonical,
        )
        .unwrap();
        let mapping = ["s1", "s2", "s3"]
            .into_iter()
            .map(|s| (s.to_string(), Split::Test))
            .collect();
        (corpus, SplitAssignment { mapping, seed: 0 })
    }

    fn keys(ts: &TrialSet, label: Label) -> Vec<(String, String)> {
        ts.trials
            .iter()
            .filter(|t| t.label == label)
            .map(|t| (t.left.to_string(), t.right.to_string()))
            .collect()
    }

    #[test]
    fn harder_on_two_calls() {
        let (corpus, assignment) = two_call_corpus();
        let targets = TrialTargets {
            negatives: Some(10),
            ..TrialTargets::default()
        };
        let ts = build_trials(&corpus, &assignment, Split::Test, Difficulty::Harder, 1, targets).unwrap();
        assert_eq!(keys(&ts, Label::Positive), vec![("C1/left".into(), "C2/left".into())]);
        assert_eq!(
            keys(&ts, Label::Negative),
            vec![
                ("C1/left".into(), "C1/right".into()),
                ("C2/left".into(), "C2/right".into())
            ]
        );
        assert_eq!(ts.stats.negative_shortfall(), 8);
    }

    #[test]
    fn hard_negatives_unsatisfiable() {
        let (corpus, assignment) = two_call_corpus();
        let ts = build_trials(&corpus, &assignment, Split::Test, Difficulty::Hard, 1, TrialTargets::default()).unwrap();
        assert!(keys(&ts, Label::Negative).is_empty());
        assert_eq!(ts.stats.eligible_negative, 0);
        assert_eq!(ts.stats.positives, 1);
    }

    #[test]
    fn empty_corpus_empty_set() {
        let corpus = Corpus::empty(Provenance::Canonical);
        let assignment = SplitAssignment {
            mapping: BTreeMap::new(),
            seed: 0,
        };
        let ts = build_trials(&corpus, &assignment, Split::Test, Difficulty::Base, 0, TrialTargets::default()).unwrap();
        assert!(ts.trials.is_empty());
    }

    #[test]
    fn missing_assignment_is_config_error() {
        let (corpus, mut assignment) = two_call_corpus();
        assignment.mapping.remove("s3");
        assert!(matches!(
            build_trials(&corpus, &assignment, Split::Test, Difficulty::Base, 0, TrialTargets::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn per_speaker_cap() {
        let (corpus, assignment) = two_call_corpus();
        let targets = TrialTargets {
            positives: Some(5),
            negatives: Some(5),
            max_per_speaker: Some(1),
        };
        let ts = build_trials(&corpus, &assignment, Split::Test, Difficulty::Harder, 3, targets).unwrap();
        // the lone positive uses s1 twice, which the cap forbids; one harder negative fits
        assert_eq!(ts.stats.positives, 0);
        assert_eq!(ts.stats.negatives, 1);
    }
}
