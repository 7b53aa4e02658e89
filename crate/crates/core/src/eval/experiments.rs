use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap, BootstrapResult};
use super::metrics::Metric;
use crate::corpus::{Corpus, SideKey};
use crate::error::{Error, Result};
use crate::normalize::{truncate_window, WindowMode};
use crate::scoring::{ScoreSet, Scorer};
use crate::trials::Trial;

/// Number of utterances kept per side in a sweep, or the whole side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WindowSize {
    Count(usize),
    Full,
}

impl fmt::Display for WindowSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowSize::Count(k) => write!(f, "{k}"),
            WindowSize::Full => f.write_str("full"),
        }
    }
}

impl FromStr for WindowSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(WindowSize::Full);
        }
        match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(WindowSize::Count(k)),
            _ => Err(Error::Config(format!("invalid window size '{s}' (positive integer or 'full')"))),
        }
    }
}

/// Parse a comma-separated list such as `25,75,135,full`.
pub fn parse_window_sizes(s: &str) -> Result<Vec<WindowSize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::parse)
        .collect()
}

/// Resampling settings shared by the experiment drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapSettings {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        BootstrapSettings { resamples: 1000, seed: 0 }
    }
}

fn evaluate(scores: &ScoreSet, boot: BootstrapSettings) -> Result<BootstrapResult> {
    bootstrap(Metric::Auc, &scores.scores(), &scores.labels(), boot.resamples, boot.seed)
}

/// Keep only the sides the trials reference, windowed.
fn windowed_corpus(
    corpus: &Corpus,
    keys: &HashSet<&SideKey>,
    mode: WindowMode,
    window: WindowSize,
) -> Result<(Corpus, usize)> {
    let mut short = 0;
    let windowed = corpus.try_map_sides(|side| match window {
        WindowSize::Full => Ok(side.clone()),
        WindowSize::Count(k) => {
            let w = truncate_window(side, mode, k)?;
            if w.flagged && keys.contains(&side.key()) {
                short += 1;
            }
            Ok(w.value)
        }
    })?;
    Ok((windowed, short))
}

fn trial_keys(trials: &[Trial]) -> HashSet<&SideKey> {
    trials.iter().flat_map(|t| [&t.left, &t.right]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scorer: String,
    pub window: WindowSize,
    pub n_trials: usize,
    /// Referenced sides shorter than the window (kept whole).
    pub short_sides: usize,
    pub auc: BootstrapResult,
}

/// Re-score the trials with every side cut to its first `k` utterances, for
/// each `k` in ascending `ks`.
pub fn sweep_utterances(
    trials: &[Trial],
    corpus: &Corpus,
    scorer: &dyn Scorer,
    ks: &[WindowSize],
    boot: BootstrapSettings,
) -> Result<Vec<SweepRow>> {
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("sweep window sizes must be strictly ascending".into()));
    }
    let keys = trial_keys(trials);
    ks.iter()
        .map(|&window| {
            let (windowed, short_sides) = windowed_corpus(corpus, &keys, WindowMode::First, window)?;
            let scores = scorer.score(trials, &windowed)?;
            Ok(SweepRow {
                scorer: scorer.scorer_name(),
                window,
                n_trials: trials.len(),
                short_sides,
                auc: evaluate(&scores, boot)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstLastRow {
    pub scorer: String,
    pub first: BootstrapResult,
    pub last: BootstrapResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstLastResult {
    pub k: usize,
    pub min_len: usize,
    /// Trials whose two sides both reach `min_len` utterances.
    pub n_trials: usize,
    pub rows: Vec<FirstLastRow>,
    /// Why no rows were produced, when that happens.
    pub note: Option<String>,
}

/// Compare each scorer on the first `k` versus the last `k` utterances of
/// every side, restricted to trials whose sides both have at least
/// `min_len` utterances.
pub fn first_last_experiment(
    trials: &[Trial],
    corpus: &Corpus,
    scorers: &[&dyn Scorer],
    k: usize,
    min_len: usize,
    boot: BootstrapSettings,
) -> Result<FirstLastResult> {
    if k == 0 {
        return Err(Error::Config("window size must be at least 1".into()));
    }
    let mut kept = Vec::new();
    for t in trials {
        let len = |key: &SideKey| {
            corpus.side(key).map(|s| s.len()).ok_or_else(|| Error::UnresolvedKey {
                trial_id: t.trial_id.clone(),
                key: key.to_string(),
            })
        };
        if len(&t.left)? >= min_len && len(&t.right)? >= min_len {
            kept.push(t.clone());
        }
    }
    let mut result = FirstLastResult {
        k,
        min_len,
        n_trials: kept.len(),
        rows: Vec::new(),
        note: None,
    };
    let n_pos = kept.iter().filter(|t| t.label.is_positive()).count();
    if kept.is_empty() {
        result.note = Some(format!("no trial has both sides with at least {min_len} utterances"));
        return Ok(result);
    }
    if n_pos == 0 || n_pos == kept.len() {
        result.note = Some(format!(
            "the {} trials with both sides of at least {min_len} utterances are all one class",
            kept.len()
        ));
        return Ok(result);
    }
    let keys = trial_keys(&kept);
    let (first, _) = windowed_corpus(corpus, &keys, WindowMode::First, WindowSize::Count(k))?;
    let (last, _) = windowed_corpus(corpus, &keys, WindowMode::Last, WindowSize::Count(k))?;
    for scorer in scorers {
        result.rows.push(FirstLastRow {
            scorer: scorer.scorer_name(),
            first: evaluate(&scorer.score(&kept, &first)?, boot)?,
            last: evaluate(&scorer.score(&kept, &last)?, boot)?,
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_sizes() {
        assert_eq!(
            parse_window_sizes("25,75, 135,full").unwrap(),
            [
                WindowSize::Count(25),
                WindowSize::Count(75),
                WindowSize::Count(135),
                WindowSize::Full
            ]
        );
        assert!(parse_window_sizes("0").is_err());
        assert!(parse_window_sizes("").unwrap().is_empty());
        assert!(WindowSize::Count(1000) < WindowSize::Full);
    }
}
