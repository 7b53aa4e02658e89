use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

/// Train/validation/test proportions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios(pub [f64; 3]);

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios([0.5, 0.25, 0.25])
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Config(format!("split ratios must be non-negative: {:?}", self.0)));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Largest-remainder allocation of `n` items; every size is within one of `n * ratio`.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let exact: Vec<f64> = self.0.iter().map(|r| r * n as f64).collect();
        let mut sizes = [0usize; 3];
        for (s, e) in sizes.iter_mut().zip(&exact) {
            *s = e.floor() as usize;
        }
        let mut left = n - sizes.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..3).collect();
        // stable sort keeps earlier splits first on equal remainders
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            sizes[i] += 1;
            left -= 1;
        }
        sizes
    }
}

impl FromStr for SplitRatios {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad ratio {p:?}")))
            })
            .collect::<Result<_>>()?;
        let arr: [f64; 3] = parts
            .try_into()
            .map_err(|_| Error::Config(format!("expected three ratios, got {s:?}")))?;
        let r = SplitRatios(arr);
        r.validate()?;
        Ok(r)
    }
}

/// Speaker → split mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub mapping: BTreeMap<String, Split>,
    pub seed: u64,
}

impl SplitAssignment {
    pub fn split_of(&self, speaker: &str) -> Option<Split> {
        self.mapping.get(speaker).copied()
    }

    pub fn speakers_in(&self, split: Split) -> impl Iterator<Item = &str> {
        self.mapping
            .iter()
            .filter(move |(_, s)| **s == split)
            .map(|(k, _)| k.as_str())
    }

    pub fn count(&self, split: Split) -> usize {
        self.mapping.values().filter(|s| **s == split).count()
    }
}

/// Shuffle speakers with `seed`, then cut the shuffled list by `ratios`.
pub fn split_speakers(corpus: &Corpus, ratios: SplitRatios, seed: u64) -> Result<SplitAssignment> {
    ratios.validate()?;
    let mut speakers: Vec<&str> = corpus.speakers().into_iter().collect();
    if speakers.len() < 3 {
        return Err(Error::Config(format!(
            "{} speakers cannot fill 3 splits",
            speakers.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    speakers.shuffle(&mut rng);
    let sizes = ratios.sizes(speakers.len());
    let mut mapping = BTreeMap::new();
    let mut it = speakers.into_iter();
    for (split, size) in Split::ALL.into_iter().zip(sizes) {
        for spk in it.by_ref().take(size) {
            mapping.insert(spk.to_string(), split);
        }
    }
    Ok(SplitAssignment { mapping, seed })
}
