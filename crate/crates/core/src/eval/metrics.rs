use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Auc,
    Eer,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Auc => "auc",
            Metric::Eer => "eer",
        }
    }

    pub fn compute(self, scores: &[f64], labels: &[bool]) -> Result<f64> {
        match self {
            Metric::Auc => auc(scores, labels),
            Metric::Eer => eer(scores, labels),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc" => Ok(Metric::Auc),
            "eer" => Ok(Metric::Eer),
            other => Err(Error::Config(format!("unknown metric '{other}' (expected auc or eer)"))),
        }
    }
}

fn class_counts(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    let p = labels.iter().filter(|&&l| l).count();
    let n = labels.len() - p;
    if p == 0 || n == 0 {
        return Err(Error::SingleClass(format!("{p} positive and {n} negative trials")));
    }
    Ok((p, n))
}

fn sorted_order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    idx
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann–Whitney with midranks).
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (p, n) = class_counts(scores, labels)?;
    let idx = sorted_order(scores);
    // Twice the positive rank sum, kept integral so that label swaps sum exactly to 1.
    let mut rank2_pos: u64 = 0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share the midrank (i+j+2)/2
        let mid2 = (i + j + 2) as u64;
        let pos = idx[i..=j].iter().filter(|&&k| labels[k]).count() as u64;
        rank2_pos += mid2 * pos;
        i = j + 1;
    }
    let (p, n) = (p as u64, n as u64);
    let u2 = rank2_pos - p * (p + 1);
    Ok(u2 as f64 / (2 * p * n) as f64)
}

/// Equal error rate. Thresholds sit below, between and above the distinct
/// scores; a trial is accepted when its score exceeds the threshold. The
/// crossing of the false-negative and false-positive rates is interpolated
/// linearly between adjacent thresholds.
pub fn eer(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (p, n) = class_counts(scores, labels)?;
    let idx = sorted_order(scores);
    // (fnr, fpr) at the threshold below everything.
    let (mut fn_count, mut tn_count) = (0usize, 0usize);
    let mut prev = (0.0, 1.0);
    let mut i = 0;
    loop {
        let (fnr, fpr) = (fn_count as f64 / p as f64, 1.0 - tn_count as f64 / n as f64);
        let d = fnr - fpr;
        if d == 0.0 {
            return Ok(fnr);
        }
        if d > 0.0 {
            let d_prev = prev.0 - prev.1;
            let a = -d_prev / (d - d_prev);
            return Ok(prev.0 + a * (fnr - prev.0));
        }
        prev = (fnr, fpr);
        // move the threshold past the next group of tied scores
        let mut j = i;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            if labels[idx[j]] {
                fn_count += 1;
            } else {
                tn_count += 1;
            }
            j += 1;
        }
        i = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pos: &[f64], neg: &[f64]) -> (Vec<f64>, Vec<bool>) {
        let s = pos.iter().chain(neg).copied().collect();
        let l = pos.iter().map(|_| true).chain(neg.iter().map(|_| false)).collect();
        (s, l)
    }

    #[test]
    fn auc_examples() {
        let (s, l) = set(&[0.9, 0.8], &[0.1, 0.2]);
        assert_eq!(auc(&s, &l).unwrap(), 1.0);
        let (s, l) = set(&[0.5, 0.5], &[0.5]);
        assert_eq!(auc(&s, &l).unwrap(), 0.5);
        let (s, l) = set(&[0.7, 0.4], &[0.6, 0.3]);
        assert_eq!(auc(&s, &l).unwrap(), 0.75);
        assert!(matches!(auc(&[0.1, 0.2], &[true, true]), Err(Error::SingleClass(_))));
    }

    #[test]
    fn eer_examples() {
        let (s, l) = set(&[0.9, 0.8], &[0.1, 0.2]);
        assert_eq!(eer(&s, &l).unwrap(), 0.0);
        let (s, l) = set(&[0.9, 0.8, 0.2], &[0.7, 0.1, 0.05]);
        assert!((eer(&s, &l).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let (s, l) = set(&[0.5], &[0.5]);
        assert_eq!(eer(&s, &l).unwrap(), 0.5);
        assert!(eer(&[1.0], &[false]).is_err());
    }

    #[test]
    fn eer_reversed_scores_is_one() {
        let (s, l) = set(&[0.1, 0.2], &[0.8, 0.9]);
        assert_eq!(eer(&s, &l).unwrap(), 1.0);
    }
}
