use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Largest sample (after dropping zero differences) that uses the exact
/// signed-rank null distribution.
pub const WILCOXON_EXACT_MAX: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    PairedT,
    Wilcoxon,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::PairedT => "paired-t",
            TestKind::Wilcoxon => "wilcoxon",
        }
    }

    pub fn run(self, a: &[f64], b: &[f64]) -> Result<SignificanceResult> {
        match self {
            TestKind::PairedT => paired_ttest(a, b),
            TestKind::Wilcoxon => wilcoxon(a, b),
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ttest" | "paired-t" | "t" => Ok(TestKind::PairedT),
            "wilcoxon" => Ok(TestKind::Wilcoxon),
            other => Err(Error::Config(format!("unknown test '{other}' (expected ttest or wilcoxon)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub test: TestKind,
    pub statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    /// Pairs entering the test (for the signed-rank test, after dropping zeros).
    pub n_pairs: usize,
    /// Set when a degenerate convention decided the p-value.
    pub flagged: bool,
}

fn differences(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

/// Paired t-test on `a − b` with `n − 1` degrees of freedom. Zero-variance
/// differences give p = 1 when their mean is 0 and p = 0 otherwise, flagged.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<SignificanceResult> {
    let d = differences(a, b)?;
    let n = d.len();
    if n < 2 {
        return Err(Error::Config(format!("paired t-test needs at least 2 pairs, got {n}")));
    }
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let result = |statistic, p_value, flagged| SignificanceResult {
        test: TestKind::PairedT,
        statistic,
        p_value,
        n_pairs: n,
        flagged,
    };
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            result(0.0, 1.0, true)
        } else {
            result(f64::INFINITY.copysign(mean), 0.0, true)
        });
    }
    let t = mean / (var.sqrt() / nf.sqrt());
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0).expect("positive degrees of freedom");
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(result(t, p, false))
}

/// Midranks (1-based) of `values`.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided exact p-value of `P(min(T, total − T) ≤ w)` where `T` is the
/// positive-rank sum under random signs. Works on doubled ranks so that
/// midranks stay integral.
fn exact_signed_rank_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let all = 2f64.powi(ranks.len() as i32);
    let w2 = (2.0 * w).round() as usize;
    let lower: f64 = counts[..=w2.min(total)].iter().sum();
    (2.0 * lower / all).min(1.0)
}

/// Wilcoxon signed-rank test on `a − b`. Zero differences are dropped and
/// tied magnitudes share midranks. The statistic is `min(W+, W−)`. Up to
/// [`WILCOXON_EXACT_MAX`] pairs use the exact null distribution; larger
/// samples use the normal approximation with tie and continuity corrections.
/// All-zero differences give p = 1, flagged.
pub fn wilcoxon(a: &[f64], b: &[f64]) -> Result<SignificanceResult> {
    let d: Vec<f64> = differences(a, b)?.into_iter().filter(|&x| x != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(SignificanceResult {
            test: TestKind::Wilcoxon,
            statistic: 0.0,
            p_value: 1.0,
            n_pairs: 0,
            flagged: true,
        });
    }
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&d).filter(|(_, &x)| x > 0.0).map(|(r, _)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    // an empty float sum is -0.0
    let w = w_plus.min(total - w_plus) + 0.0;
    let p = if n <= WILCOXON_EXACT_MAX {
        exact_signed_rank_p(&ranks, w)
    } else {
        let nf = n as f64;
        let mut tie_term = 0.0;
        let mut sorted = abs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
        let mean = total / 2.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let z = ((w - mean + 0.5).min(0.0)) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.cdf(z)).min(1.0)
    };
    Ok(SignificanceResult {
        test: TestKind::Wilcoxon,
        statistic: w,
        p_value: p,
        n_pairs: n,
        flagged: false,
    })
}
