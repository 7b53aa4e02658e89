use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::Metric;
use crate::error::{Error, Result};

/// Consecutive single-class resamples tolerated before giving up.
pub const MAX_CONSECUTIVE_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub metric: Metric,
    pub point_estimate: f64,
    pub resample_values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of the resample values.
    pub standard_error: f64,
    pub seed: u64,
    /// Single-class resamples that were discarded and redrawn.
    pub redraws: usize,
}

impl BootstrapResult {
    pub fn n_resamples(&self) -> usize {
        self.resample_values.len()
    }
}

/// Indices of resample `i`: `len` draws with replacement from a stream that
/// depends only on `(seed, i)`, redrawn while it lacks a class. Returns the
/// indices and the number of redraws.
pub fn resample_indices(labels: &[bool], seed: u64, i: u64) -> Result<(Vec<usize>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let n = labels.len();
    let mut redraws = 0;
    loop {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let pos = idx.iter().filter(|&&k| labels[k]).count();
        if pos > 0 && pos < n {
            return Ok((idx, redraws));
        }
        redraws += 1;
        if redraws > MAX_CONSECUTIVE_REDRAWS {
            return Err(Error::Degenerate { redraws });
        }
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Bootstrap a metric over `n` resamples of the (score, label) records.
/// Resample `i` is a pure function of `(labels, seed, i)`, so results do not
/// depend on how many threads compute them, and two score sets over the same
/// trials (same order, same labels) see identical resamples.
pub fn bootstrap(metric: Metric, scores: &[f64], labels: &[bool], n: usize, seed: u64) -> Result<BootstrapResult> {
    let point_estimate = metric.compute(scores, labels)?;
    if n == 0 {
        return Err(Error::Config("bootstrap needs at least one resample".into()));
    }
    let per: Vec<(f64, usize)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let (idx, redraws) = resample_indices(labels, seed, i)?;
            let s: Vec<f64> = idx.iter().map(|&k| scores[k]).collect();
            let l: Vec<bool> = idx.iter().map(|&k| labels[k]).collect();
            Ok((metric.compute(&s, &l)?, redraws))
        })
        .collect::<Result<_>>()?;
    let resample_values: Vec<f64> = per.iter().map(|p| p.0).collect();
    let redraws = per.iter().map(|p| p.1).sum();
    let (mean, standard_error) = mean_sd(&resample_values);
    Ok(BootstrapResult {
        metric,
        point_estimate,
        resample_values,
        mean,
        standard_error,
        seed,
        redraws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_resample_matches_direct_computation() {
        let scores = [0.9, 0.1, 0.4, 0.35, 0.8, 0.7];
        let labels = [true, false, true, false, true, false];
        let r = bootstrap(Metric::Auc, &scores, &labels, 1, 17).unwrap();
        let (idx, _) = resample_indices(&labels, 17, 0).unwrap();
        let s: Vec<f64> = idx.iter().map(|&k| scores[k]).collect();
        let l: Vec<bool> = idx.iter().map(|&k| labels[k]).collect();
        assert_eq!(r.resample_values, [Metric::Auc.compute(&s, &l).unwrap()]);
        assert_eq!(r.standard_error, 0.0);
    }

    #[test]
    fn constant_metric_has_zero_se() {
        let scores = [1.0, 1.0, 1.0, 0.0, 0.0];
        let labels = [true, true, true, false, false];
        let r = bootstrap(Metric::Auc, &scores, &labels, 200, 3).unwrap();
        assert_eq!(r.standard_error, 0.0);
        assert_eq!(r.mean, 1.0);
    }

    #[test]
    fn tiny_sets_redraw_and_count() {
        let r = bootstrap(Metric::Auc, &[0.2, 0.9], &[false, true], 100, 5).unwrap();
        assert!(r.redraws > 0);
        assert_eq!(r.n_resamples(), 100);
    }

    #[test]
    fn overwhelming_class_imbalance_is_degenerate() {
        let mut labels = vec![true; 2000];
        labels[0] = false;
        let scores: Vec<f64> = (0..2000).map(|i| i as f64).collect();
        // P(resample misses the single negative) = (1 - 1/2000)^2000 ≈ e^-1,
        // so degeneracy needs 101 misses in a row: astronomically rare.
        assert!(bootstrap(Metric::Auc, &scores, &labels, 20, 1).is_ok());
        assert!(matches!(
            resample_indices(&[true, true], 0, 0),
            Err(Error::Degenerate { .. })
        ));
    }
}
