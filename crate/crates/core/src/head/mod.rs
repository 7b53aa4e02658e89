//! Pair verification head: a small multilayer perceptron over concatenated
//! `[left; right]` side features, trained with Adam on log loss.

mod config;
mod mlp;
mod train;

pub use config::{Activation, HeadConfig};
pub use mlp::{concat, load_head, predict, save_head, Layer, MlpHead, Standardizer};
pub use train::{
    fit_mlp, gradient_check, loss_and_gradient, train_head, train_head_with_report, TrainReport,
};

use crate::corpus::SpeakerSide;
use crate::error::Result;
use crate::normalize::Flagged;
use crate::scoring::{FeatureSource, PairScore, SparseVec, TrialScorer};

/// Scores a trial with a trained head's same-speaker probability.
#[derive(Debug, Clone)]
pub struct HeadScorer<F> {
    pub name: String,
    pub head: MlpHead,
    pub features: F,
}

impl<F: FeatureSource> HeadScorer<F> {
    pub fn new(name: impl Into<String>, head: MlpHead, features: F) -> Self {
        HeadScorer {
            name: name.into(),
            head,
            features,
        }
    }
}

impl<F: FeatureSource> TrialScorer for HeadScorer<F> {
    type Repr = Flagged<SparseVec>;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn represent(&self, side: &SpeakerSide) -> Result<Self::Repr> {
        self.features.features(side)
    }

    fn compare(&self, left: &Self::Repr, right: &Self::Repr) -> Result<PairScore> {
        Ok(PairScore {
            score: self.head.predict_pair(&left.value, &right.value)?,
            degenerate: left.flagged || right.flagged,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn auc(scores: &[f64], labels: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (s, l) in scores.iter().zip(labels) {
            for (t, m) in scores.iter().zip(labels) {
                if *l && !*m {
                    pairs += 1.0;
                    wins += if s > t { 1.0 } else if s == t { 0.5 } else { 0.0 };
                }
            }
        }
        wins / pairs
    }

    fn random_batch(n: usize, dim: usize, seed: u64) -> (Vec<SparseVec>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = (0..n)
            .map(|_| SparseVec::from_dense(&(0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>()))
            .collect();
        let ys = (0..n).map(|i| i % 2 == 0).collect();
        (xs, ys)
    }

    fn small_cfg() -> HeadConfig {
        HeadConfig {
            hidden_sizes: vec![8],
            max_iterations: 50,
            ..HeadConfig::default()
        }
    }

    #[test]
    fn separable_toy_reaches_perfect_training_auc() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        while xs.len() < 120 {
            let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let margin = v[0] - v[1] + 0.5 * v[2] - v[3];
            if margin.abs() < 0.2 {
                continue;
            }
            xs.push(SparseVec::from_dense(&v));
            ys.push(margin > 0.0);
        }
        let (head, _) = fit_mlp(&xs, &ys, &HeadConfig::default()).unwrap();
        let p = head.predict_batch(&xs).unwrap();
        assert_eq!(auc(&p, &ys), 1.0);
    }

    #[test]
    fn identical_inputs_give_chance_auc() {
        let xs = vec![SparseVec::from_dense(&[0.3, -0.2, 0.9, 0.1]); 40];
        let ys: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
        let (head, _) = fit_mlp(&xs, &ys, &small_cfg()).unwrap();
        let p = head.predict_batch(&xs).unwrap();
        assert!((auc(&p, &ys) - 0.5).abs() <= 0.05);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (xs, ys) = random_batch(60, 6, 9);
        let a = fit_mlp(&xs, &ys, &small_cfg()).unwrap().0;
        let b = fit_mlp(&xs, &ys, &small_cfg()).unwrap().0;
        assert_eq!(a, b);
        let c = fit_mlp(&xs, &ys, &HeadConfig { seed: 2, ..small_cfg() }).unwrap().0;
        assert_ne!(a, c);
    }

    #[test]
    fn single_class_is_rejected() {
        let (xs, _) = random_batch(10, 4, 1);
        assert!(matches!(fit_mlp(&xs, &[true; 10], &small_cfg()), Err(crate::Error::SingleClass(_))));
    }

    #[test]
    fn gradient_check_default_layout() {
        let (xs, ys) = random_batch(10, 12, 4);
        let (head, _) = fit_mlp(&xs, &ys, &HeadConfig { max_iterations: 5, ..HeadConfig::default() }).unwrap();
        let err = gradient_check(&head, &xs, &ys, 1e-4).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn zero_inputs_give_zero_first_layer_gradient() {
        let (xs, ys) = random_batch(10, 6, 5);
        let (head, _) = fit_mlp(&xs, &ys, &small_cfg()).unwrap();
        let zeros = vec![SparseVec::zeros(6); 4];
        let (_, grads) = loss_and_gradient(&head, &zeros, &[true, false, true, true], 0.0);
        assert!(grads[0].weights.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn linear_head_matches_logistic_regression() {
        let (xs, ys) = random_batch(7, 3, 6);
        let layer = Layer {
            n_in: 3,
            n_out: 1,
            weights: vec![0.4, -0.7, 0.2],
            bias: vec![0.1],
        };
        let head = MlpHead::from_layers(vec![layer.clone()], Activation::Relu).unwrap();
        let alpha = 0.3;
        let (_, grads) = loss_and_gradient(&head, &xs, &ys, alpha);
        let n = xs.len() as f64;
        let mut gw = [0.0; 3];
        let mut gb = 0.0;
        for (x, &y) in xs.iter().zip(&ys) {
            let x = x.to_dense();
            let z = layer.bias[0] + (0..3).map(|i| layer.weights[i] * x[i]).sum::<f64>();
            let r = 1.0 / (1.0 + (-z).exp()) - if y { 1.0 } else { 0.0 };
            for i in 0..3 {
                gw[i] += r * x[i];
            }
            gb += r;
        }
        for i in 0..3 {
            let expected = gw[i] / n + alpha * layer.weights[i] / n;
            assert!((grads[0].weights[i] - expected).abs() < 1e-12);
        }
        assert!((grads[0].bias[0] - gb / n).abs() < 1e-12);
    }

    #[test]
    fn full_batch_loss_is_non_increasing() {
        let (xs, ys) = random_batch(50, 5, 8);
        let cfg = HeadConfig {
            hidden_sizes: vec![10],
            max_iterations: 200,
            tolerance: 0.0,
            n_iter_no_change: 1000,
            ..HeadConfig::default()
        };
        let (_, report) = fit_mlp(&xs, &ys, &cfg).unwrap();
        for w in report.loss_curve.windows(2) {
            assert!(w[1] <= w[0] + 1e-4, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn standardized_head_round_trips() {
        let (xs, ys) = random_batch(30, 4, 10);
        let cfg = HeadConfig { standardize: true, ..small_cfg() };
        let (head, _) = fit_mlp(&xs, &ys, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.bin");
        save_head(&head, &p).unwrap();
        let back = load_head(&p).unwrap();
        assert_eq!(back, head);
        assert_eq!(back.predict_batch(&xs).unwrap(), head.predict_batch(&xs).unwrap());
    }
}
