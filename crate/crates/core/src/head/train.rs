use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::HeadConfig;
use super::mlp::{concat, sigmoid, Layer, MlpHead, Standardizer};
use crate::corpus::{Corpus, SideKey};
use crate::error::{Error, Result};
use crate::scoring::{FeatureSource, SparseVec};
use crate::trials::Trial;

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub loss_curve: Vec<f64>,
    /// True when training stopped on the tolerance rule before `max_iterations`.
    pub converged: bool,
}

impl TrainReport {
    pub fn epochs(&self) -> usize {
        self.loss_curve.len()
    }
}

/// log(1 + e^z) − y·z, the log loss of a sigmoid output with logit `z`.
fn log_loss(z: f64, y: f64) -> f64 {
    let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
    softplus - y * z
}

/// Regularized mean log loss over a batch and its gradient with respect to
/// every parameter (same shapes as the head's layers). Inputs must already be
/// standardized if the head standardizes.
pub fn loss_and_gradient(head: &MlpHead, inputs: &[SparseVec], labels: &[bool], l2_penalty: f64) -> (f64, Vec<Layer>) {
    let n = inputs.len() as f64;
    let mut grads: Vec<Layer> = head.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect();
    let mut loss = 0.0;
    let last = head.layers.len() - 1;
    for (x, &label) in inputs.iter().zip(labels) {
        let y = if label { 1.0 } else { 0.0 };
        let acts = head.forward_trace(x);
        let z = acts[last][0];
        loss += log_loss(z, y);
        let mut delta = vec![sigmoid(z) - y];
        for li in (0..=last).rev() {
            let layer = &head.layers[li];
            let g = &mut grads[li];
            for (gb, d) in g.bias.iter_mut().zip(&delta) {
                *gb += d;
            }
            if li == 0 {
                for &(i, xi) in x.entries() {
                    let row = &mut g.weights[i as usize * layer.n_out..(i as usize + 1) * layer.n_out];
                    for (gw, d) in row.iter_mut().zip(&delta) {
                        *gw += xi * d;
                    }
                }
            } else {
                let input = &acts[li - 1];
                let mut prev = vec![0.0; layer.n_in];
                for (i, &ai) in input.iter().enumerate() {
                    let row = i * layer.n_out..(i + 1) * layer.n_out;
                    if ai != 0.0 {
                        for (gw, d) in g.weights[row.clone()].iter_mut().zip(&delta) {
                            *gw += ai * d;
                        }
                    }
                    let back: f64 = layer.weights[row].iter().zip(&delta).map(|(w, d)| w * d).sum();
                    prev[i] = back * head.activation.derivative(ai);
                }
                delta = prev;
            }
        }
    }
    let mut sq = 0.0;
    for (g, layer) in grads.iter_mut().zip(&head.layers) {
        for (gw, w) in g.weights.iter_mut().zip(&layer.weights) {
            *gw = *gw / n + l2_penalty * w / n;
            sq += w * w;
        }
        g.bias.iter_mut().for_each(|b| *b /= n);
    }
    (loss / n + 0.5 * l2_penalty * sq / n, grads)
}

/// Largest relative disagreement between analytic gradients and central
/// finite differences (step 1e-5) over every parameter. Differences are
/// measured relative to `max(|analytic|, |numeric|, 1e-6)`.
pub fn gradient_check(head: &MlpHead, inputs: &[SparseVec], labels: &[bool], l2_penalty: f64) -> Result<f64> {
    const STEP: f64 = 1e-5;
    let inputs: Vec<SparseVec> = inputs.iter().map(|x| head.prepare(x)).collect::<Result<_>>()?;
    let (_, grads) = loss_and_gradient(head, &inputs, labels, l2_penalty);
    let mut probe = head.clone();
    let mut worst: f64 = 0.0;
    for li in 0..head.layers.len() {
        for k in 0..head.layers[li].weights.len() + head.layers[li].bias.len() {
            let nw = head.layers[li].weights.len();
            let orig = *param_mut(&mut probe, li, k);
            *param_mut(&mut probe, li, k) = orig + STEP;
            let up = loss_and_gradient(&probe, &inputs, labels, l2_penalty).0;
            *param_mut(&mut probe, li, k) = orig - STEP;
            let down = loss_and_gradient(&probe, &inputs, labels, l2_penalty).0;
            *param_mut(&mut probe, li, k) = orig;
            let numeric = (up - down) / (2.0 * STEP);
            let analytic = if k < nw { grads[li].weights[k] } else { grads[li].bias[k - nw] };
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / denom);
        }
    }
    Ok(worst)
}

fn param_mut(head: &mut MlpHead, layer: usize, k: usize) -> &mut f64 {
    let l = &mut head.layers[layer];
    let nw = l.weights.len();
    if k < nw {
        &mut l.weights[k]
    } else {
        &mut l.bias[k - nw]
    }
}

fn init_head(sizes: &[usize], cfg: &HeadConfig) -> MlpHead {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let layers = sizes
        .windows(2)
        .map(|w| {
            let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
            let mut layer = Layer::zeros(w[0], w[1]);
            for p in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *p = rng.random_range(-bound..bound);
            }
            layer
        })
        .collect();
    let mut head = MlpHead::from_layers(layers, cfg.activation).expect("sizes chain by construction");
    head.seed = cfg.seed;
    head
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(head: &MlpHead) -> Self {
        let shapes: Vec<usize> = head
            .layers
            .iter()
            .flat_map(|l| [l.weights.len(), l.bias.len()])
            .collect();
        Adam {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, head: &mut MlpHead, grads: &[Layer], cfg: &HeadConfig) {
        self.t += 1;
        let lr = cfg.learning_rate * (1.0 - cfg.beta2.powi(self.t)).sqrt() / (1.0 - cfg.beta1.powi(self.t));
        let params = head.layers.iter_mut().flat_map(|l| [&mut l.weights, &mut l.bias]);
        let gs = grads.iter().flat_map(|g| [&g.weights, &g.bias]);
        for (((p, g), m), v) in params.zip(gs).zip(&mut self.m).zip(&mut self.v) {
            for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                *p -= lr * *m / (v.sqrt() + cfg.epsilon);
            }
        }
    }
}

/// Train a head on already-built inputs. Single-threaded and deterministic
/// in `cfg.seed`; parameters are rounded to `f32` at the end.
pub fn fit_mlp(inputs: &[SparseVec], labels: &[bool], cfg: &HeadConfig) -> Result<(MlpHead, TrainReport)> {
    cfg.validate()?;
    if inputs.len() != labels.len() {
        return Err(Error::Dimension {
            expected: inputs.len(),
            actual: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::SingleClass(format!(
            "head training needs both labels; got {n_pos} positive of {}",
            labels.len()
        )));
    }
    let dim = inputs[0].dim();
    if let Some(x) = inputs.iter().find(|x| x.dim() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            actual: x.dim(),
        });
    }
    let mut sizes = vec![dim];
    sizes.extend(&cfg.hidden_sizes);
    sizes.push(1);
    let mut head = init_head(&sizes, cfg);
    let prepared: Vec<SparseVec> = if cfg.standardize {
        let s = Standardizer::fit(inputs, dim);
        let out = inputs.iter().map(|x| s.apply(x)).collect();
        head.standardizer = Some(s);
        out
    } else {
        inputs.to_vec()
    };

    let n = prepared.len();
    let batch = cfg.batch_for(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(1);
    let mut adam = Adam::new(&head);
    let mut curve = Vec::new();
    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut converged = false;
    let mut xs: Vec<SparseVec> = Vec::with_capacity(batch);
    let mut ys: Vec<bool> = Vec::with_capacity(batch);
    for epoch in 1..=cfg.max_iterations {
        if cfg.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            xs.clear();
            ys.clear();
            for &i in chunk {
                xs.push(prepared[i].clone());
                ys.push(labels[i]);
            }
            let (loss, grads) = loss_and_gradient(&head, &xs, &ys, cfg.l2_penalty);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            total += loss * chunk.len() as f64;
            adam.step(&mut head, &grads, cfg);
        }
        let loss = total / n as f64;
        if !loss.is_finite() || !head.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        curve.push(loss);
        if loss > best - cfg.tolerance {
            stale += 1;
        } else {
            stale = 0;
        }
        best = best.min(loss);
        if stale >= cfg.n_iter_no_change {
            converged = true;
            break;
        }
    }
    head.round_to_f32();
    log::debug!("head trained for {} epochs, final loss {:?}", curve.len(), curve.last());
    Ok((
        head,
        TrainReport {
            loss_curve: curve,
            converged,
        },
    ))
}

/// Feature vectors for every side referenced by `trials`, computed once each.
pub(crate) fn side_features<'a, F: FeatureSource>(
    trials: &'a [Trial],
    corpus: &Corpus,
    features: &F,
) -> Result<HashMap<&'a SideKey, SparseVec>> {
    let mut out = HashMap::new();
    for t in trials {
        for k in [&t.left, &t.right] {
            if out.contains_key(k) {
                continue;
            }
            let side = corpus.side(k).ok_or_else(|| Error::UnresolvedKey {
                trial_id: t.trial_id.clone(),
                key: k.to_string(),
            })?;
            let v = features.features(side).map_err(|e| match e {
                Error::UnresolvedKey { key, .. } => Error::UnresolvedKey {
                    trial_id: t.trial_id.clone(),
                    key,
                },
                other => other,
            })?;
            out.insert(k, v.value);
        }
    }
    Ok(out)
}

/// Train a head on concatenated `[left; right]` feature vectors of the trials.
pub fn train_head<F: FeatureSource>(
    trials: &[Trial],
    corpus: &Corpus,
    features: &F,
    cfg: &HeadConfig,
) -> Result<MlpHead> {
    train_head_with_report(trials, corpus, features, cfg).map(|(h, _)| h)
}

pub fn train_head_with_report<F: FeatureSource>(
    trials: &[Trial],
    corpus: &Corpus,
    features: &F,
    cfg: &HeadConfig,
) -> Result<(MlpHead, TrainReport)> {
    let feats = side_features(trials, corpus, features)?;
    let inputs: Vec<SparseVec> = trials.iter().map(|t| concat(&feats[&t.left], &feats[&t.right])).collect();
    let labels: Vec<bool> = trials.iter().map(|t| t.label.is_positive()).collect();
    if inputs.is_empty() {
        return Err(Error::SingleClass("no training trials".into()));
    }
    fit_mlp(&inputs, &labels, cfg)
}
