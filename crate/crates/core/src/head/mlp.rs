use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Activation;
use crate::error::{Error, Result};
use crate::scoring::SparseVec;

/// A dense layer. Weights are stored input-major: `weights[i * n_out + j]`
/// connects input `i` to unit `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Layer {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            bias: vec![0.0; n_out],
        }
    }

    fn forward_sparse(&self, x: &SparseVec, out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for &(i, xi) in x.entries() {
            let row = &self.weights[i as usize * self.n_out..(i as usize + 1) * self.n_out];
            for (o, w) in out.iter_mut().zip(row) {
                *o += xi * w;
            }
        }
    }

    fn forward_dense(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.weights[i * self.n_out..(i + 1) * self.n_out];
            for (o, w) in out.iter_mut().zip(row) {
                *o += xi * w;
            }
        }
    }
}

/// Per-column affine standardization applied before the first layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(inputs: &[SparseVec], dim: usize) -> Self {
        let n = inputs.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        let mut sq = vec![0.0; dim];
        for x in inputs {
            for &(i, v) in x.entries() {
                mean[i as usize] += v;
                sq[i as usize] += v * v;
            }
        }
        let scale = mean
            .iter_mut()
            .zip(&sq)
            .map(|(m, s)| {
                *m /= n;
                let var = (s / n - *m * *m).max(0.0);
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &SparseVec) -> SparseVec {
        let mut dense = x.to_dense();
        for ((v, m), s) in dense.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - m) / s;
        }
        SparseVec::from_dense(&dense)
    }
}

/// Multilayer perceptron with a single sigmoid output: the probability that
/// the two halves of its input come from the same speaker.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpHead {
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub seed: u64,
    pub standardizer: Option<Standardizer>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl MlpHead {
    /// Build a head from explicit layers; consecutive sizes must chain and the
    /// last layer must have one output.
    pub fn from_layers(layers: Vec<Layer>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a head needs at least one layer".into()));
        }
        for w in layers.windows(2) {
            if w[0].n_out != w[1].n_in {
                return Err(Error::Dimension {
                    expected: w[0].n_out,
                    actual: w[1].n_in,
                });
            }
        }
        for l in &layers {
            if l.weights.len() != l.n_in * l.n_out || l.bias.len() != l.n_out {
                return Err(Error::Config("layer parameter count does not match its shape".into()));
            }
        }
        if layers.last().map(|l| l.n_out) != Some(1) {
            return Err(Error::Config("the output layer must have exactly one unit".into()));
        }
        Ok(MlpHead {
            layers,
            activation,
            seed: 0,
            standardizer: None,
        })
    }

    /// All-zero head with the given layer sizes (input first, output 1 last).
    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self> {
        let layers = sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Self::from_layers(layers, activation)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in
    }

    /// Layer sizes, input first.
    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.n_out))
            .collect()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|x| x.is_finite()))
    }

    /// Forward pass returning every hidden layer's activations; the final
    /// entry holds the output logit.
    pub(crate) fn forward_trace(&self, x: &SparseVec) -> Vec<Vec<f64>> {
        let last = self.layers.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (li, layer) in self.layers.iter().enumerate() {
            let mut out = vec![0.0; layer.n_out];
            if li == 0 {
                layer.forward_sparse(x, &mut out);
            } else {
                layer.forward_dense(&acts[li - 1], &mut out);
            }
            if li != last {
                out.iter_mut().for_each(|z| *z = self.activation.apply(*z));
            }
            acts.push(out);
        }
        acts
    }

    pub(crate) fn prepare(&self, x: &SparseVec) -> Result<SparseVec> {
        if x.dim() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                actual: x.dim(),
            });
        }
        Ok(match &self.standardizer {
            Some(s) => s.apply(x),
            None => x.clone(),
        })
    }

    /// Probability of "same speaker" for an already-concatenated input.
    pub fn predict_input(&self, x: &SparseVec) -> Result<f64> {
        let x = self.prepare(x)?;
        Ok(sigmoid(self.forward_trace(&x).last().expect("non-empty")[0]))
    }

    pub fn predict_pair(&self, left: &SparseVec, right: &SparseVec) -> Result<f64> {
        let half = self.input_dim() / 2;
        if left.dim() != half || right.dim() != half || 2 * half != self.input_dim() {
            return Err(Error::Dimension {
                expected: half,
                actual: if left.dim() != half { left.dim() } else { right.dim() },
            });
        }
        self.predict_input(&concat(left, right))
    }

    pub fn predict_batch(&self, inputs: &[SparseVec]) -> Result<Vec<f64>> {
        inputs.par_iter().map(|x| self.predict_input(x)).collect()
    }

    /// Round every parameter to the nearest `f32`, so that a checkpoint
    /// round trip is exact.
    pub fn round_to_f32(&mut self) {
        let r = |x: &mut f64| *x = *x as f32 as f64;
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(r);
        }
        if let Some(s) = &mut self.standardizer {
            s.mean.iter_mut().chain(s.scale.iter_mut()).for_each(r);
        }
    }
}

/// Probability of "same speaker" for the pair (left, right). The order matters.
pub fn predict(head: &MlpHead, left: &[f64], right: &[f64]) -> Result<f64> {
    head.predict_pair(&SparseVec::from_dense(left), &SparseVec::from_dense(right))
}

/// `[left; right]` as one sparse vector.
pub fn concat(left: &SparseVec, right: &SparseVec) -> SparseVec {
    let off = left.dim() as u32;
    let entries = left
        .entries()
        .iter()
        .copied()
        .chain(right.entries().iter().map(|&(i, x)| (i + off, x)))
        .collect();
    SparseVec::new(left.dim() + right.dim(), entries).expect("disjoint in-range indices")
}

const MAGIC: &[u8; 8] = b"SPKHEAD\0";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointHeader {
    sizes: Vec<usize>,
    activation: Activation,
    seed: u64,
    standardized: bool,
    n_floats: usize,
}

/// Checkpoint layout: 8-byte magic, u32 version, u32 header length, a JSON
/// header, then every parameter as little-endian f32 (per layer: weights then
/// biases; then standardizer means and scales if present).
pub fn save_head(head: &MlpHead, path: &Path) -> Result<()> {
    let mut floats: Vec<f32> = Vec::with_capacity(head.n_params());
    for l in &head.layers {
        floats.extend(l.weights.iter().chain(&l.bias).map(|&x| x as f32));
    }
    if let Some(s) = &head.standardizer {
        floats.extend(s.mean.iter().chain(&s.scale).map(|&x| x as f32));
    }
    let header = CheckpointHeader {
        sizes: head.sizes(),
        activation: head.activation,
        seed: head.seed,
        standardized: head.standardizer.is_some(),
        n_floats: floats.len(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::format(e.to_string()))?;
    let mut bytes = Vec::with_capacity(16 + json.len() + 4 * floats.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(json.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&json);
    for f in floats {
        bytes.extend_from_slice(&f.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_head(path: &Path) -> Result<MlpHead> {
    let fail = |m: String| Error::format(m).at_path(path);
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(fail("not a head checkpoint (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(fail(format!("unsupported checkpoint version {version}")));
    }
    let hlen = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    let body = bytes.get(16..16 + hlen).ok_or_else(|| fail("truncated header".into()))?;
    let header: CheckpointHeader =
        serde_json::from_slice(body).map_err(|e| fail(format!("invalid header: {e}")))?;
    let payload = &bytes[16 + hlen..];
    if payload.len() != 4 * header.n_floats {
        return Err(fail(format!(
            "truncated payload: expected {} floats, found {} bytes",
            header.n_floats,
            payload.len()
        )));
    }
    let mut floats = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
    let mut take = |n: usize| -> Result<Vec<f64>> {
        let v: Vec<f64> = floats.by_ref().take(n).collect();
        if v.len() == n {
            Ok(v)
        } else {
            Err(fail("payload shorter than the declared layer sizes".into()))
        }
    };
    if header.sizes.len() < 2 {
        return Err(fail("header lists fewer than two layer sizes".into()));
    }
    let mut layers = Vec::new();
    for w in header.sizes.windows(2) {
        layers.push(Layer {
            n_in: w[0],
            n_out: w[1],
            weights: take(w[0] * w[1])?,
            bias: take(w[1])?,
        });
    }
    let standardizer = if header.standardized {
        let d = header.sizes[0];
        Some(Standardizer {
            mean: take(d)?,
            scale: take(d)?,
        })
    } else {
        None
    };
    if floats.next().is_some() {
        return Err(fail("payload longer than the declared layer sizes".into()));
    }
    let mut head = MlpHead::from_layers(layers, header.activation).map_err(|e| fail(e.to_string()))?;
    head.seed = header.seed;
    head.standardizer = standardizer;
    Ok(head)
}
