use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    #[inline]
    pub(crate) fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    pub(crate) fn derivative(self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

/// Training configuration for the verification head.
///
/// Defaults: one hidden layer of 100 rectifier units, Adam with learning
/// rate 1e-3 and betas 0.9/0.999, L2 penalty 1e-4, minibatches of
/// `min(200, n)`, at most 800 epochs, and a stop once the epoch loss has
/// failed to improve by `tolerance` for `n_iter_no_change` epochs in a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeadConfig {
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub l2_penalty: f64,
    pub max_iterations: usize,
    /// `None` means `min(200, n)`.
    pub batch_size: Option<usize>,
    pub tolerance: f64,
    pub n_iter_no_change: usize,
    pub seed: u64,
    pub shuffle: bool,
    /// Standardize each input column with training mean and deviation.
    pub standardize: bool,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig {
            hidden_sizes: vec![100],
            activation: Activation::Relu,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2_penalty: 1e-4,
            max_iterations: 800,
            batch_size: None,
            tolerance: 1e-4,
            n_iter_no_change: 10,
            seed: 1,
            shuffle: true,
            standardize: false,
        }
    }
}

impl HeadConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: HeadConfig = toml::from_str(text).map_err(|e| Error::Config(format!("head config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("head config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("head config: {m}")));
        if self.hidden_sizes.contains(&0) {
            return bad("hidden sizes must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if self.batch_size == Some(0) {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("betas must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) || self.l2_penalty < 0.0 || self.tolerance < 0.0 {
            return bad("epsilon must be positive; l2_penalty and tolerance non-negative");
        }
        Ok(())
    }

    pub fn batch_for(&self, n: usize) -> usize {
        self.batch_size.unwrap_or(200).min(n).max(1)
    }
}
