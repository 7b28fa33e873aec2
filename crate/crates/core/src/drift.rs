//! Snake frequency drift experiments.
//!
//! `single_neuron_drift` trains a one-neuron snake network on a snake target
//! and records where the trainable frequency starts and ends. `wide_net_drift`
//! does the same for the mean frequency of a wide two-layer snake network
//! trained on generated signals.

use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nets::{train, Activation, DenseLayer, FeedforwardNet, OptimizerKind, OptimizerSpec, TrainConfig};
use crate::rng::{derive_seed, derived_rng};
use crate::signals::SignalVariant;
use crate::{Error, Result};

const INIT_STREAM: u64 = 0xD21F;
const DATA_STREAM: u64 = 0xDA7A;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SingleNeuronDrift {
    pub runs: usize,
    pub init_range: (f64, f64),
    pub target_frequency: f64,
    /// Training inputs are drawn uniformly from `(-half_width, half_width)`.
    pub half_width: f64,
    pub samples: usize,
    /// Counts as recovered when `|a - target| < tolerance`.
    pub tolerance: f64,
    pub train: TrainConfig,
    pub optimizer: OptimizerSpec,
}

impl Default for SingleNeuronDrift {
    fn default() -> Self {
        SingleNeuronDrift {
            runs: 100,
            init_range: (0.7, 1.3),
            target_frequency: 1.0,
            half_width: 5.0 * std::f64::consts::PI,
            samples: 1000,
            tolerance: 0.05,
            train: TrainConfig::default(),
            optimizer: OptimizerSpec::new(OptimizerKind::Adam).with_learning_rate(1e-2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRun {
    pub initial: f64,
    pub last: f64,
    pub validation_loss: f64,
}

/// `1 -> 1 -> 1` network: snake hidden neuron, linear output.
pub fn single_snake_net(a: f64, rng: &mut crate::rng::Rng) -> FeedforwardNet {
    let snake = Activation::Snake { frequency: a, trainable: true };
    FeedforwardNet { layers: vec![DenseLayer::glorot(1, 1, snake, rng), DenseLayer::glorot(1, 1, Activation::Linear, rng)] }
}

fn snake_target(a: f64, x: f64) -> f64 {
    x + (a * x).sin().powi(2)
}

pub fn single_neuron_drift(cfg: &SingleNeuronDrift, seed: u64) -> Result<Vec<DriftRun>> {
    let (lo, hi) = cfg.init_range;
    if !(lo > 0.0 && lo < hi) || cfg.samples < 2 || !(cfg.half_width > 0.0) {
        return Err(Error::config("invalid drift configuration"));
    }
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = derived_rng(seed, &[INIT_STREAM, run as u64]);
            let a0 = rng.random_range(lo..=hi);
            let net = single_snake_net(a0, &mut rng);
            let h = cfg.half_width;
            let data: Vec<(f64, f64)> = (0..cfg.samples)
                .map(|_| {
                    let x = rng.random_range(-h..h);
                    (x, snake_target(cfg.target_frequency, x))
                })
                .collect();
            let tc = cfg.train.with_seed(derive_seed(seed, &[run as u64]));
            Ok(match train(net.clone(), &data, &tc, &cfg.optimizer) {
                Ok(out) => DriftRun {
                    initial: a0,
                    last: out.model.mean_snake_frequency().unwrap_or(a0),
                    validation_loss: out.validation_loss,
                },
                Err(Error::NonFiniteLoss { .. }) => DriftRun { initial: a0, last: a0, validation_loss: f64::INFINITY },
                Err(e) => return Err(e),
            })
        })
        .collect()
}

/// Fraction of runs ending within `tolerance` of `target`.
pub fn recovered_fraction(runs: &[DriftRun], target: f64, tolerance: f64) -> f64 {
    if runs.is_empty() {
        return 0.0;
    }
    runs.iter().filter(|r| (r.last - target).abs() < tolerance).count() as f64 / runs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WideNetDrift {
    pub width: usize,
    pub init_range: (f64, f64),
    /// Each variant is stretched to period `2π` and sampled uniformly on
    /// `(-half_width, half_width)`.
    pub half_width: f64,
    pub samples: usize,
    pub train: TrainConfig,
    pub optimizer: OptimizerSpec,
}

impl Default for WideNetDrift {
    fn default() -> Self {
        WideNetDrift {
            width: 128,
            init_range: (1.0, 6.0),
            half_width: 5.0 * std::f64::consts::PI,
            samples: 1000,
            train: TrainConfig::default(),
            optimizer: OptimizerSpec::new(OptimizerKind::Adam),
        }
    }
}

/// Initial and final mean hidden frequency of a wide snake net per variant.
pub fn wide_net_drift(cfg: &WideNetDrift, variants: &[SignalVariant], seed: u64) -> Result<Vec<DriftRun>> {
    let (lo, hi) = cfg.init_range;
    if !(lo > 0.0 && lo < hi) || cfg.width == 0 || cfg.samples < 2 || !(cfg.half_width > 0.0) {
        return Err(Error::config("invalid drift configuration"));
    }
    variants
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let mut data_rng = derived_rng(seed, &[DATA_STREAM, i as u64]);
            let stretch = v.master_period / std::f64::consts::TAU;
            let h = cfg.half_width;
            let data: Vec<(f64, f64)> = (0..cfg.samples)
                .map(|_| {
                    let x = data_rng.random_range(-h..h);
                    (x, v.value(x * stretch))
                })
                .collect();
            let mut rng = derived_rng(seed, &[INIT_STREAM, i as u64]);
            let snake = Activation::Snake { frequency: lo, trainable: true };
            let mut hidden = DenseLayer::glorot(1, cfg.width, snake, &mut rng);
            hidden.frequencies = Some((0..cfg.width).map(|_| rng.random_range(lo..=hi)).collect());
            let net = FeedforwardNet { layers: vec![hidden, DenseLayer::glorot(cfg.width, 1, Activation::Linear, &mut rng)] };
            let a0 = net.mean_snake_frequency().unwrap_or(lo);
            let tc = cfg.train.with_seed(derive_seed(seed, &[i as u64]));
            Ok(match train(net, &data, &tc, &cfg.optimizer) {
                Ok(out) => DriftRun {
                    initial: a0,
                    last: out.model.mean_snake_frequency().unwrap_or(a0),
                    validation_loss: out.validation_loss,
                },
                Err(Error::NonFiniteLoss { .. }) => DriftRun { initial: a0, last: a0, validation_loss: f64::INFINITY },
                Err(e) => return Err(e),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width bins over `[lo, hi]`; values outside are clamped into the end bins.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let bins = bins.max(1);
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * width }).collect();
    let mut counts = vec![0; bins];
    for &v in values.iter().filter(|v| v.is_finite()) {
        let k = ((v - lo) / width).floor();
        counts[(k.max(0.0) as usize).min(bins - 1)] += 1;
    }
    Histogram { edges, counts }
}

/// Writes `bin_lo,bin_hi,initial,final` rows for the two histograms over a
/// common range covering both.
pub fn write_drift_histograms(runs: &[DriftRun], bins: usize, w: impl Write) -> Result<()> {
    let all = runs.iter().flat_map(|r| [r.initial, r.last]).filter(|v| v.is_finite());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (lo, hi) = if lo < hi { (lo, hi) } else if lo.is_finite() { (lo - 0.5, lo + 0.5) } else { (0.0, 1.0) };
    let initial: Vec<f64> = runs.iter().map(|r| r.initial).collect();
    let last: Vec<f64> = runs.iter().map(|r| r.last).collect();
    let a = histogram(&initial, lo, hi, bins);
    let b = histogram(&last, lo, hi, bins);
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bin_lo", "bin_hi", "initial", "final"])?;
    for i in 0..a.counts.len() {
        out.write_record([
            format!("{:.6}", a.edges[i]),
            format!("{:.6}", a.edges[i + 1]),
            a.counts[i].to_string(),
            b.counts[i].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
