use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::net::{FeedforwardNet, Tape};
use super::optim::{Optimizer, OptimizerSpec};
use crate::rng::{derive_seed, rng_from_seed};
use crate::signals::SampleSet;
use crate::{Error, Result};

/// A scalar model trainable under squared error.
pub trait Regressor: Clone {
    type Scratch: Default;

    fn predict_with(&self, x: f64, scratch: &mut Self::Scratch) -> f64;

    /// Adds `scale * d(ŷ - y)² / dθ` to `grads` and returns ŷ.
    fn backprop(&self, x: f64, y: f64, scale: f64, scratch: &mut Self::Scratch, grads: &mut [Vec<f64>]) -> f64;

    fn zero_grads(&self) -> Vec<Vec<f64>>;

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]>;
}

impl Regressor for FeedforwardNet {
    type Scratch = Tape;

    fn predict_with(&self, x: f64, tape: &mut Tape) -> f64 {
        match self.forward_into(&[x], tape) {
            Ok(()) => tape.output()[0],
            Err(_) => f64::NAN,
        }
    }

    fn backprop(&self, x: f64, y: f64, scale: f64, tape: &mut Tape, grads: &mut [Vec<f64>]) -> f64 {
        let y_hat = self.predict_with(x, tape);
        self.backward_accumulate(tape, &[scale * 2.0 * (y_hat - y)], grads);
        y_hat
    }

    fn zero_grads(&self) -> Vec<Vec<f64>> {
        FeedforwardNet::zero_grads(self)
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        FeedforwardNet::param_slices_mut(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub validation_fraction: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// When set, training targets get fresh N(0, σ²) noise every epoch.
    pub epoch_noise_variance: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            validation_fraction: 0.2,
            patience: 10,
            max_epochs: 500,
            batch_size: 32,
            seed: 0,
            epoch_noise_variance: None,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::config("validation fraction must lie in (0, 1)"));
        }
        if self.patience == 0 || self.max_epochs == 0 || self.batch_size == 0 {
            return Err(Error::config("patience, max_epochs and batch_size must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    /// Parameters from the best-validation epoch.
    pub model: M,
    pub validation_loss: f64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    /// Validation loss per epoch; entry 0 is the untrained model.
    pub history: Vec<f64>,
}

fn mse<M: Regressor>(model: &M, data: &[(f64, f64)], scratch: &mut M::Scratch) -> f64 {
    let sum: f64 = data.iter().map(|&(x, y)| (model.predict_with(x, scratch) - y).powi(2)).sum();
    sum / data.len() as f64
}

/// Mini-batch training under mean squared error with early stopping.
///
/// The data is split at random into training and validation parts; training
/// stops once the validation loss has not strictly improved for `patience`
/// epochs, or after `max_epochs`. The returned model is the best-validation
/// snapshot.
pub fn train<M: Regressor>(
    model: M,
    data: &[(f64, f64)],
    cfg: &TrainConfig,
    opt: &OptimizerSpec,
) -> Result<TrainOutcome<M>> {
    cfg.validate()?;
    if data.len() < 2 {
        return Err(Error::config("training needs at least two points"));
    }
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[0x7121]));
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((data.len() as f64 * cfg.validation_fraction).round() as usize).clamp(1, data.len() - 1);
    let validation: Vec<(f64, f64)> = order[..n_val].iter().map(|&i| data[i]).collect();
    let train_set: Vec<(f64, f64)> = order[n_val..].iter().map(|&i| data[i]).collect();

    let noise = match cfg.epoch_noise_variance {
        Some(v) if v > 0.0 => Some(Normal::new(0.0, v.sqrt()).map_err(|e| Error::config(e.to_string()))?),
        _ => None,
    };

    let mut optimizer = Optimizer::new(*opt)?;
    let mut model = model;
    let mut scratch = M::Scratch::default();
    let mut grads = model.zero_grads();
    let mut idx: Vec<usize> = (0..train_set.len()).collect();

    let initial = mse(&model, &validation, &mut scratch);
    if !initial.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: 0 });
    }
    let mut history = vec![initial];
    let mut best = (initial, 0usize, model.clone());
    let mut epoch = 0;
    while epoch < cfg.max_epochs && epoch - best.1 < cfg.patience {
        epoch += 1;
        idx.shuffle(&mut rng);
        for batch in idx.chunks(cfg.batch_size) {
            grads.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (x, mut y) = train_set[i];
                if let Some(n) = &noise {
                    y += n.sample(&mut rng);
                }
                model.backprop(x, y, scale, &mut scratch, &mut grads);
            }
            optimizer.step(&mut model.param_slices_mut(), &grads);
        }
        let loss = mse(&model, &validation, &mut scratch);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        history.push(loss);
        if loss < best.0 {
            best = (loss, epoch, model.clone());
        }
    }
    let (validation_loss, best_epoch, model) = best;
    Ok(TrainOutcome { model, validation_loss, epochs_run: epoch, best_epoch, history })
}

/// Trains a network on a sample set.
pub fn train_net(
    net: FeedforwardNet,
    data: &SampleSet,
    cfg: &TrainConfig,
    opt: &OptimizerSpec,
) -> Result<TrainOutcome<FeedforwardNet>> {
    train(net, &data.points, cfg, opt)
}
