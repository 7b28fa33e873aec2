use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ExperimentSpec;
use crate::bayes::{bayes_optimize, BayesConfig};
use crate::metrics::Predictor;
use crate::nets::{train, Activation, DenseLayer, FeedforwardNet, OptimizerKind, OptimizerSpec, TrainConfig};
use crate::pbt::{best_unit, evolve, Population, PopulationUnit, SelectionMode};
use crate::rng::{derive_seed, rng_from_seed};
use crate::signals::SignalVariant;
use crate::{Error, Result};

const INIT_STREAM: u64 = 0x1417;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelKind {
    Linear,
    Relu,
    Sin,
    Cos,
    SinPlusCos,
    XPlusSin,
    XPlusCos,
    Snake,
    TSnake,
    NFittest,
    Pareto,
    Bayes,
}

impl ModelKind {
    pub const ALL: [ModelKind; 12] = [
        ModelKind::Linear,
        ModelKind::Relu,
        ModelKind::Sin,
        ModelKind::Cos,
        ModelKind::SinPlusCos,
        ModelKind::XPlusSin,
        ModelKind::XPlusCos,
        ModelKind::Snake,
        ModelKind::TSnake,
        ModelKind::NFittest,
        ModelKind::Pareto,
        ModelKind::Bayes,
    ];

    /// Periodic-activation feedforward nets plus the three population searches.
    pub const DEFAULT_ROSTER: [ModelKind; 10] = [
        ModelKind::Sin,
        ModelKind::Cos,
        ModelKind::SinPlusCos,
        ModelKind::XPlusSin,
        ModelKind::XPlusCos,
        ModelKind::Snake,
        ModelKind::TSnake,
        ModelKind::NFittest,
        ModelKind::Pareto,
        ModelKind::Bayes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Relu => "relu",
            ModelKind::Sin => "sin",
            ModelKind::Cos => "cos",
            ModelKind::SinPlusCos => "sin+cos",
            ModelKind::XPlusSin => "x+sin",
            ModelKind::XPlusCos => "x+cos",
            ModelKind::Snake => "snake",
            ModelKind::TSnake => "t-snake",
            ModelKind::NFittest => "n-fittest",
            ModelKind::Pareto => "pareto",
            ModelKind::Bayes => "bayes",
        }
    }

    /// Stable identifier used in seed derivation.
    pub fn code(self) -> u64 {
        ModelKind::ALL.iter().position(|&m| m == self).unwrap_or(0) as u64 + 1
    }

    pub fn is_population(self) -> bool {
        matches!(self, ModelKind::NFittest | ModelKind::Pareto | ModelKind::Bayes)
    }

    /// Hidden activation of a feedforward model; `None` for population models.
    pub fn activation(self) -> Option<Activation> {
        Some(match self {
            ModelKind::Linear => Activation::Linear,
            ModelKind::Relu => Activation::Relu,
            ModelKind::Sin => Activation::Sin,
            ModelKind::Cos => Activation::Cos,
            ModelKind::SinPlusCos => Activation::SinPlusCos,
            ModelKind::XPlusSin => Activation::XPlusSin,
            ModelKind::XPlusCos => Activation::XPlusCos,
            ModelKind::Snake => Activation::Snake { frequency: 1.0, trainable: false },
            ModelKind::TSnake => Activation::Snake { frequency: 1.0, trainable: true },
            _ => return None,
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::parse(format!("unknown model `{s}`")))
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelKind> for String {
    fn from(m: ModelKind) -> String {
        m.name().to_string()
    }
}

/// A trained predictor as stored in checkpoint files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    Net(FeedforwardNet),
    Unit(PopulationUnit),
}

impl TrainedModel {
    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn read_json(r: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

impl Predictor for TrainedModel {
    fn predict(&self, x: f64) -> f64 {
        match self {
            TrainedModel::Net(n) => n.predict_scalar(x),
            TrainedModel::Unit(u) => u.forward(x),
        }
    }
}

/// A trained roster model, plus the full population for population searches.
#[derive(Debug, Clone)]
pub struct Trained {
    pub model: TrainedModel,
    pub population: Option<Population>,
}

fn feedforward(kind: ModelKind, spec: &ExperimentSpec, variant: &SignalVariant, seed: u64) -> Result<FeedforwardNet> {
    let mut rng = rng_from_seed(derive_seed(seed, &[INIT_STREAM]));
    let act = kind.activation().ok_or_else(|| Error::config(format!("{kind} is not a feedforward model")))?;
    let act = match kind {
        // The frozen snake knows the true frequency.
        ModelKind::Snake => Activation::Snake { frequency: std::f64::consts::TAU / variant.master_period, trainable: false },
        _ => act,
    };
    let mut hidden = DenseLayer::glorot(1, spec.hidden_width, act, &mut rng);
    if kind == ModelKind::TSnake {
        let (lo, hi) = spec.tsnake_range;
        hidden.frequencies = Some((0..spec.hidden_width).map(|_| rng.random_range(lo..=hi)).collect());
    }
    let out = DenseLayer::glorot(spec.hidden_width, 1, Activation::Linear, &mut rng);
    FeedforwardNet::new(vec![hidden, out])
}

fn train_config(base: &TrainConfig, spec: &ExperimentSpec, variant: &SignalVariant, seed: u64) -> TrainConfig {
    let mut cfg = base.with_seed(seed);
    if spec.per_epoch_noise && variant.noise_variance > 0.0 {
        cfg.epoch_noise_variance = Some(variant.noise_variance);
    }
    cfg
}

/// Builds and trains one roster model on `data`. Population models return
/// their best unit.
pub fn train_model(
    kind: ModelKind,
    spec: &ExperimentSpec,
    variant: &SignalVariant,
    data: &[(f64, f64)],
    optimizer: OptimizerKind,
    seed: u64,
) -> Result<Trained> {
    let mut pbt = spec.pbt;
    pbt.train = train_config(&spec.pbt.train, spec, variant, 0);
    let best = |pop: Population| -> Result<Trained> {
        let unit = best_unit(&pop).ok_or_else(|| Error::config("empty population"))?;
        if !unit.loss().is_finite() {
            return Err(Error::NonFiniteLoss { epoch: 0 });
        }
        Ok(Trained { model: TrainedModel::Unit(unit.clone()), population: Some(pop) })
    };
    match kind {
        ModelKind::NFittest => best(evolve(data, &pbt, SelectionMode::NFittest, seed)?),
        ModelKind::Pareto => best(evolve(data, &pbt, SelectionMode::Pareto, seed)?),
        ModelKind::Bayes => best(bayes_optimize(data, &BayesConfig::from_pbt(&pbt), seed)?),
        _ => {
            let net = feedforward(kind, spec, variant, seed)?;
            let cfg = train_config(&spec.train, spec, variant, seed);
            let out = train(net, data, &cfg, &OptimizerSpec::new(optimizer))?;
            Ok(Trained { model: TrainedModel::Net(out.model), population: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn names_round_trip_and_codes_are_unique() {
        let mut codes: Vec<u64> = ModelKind::ALL.iter().map(|m| m.code()).collect();
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        codes.dedup();
        assert_eq!(codes.len(), 12);
        assert!("gru".parse::<ModelKind>().is_err());
    }

    #[test]
    fn checkpoints_round_trip_bit_exactly() {
        let mut rng = rng_from_seed(11);
        let snake = Activation::Snake { frequency: 1.234_567_890_123_456_7, trainable: true };
        let net = FeedforwardNet::glorot(&[1, 5, 1], snake, Activation::Linear, &mut rng).unwrap();
        let unit = PopulationUnit::root(2, 0.713_131_313_131_313_1, 7, &mut rng);
        for m in [TrainedModel::Net(net), TrainedModel::Unit(unit)] {
            let mut buf = Vec::new();
            m.write_json(&mut buf).unwrap();
            let back = TrainedModel::read_json(&buf[..]).unwrap();
            assert_eq!(back, m);
            for i in 0..20 {
                let x = -3.0 + 0.37 * i as f64;
                assert_eq!(back.predict(x).to_bits(), m.predict(x).to_bits());
            }
        }
    }
}
