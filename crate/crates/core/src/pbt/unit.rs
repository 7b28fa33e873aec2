use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::metrics::Predictor;
use crate::nets::{Activation, DenseLayer, FeedforwardNet, Regressor, Tape};
use crate::rng::Rng;

/// `x - p floor(x / p)`, always in `[0, p)`.
pub fn floor_mod(x: f64, p: f64) -> f64 {
    let r = x - p * (x / p).floor();
    if r >= p || r < 0.0 {
        0.0
    } else {
        r
    }
}

/// Serializes non-finite losses as strings so checkpoints stay valid JSON.
mod loss_text {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_finite() => s.serialize_some(&Repr::Number(*x)),
            Some(_) => s.serialize_some(&Repr::Text("inf".into())),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(match Option::<Repr>::deserialize(d)? {
            None => None,
            Some(Repr::Number(x)) => Some(x),
            Some(Repr::Text(t)) if t == "inf" => Some(f64::INFINITY),
            Some(Repr::Text(t)) => return Err(serde::de::Error::custom(format!("bad loss `{t}`"))),
        })
    }
}

/// Gain on the Glorot hidden weights of the periodicity net, per unit period.
const HIDDEN_GAIN: f64 = 5.0;

/// An individual: trend, periodicity and composer sub-networks sharing a
/// genetic period guess `period`.
///
/// The input `x` feeds the trend net directly and the periodicity net as
/// `floor_mod(x, period)`; the composer maps `(trend, periodicity)` to the
/// prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationUnit {
    pub id: usize,
    pub period: f64,
    pub trend: FeedforwardNet,
    pub periodicity: FeedforwardNet,
    pub composer: FeedforwardNet,
    /// Best validation loss of the unit's training; `+inf` marks a failed run.
    #[serde(with = "loss_text")]
    pub validation_loss: Option<f64>,
    pub root_ancestor: usize,
    pub generation_born: usize,
    pub trained: bool,
}

impl PopulationUnit {
    /// A Glorot-initialized root with a `hidden_width`-wide ReLU periodicity net.
    ///
    /// The periodicity net only ever sees inputs in `[0, period)`. Its hidden
    /// weights are scaled up by `HIDDEN_GAIN / period` so sharp edges are
    /// reachable, and its biases put each ReLU kink at a uniform point of the
    /// interval.
    pub fn root(id: usize, period: f64, hidden_width: usize, rng: &mut Rng) -> Self {
        let trend = FeedforwardNet { layers: vec![DenseLayer::glorot(1, 1, Activation::Linear, rng)] };
        let mut hidden = DenseLayer::glorot(1, hidden_width, Activation::Relu, rng);
        hidden.weights.iter_mut().for_each(|w| *w *= HIDDEN_GAIN / period);
        for (b, w) in hidden.biases.iter_mut().zip(&hidden.weights) {
            *b = -w * rng.random_range(0.0..period);
        }
        let periodicity =
            FeedforwardNet { layers: vec![hidden, DenseLayer::glorot(hidden_width, 1, Activation::Linear, rng)] };
        let composer = FeedforwardNet { layers: vec![DenseLayer::glorot(2, 1, Activation::Linear, rng)] };
        PopulationUnit {
            id,
            period,
            trend,
            periodicity,
            composer,
            validation_loss: None,
            root_ancestor: id,
            generation_born: 0,
            trained: false,
        }
    }

    /// Loss used for ranking; untrained units rank last.
    pub fn loss(&self) -> f64 {
        self.validation_loss.unwrap_or(f64::INFINITY)
    }

    pub fn forward(&self, x: f64) -> f64 {
        self.predict_with(x, &mut UnitScratch::default())
    }

    /// A fresh untrained child carrying this unit's parameters.
    pub fn clone_as_child(&self, id: usize, period: f64, generation: usize, root_ancestor: usize) -> Self {
        PopulationUnit {
            id,
            period,
            trend: self.trend.clone(),
            periodicity: self.periodicity.clone(),
            composer: self.composer.clone(),
            validation_loss: None,
            root_ancestor,
            generation_born: generation,
            trained: false,
        }
    }

    fn slot_split(&self) -> (usize, usize) {
        let a = self.trend.slot_count();
        (a, a + self.periodicity.slot_count())
    }
}

/// Forward output of a population unit.
pub fn unit_forward(u: &PopulationUnit, x: f64) -> f64 {
    u.forward(x)
}

#[derive(Debug, Default)]
pub struct UnitScratch {
    trend: Tape,
    periodicity: Tape,
    composer: Tape,
}

impl Regressor for PopulationUnit {
    type Scratch = UnitScratch;

    fn predict_with(&self, x: f64, s: &mut UnitScratch) -> f64 {
        let t = self.trend.predict_with(x, &mut s.trend);
        let q = self.periodicity.predict_with(floor_mod(x, self.period), &mut s.periodicity);
        match self.composer.forward_into(&[t, q], &mut s.composer) {
            Ok(()) => s.composer.output()[0],
            Err(_) => f64::NAN,
        }
    }

    fn backprop(&self, x: f64, y: f64, scale: f64, s: &mut UnitScratch, grads: &mut [Vec<f64>]) -> f64 {
        let y_hat = self.predict_with(x, s);
        let (a, b) = self.slot_split();
        let (trend_g, rest) = grads.split_at_mut(a);
        let (per_g, comp_g) = rest.split_at_mut(b - a);
        let upstream = self.composer.backward_accumulate(&mut s.composer, &[scale * 2.0 * (y_hat - y)], comp_g);
        self.trend.backward_accumulate(&mut s.trend, &upstream[..1], trend_g);
        self.periodicity.backward_accumulate(&mut s.periodicity, &upstream[1..2], per_g);
        y_hat
    }

    fn zero_grads(&self) -> Vec<Vec<f64>> {
        let mut g = self.trend.zero_grads();
        g.extend(self.periodicity.zero_grads());
        g.extend(self.composer.zero_grads());
        g
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut p = self.trend.param_slices_mut();
        p.extend(self.periodicity.param_slices_mut());
        p.extend(self.composer.param_slices_mut());
        p
    }
}

impl Predictor for PopulationUnit {
    fn predict(&self, x: f64) -> f64 {
        self.forward(x)
    }
}
