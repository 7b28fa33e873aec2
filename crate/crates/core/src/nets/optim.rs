use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    RmsProp,
    Adam,
    AdaMax,
    AdaDelta,
    Nadam,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 6] = [
        OptimizerKind::Sgd,
        OptimizerKind::RmsProp,
        OptimizerKind::Adam,
        OptimizerKind::AdaMax,
        OptimizerKind::AdaDelta,
        OptimizerKind::Nadam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::RmsProp => "rmsprop",
            OptimizerKind::Adam => "adam",
            OptimizerKind::AdaMax => "adamax",
            OptimizerKind::AdaDelta => "adadelta",
            OptimizerKind::Nadam => "nadam",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::parse(format!("unknown optimizer `{s}`")))
    }
}

/// Optimizer hyperparameters. `beta1`/`beta2` are the moment decays of the
/// Adam family; `rho` is the accumulator decay of RMSprop and AdaDelta.
/// Fields missing from a serialized spec take the defaults of its `kind`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "PartialSpec")]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub epsilon: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialSpec {
    kind: OptimizerKind,
    learning_rate: Option<f64>,
    beta1: Option<f64>,
    beta2: Option<f64>,
    rho: Option<f64>,
    epsilon: Option<f64>,
}

impl From<PartialSpec> for OptimizerSpec {
    fn from(p: PartialSpec) -> Self {
        let d = OptimizerSpec::new(p.kind);
        OptimizerSpec {
            kind: p.kind,
            learning_rate: p.learning_rate.unwrap_or(d.learning_rate),
            beta1: p.beta1.unwrap_or(d.beta1),
            beta2: p.beta2.unwrap_or(d.beta2),
            rho: p.rho.unwrap_or(d.rho),
            epsilon: p.epsilon.unwrap_or(d.epsilon),
        }
    }
}

impl OptimizerSpec {
    /// Canonical defaults: lr 1e-2 for SGD, 1.0 for AdaDelta, 1e-3 otherwise.
    pub fn new(kind: OptimizerKind) -> Self {
        let (learning_rate, rho, epsilon) = match kind {
            OptimizerKind::Sgd => (1e-2, 0.9, 1e-8),
            OptimizerKind::RmsProp => (1e-3, 0.9, 1e-7),
            OptimizerKind::AdaDelta => (1.0, 0.95, 1e-6),
            _ => (1e-3, 0.9, 1e-8),
        };
        OptimizerSpec { kind, learning_rate, beta1: 0.9, beta2: 0.999, rho, epsilon }
    }

    pub fn with_learning_rate(mut self, lr: f64) -> Self {
        self.learning_rate = lr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning rate must be positive"));
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2), ("rho", self.rho)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be positive"));
        }
        Ok(())
    }
}

/// Moment/accumulator state, one buffer pair per parameter slice.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptimizerState {
    pub step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub spec: OptimizerSpec,
    pub state: OptimizerState,
}

impl Optimizer {
    pub fn new(spec: OptimizerSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Optimizer { spec, state: OptimizerState::default() })
    }

    /// Applies one update to `params` given matching `grads`.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[Vec<f64>]) {
        let st = &mut self.state;
        if st.first.len() != params.len() {
            st.first = params.iter().map(|p| vec![0.0; p.len()]).collect();
            st.second = params.iter().map(|p| vec![0.0; p.len()]).collect();
        }
        st.step += 1;
        let t = st.step as i32;
        let OptimizerSpec { kind, learning_rate: lr, beta1: b1, beta2: b2, rho, epsilon: eps } = self.spec;
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut st.first[k];
            let v = &mut st.second[k];
            for i in 0..p.len() {
                let gi = g[i];
                match kind {
                    OptimizerKind::Sgd => p[i] -= lr * gi,
                    OptimizerKind::RmsProp => {
                        v[i] = rho * v[i] + (1.0 - rho) * gi * gi;
                        p[i] -= lr * gi / (v[i].sqrt() + eps);
                    }
                    OptimizerKind::Adam => {
                        m[i] = b1 * m[i] + (1.0 - b1) * gi;
                        v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                        let mh = m[i] / (1.0 - b1.powi(t));
                        let vh = v[i] / (1.0 - b2.powi(t));
                        p[i] -= lr * mh / (vh.sqrt() + eps);
                    }
                    OptimizerKind::AdaMax => {
                        m[i] = b1 * m[i] + (1.0 - b1) * gi;
                        v[i] = (b2 * v[i]).max(gi.abs());
                        p[i] -= lr / (1.0 - b1.powi(t)) * m[i] / (v[i] + eps);
                    }
                    OptimizerKind::AdaDelta => {
                        // m holds the running average of squared updates.
                        v[i] = rho * v[i] + (1.0 - rho) * gi * gi;
                        let delta = -((m[i] + eps).sqrt() / (v[i] + eps).sqrt()) * gi;
                        m[i] = rho * m[i] + (1.0 - rho) * delta * delta;
                        p[i] += lr * delta;
                    }
                    OptimizerKind::Nadam => {
                        m[i] = b1 * m[i] + (1.0 - b1) * gi;
                        v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                        let mh = b1 * m[i] / (1.0 - b1.powi(t + 1)) + (1.0 - b1) * gi / (1.0 - b1.powi(t));
                        let vh = v[i] / (1.0 - b2.powi(t));
                        p[i] -= lr * mh / (vh.sqrt() + eps);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_step(kind: OptimizerKind, param: f64, grad: f64) -> f64 {
        let mut opt = Optimizer::new(OptimizerSpec::new(kind)).unwrap();
        let mut p = [param];
        opt.step(&mut [&mut p[..]], &[vec![grad]]);
        p[0]
    }

    #[test]
    fn sgd_step() {
        let mut opt = Optimizer::new(OptimizerSpec::new(OptimizerKind::Sgd).with_learning_rate(0.1)).unwrap();
        let mut p = [1.0];
        opt.step(&mut [&mut p[..]], &[vec![0.5]]);
        assert!((p[0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_lr_times_sign() {
        // m̂ = g, v̂ = g² at t = 1, so the update is lr * g / (|g| + eps).
        for g in [0.5f64, -3.0, 1e-3] {
            let lr = 1e-3;
            let expected = -lr * g / (g.abs() + 1e-8);
            let moved = one_step(OptimizerKind::Adam, 2.0, g) - 2.0;
            assert!((moved - expected).abs() < 1e-15);
            assert!((moved + lr * g.signum()).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        for kind in OptimizerKind::ALL {
            let mut opt = Optimizer::new(OptimizerSpec::new(kind)).unwrap();
            let mut p = [0.3, -1.2];
            for _ in 0..50 {
                opt.step(&mut [&mut p[..]], &[vec![0.0, 0.0]]);
            }
            assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] + 1.2).abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn every_optimizer_descends_a_quadratic() {
        for kind in OptimizerKind::ALL {
            let mut opt = Optimizer::new(OptimizerSpec::new(kind)).unwrap();
            let mut p = [1.0];
            for _ in 0..200 {
                let g = 2.0 * p[0];
                opt.step(&mut [&mut p[..]], &[vec![g]]);
            }
            assert!(p[0].abs() < 1.0, "{kind}: {}", p[0]);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(OptimizerSpec::new(OptimizerKind::Adam).with_learning_rate(0.0).validate().is_err());
        let mut s = OptimizerSpec::new(OptimizerKind::Adam);
        s.beta1 = 1.0;
        assert!(s.validate().is_err());
        assert_eq!("nadam".parse::<OptimizerKind>().unwrap(), OptimizerKind::Nadam);
    }
}
