use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::model::ModelKind;
use crate::metrics::PointMetric;
use crate::nets::{OptimizerKind, TrainConfig};
use crate::pbt::PbtConfig;
use crate::signals::{CoeffRange, TrendKind};
use crate::{Error, Result};

/// Noise variance used by `noisy` when none is given.
pub const DEFAULT_NOISE_VARIANCE: f64 = 0.15;

/// Written and parsed as `noiseless`, `noisy`, `noisy:<σ²>` or `trend`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scenario {
    Noiseless,
    Noisy { variance: f64 },
    Trend,
}

impl Scenario {
    pub fn noise_variance(&self) -> f64 {
        match self {
            Scenario::Noisy { variance } => *variance,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Noiseless => f.write_str("noiseless"),
            Scenario::Noisy { variance } => write!(f, "noisy:{variance}"),
            Scenario::Trend => f.write_str("trend"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "noiseless" => Ok(Scenario::Noiseless),
            None if s == "noisy" => Ok(Scenario::Noisy { variance: DEFAULT_NOISE_VARIANCE }),
            None if s == "trend" => Ok(Scenario::Trend),
            Some(("noisy", v)) => {
                let variance: f64 = v.parse().map_err(|_| Error::parse(format!("bad noise variance `{v}`")))?;
                if !(variance >= 0.0 && variance.is_finite()) {
                    return Err(Error::parse("noise variance must be non-negative"));
                }
                Ok(Scenario::Noisy { variance })
            }
            _ => Err(Error::parse(format!("unknown scenario `{s}`"))),
        }
    }
}

impl TryFrom<String> for Scenario {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Scenario> for String {
    fn from(s: Scenario) -> String {
        s.to_string()
    }
}

/// A full experiment description. Every field has a default, so a config file
/// only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub seed: u64,
    /// Variants drawn per form.
    pub variants: usize,
    pub repeats: usize,
    pub train_periods: u32,
    pub eval_periods: u32,
    /// Samples per period.
    pub rate: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub warp_samples: usize,
    pub point_metric: PointMetric,
    pub include_tangent: bool,
    /// Resample training noise every epoch instead of once per dataset.
    pub per_epoch_noise: bool,
    pub max_order: usize,
    /// Skeletons to use instead of the full enumeration, e.g. `(* sin square)`.
    pub forms: Option<Vec<String>>,
    pub trend: TrendKind,
    pub coefficients: CoeffRange,
    pub models: Vec<ModelKind>,
    pub optimizers: Vec<OptimizerKind>,
    /// Hidden width of the feedforward models.
    pub hidden_width: usize,
    /// Per-neuron initial frequencies of trainable snakes are drawn from here.
    pub tsnake_range: (f64, f64),
    pub train: TrainConfig,
    pub pbt: PbtConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            scenario: Scenario::Noiseless,
            seed: 0,
            variants: 10,
            repeats: 5,
            train_periods: 5,
            eval_periods: 10,
            rate: 100,
            alpha: 1.0,
            epsilon: 0.05,
            warp_samples: 21,
            point_metric: PointMetric::Mse,
            include_tangent: false,
            per_epoch_noise: false,
            max_order: 2,
            forms: None,
            trend: super::trend_kind_default(),
            coefficients: CoeffRange::default(),
            models: ModelKind::DEFAULT_ROSTER.to_vec(),
            optimizers: OptimizerKind::ALL.to_vec(),
            hidden_width: 64,
            tsnake_range: (1.0, 6.0),
            train: TrainConfig::default(),
            pbt: PbtConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_periods == 0 || self.eval_periods <= self.train_periods {
            return Err(Error::config("need 0 < train_periods < eval_periods"));
        }
        if self.variants == 0 || self.repeats == 0 || self.rate == 0 {
            return Err(Error::config("variants, repeats and rate must be positive"));
        }
        if self.models.is_empty() || self.optimizers.is_empty() {
            return Err(Error::config("model and optimizer rosters must be non-empty"));
        }
        let (lo, hi) = self.tsnake_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::config("tsnake_range must satisfy 0 < lo <= hi"));
        }
        if self.hidden_width == 0 {
            return Err(Error::config("hidden width must be positive"));
        }
        if let Some(forms) = &self.forms {
            if forms.is_empty() {
                return Err(Error::config("forms filter is empty"));
            }
        }
        let metric = crate::metrics::MetricConfig {
            point_metric: self.point_metric,
            epsilon: self.epsilon,
            grid_samples: self.warp_samples,
            alpha: self.alpha,
            train_endpoint: 1.0,
            tau: 1.0,
            train_diameter: 2.0,
        };
        metric.validate()?;
        self.train.validate()?;
        self.pbt.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_text_round_trip() {
        for s in ["noiseless", "trend", "noisy:0.15", "noisy:0"] {
            let parsed: Scenario = s.parse().unwrap();
            assert_eq!(parsed.to_string().parse::<Scenario>().unwrap(), parsed);
        }
        assert_eq!("noisy".parse::<Scenario>().unwrap(), Scenario::Noisy { variance: 0.15 });
        assert!("noisy:-1".parse::<Scenario>().is_err());
        assert!("loud".parse::<Scenario>().is_err());
    }

    #[test]
    fn defaults_follow_the_reference_setup() {
        let s = ExperimentSpec::default();
        assert_eq!((s.variants, s.repeats, s.train_periods, s.eval_periods, s.rate), (10, 5, 5, 10, 100));
        assert_eq!((s.alpha, s.epsilon, s.warp_samples), (1.0, 0.05, 21));
        let p = s.pbt;
        assert_eq!((p.max_generations, p.root_count, p.reproducers, p.diversity_floor), (10, 8, 7, 3));
        assert_eq!((p.r_a, p.r_b), (0.5, 1.0));
        assert!(s.validate().is_ok());
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let spec = ExperimentSpec::from_toml(
            r#"
            scenario = "noisy:0.2"
            variants = 3
            forms = ["sin", "(* sin square)"]
            models = ["snake", "n-fittest"]
            optimizers = ["adam"]

            [pbt]
            max_generations = 4

            [pbt.optimizer]
            kind = "adam"
            learning_rate = 0.005
            "#,
        )
        .unwrap();
        assert_eq!(spec.scenario, Scenario::Noisy { variance: 0.2 });
        assert_eq!(spec.variants, 3);
        assert_eq!(spec.repeats, 5);
        assert_eq!(spec.pbt.max_generations, 4);
        assert_eq!(spec.pbt.root_count, 8);
        assert_eq!(spec.pbt.optimizer.learning_rate, 0.005);
        assert_eq!(spec.pbt.optimizer.beta2, 0.999);
        assert_eq!(spec.models, vec![ModelKind::Snake, ModelKind::NFittest]);
    }

    #[test]
    fn toml_round_trip_and_rejections() {
        let spec = ExperimentSpec { forms: Some(vec!["sin".into()]), ..ExperimentSpec::default() };
        let text = spec.to_toml().unwrap();
        assert_eq!(ExperimentSpec::from_toml(&text).unwrap(), spec);
        assert!(ExperimentSpec::from_toml("eval_periods = 5").is_err());
        assert!(ExperimentSpec::from_toml("bogus = 1").is_err());
        assert!(ExperimentSpec::from_toml("models = [\"gru\"]").is_err());
    }
}
