use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::variant::{Domain, SignalVariant};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    Training,
    Evaluation,
}

impl DomainTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainTag::Training => "training",
            DomainTag::Evaluation => "evaluation",
        }
    }
}

impl FromStr for DomainTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "training" => Ok(DomainTag::Training),
            "evaluation" => Ok(DomainTag::Evaluation),
            other => Err(Error::parse(format!("unknown domain tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<(f64, f64)>,
    pub tag: DomainTag,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    /// Writes `x,y,domain_tag` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "y", "domain_tag"])?;
        for &(x, y) in &self.points {
            out.write_record([format!("{x:.16e}"), format!("{y:.16e}"), self.tag.as_str().to_owned()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let mut points = Vec::new();
        let mut tag = None;
        for row in reader.records() {
            let row = row?;
            if row.len() != 3 {
                return Err(Error::parse(format!("expected 3 columns, found {}", row.len())));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::parse(format!("bad number `{s}`")));
            let row_tag: DomainTag = row[2].trim().parse()?;
            if *tag.get_or_insert(row_tag) != row_tag {
                return Err(Error::parse("mixed domain tags in one sample file"));
            }
            points.push((num(&row[0])?, num(&row[1])?));
        }
        Ok(SampleSet { points, tag: tag.unwrap_or(DomainTag::Training) })
    }
}

/// Regular midpoint grid over the evaluation domain, `rate` points per period,
/// ordered from left to right.
pub fn evaluation_grid(domain: &Domain, rate: usize) -> Vec<f64> {
    let step = domain.tau / rate as f64;
    let per_side = rate * (domain.eval_periods - domain.train_periods) as usize;
    let inner = domain.train_half_width();
    let right: Vec<f64> = (0..per_side).map(|i| inner + (i as f64 + 0.5) * step).collect();
    right.iter().rev().map(|x| -x).chain(right.iter().copied()).collect()
}

/// Regular midpoint grid over the training domain.
pub fn training_grid(domain: &Domain, rate: usize) -> Vec<f64> {
    let step = domain.tau / rate as f64;
    let n = rate * 2 * domain.train_periods as usize;
    let start = -domain.train_half_width();
    (0..n).map(|i| start + (i as f64 + 0.5) * step).collect()
}

/// Samples a dataset from `v`.
///
/// Training sets draw `rate * 2 n_T` points uniformly at random from the
/// training domain and add N(0, σ²) noise to y; evaluation sets are the
/// noiseless [`evaluation_grid`].
pub fn sample_dataset(
    v: &SignalVariant,
    domain: &Domain,
    rate: usize,
    which: DomainTag,
    noise_variance: f64,
    seed: u64,
) -> Result<SampleSet> {
    if rate == 0 {
        return Err(Error::config("sampling rate must be at least 1"));
    }
    if !(noise_variance >= 0.0) {
        return Err(Error::config("noise variance must be non-negative"));
    }
    let points = match which {
        DomainTag::Training => {
            let mut rng = rng_from_seed(seed);
            let half = domain.train_half_width();
            let noise = Normal::new(0.0, noise_variance.sqrt()).map_err(|e| Error::config(e.to_string()))?;
            let n = rate * 2 * domain.train_periods as usize;
            (0..n)
                .map(|_| {
                    let x = loop {
                        let x = rng.random_range(-half..half);
                        if x != -half {
                            break x;
                        }
                    };
                    let mut y = v.value(x);
                    if noise_variance > 0.0 {
                        y += noise.sample(&mut rng);
                    }
                    (x, y)
                })
                .collect()
        }
        DomainTag::Evaluation => evaluation_grid(domain, rate).into_iter().map(|x| (x, v.value(x))).collect(),
    };
    Ok(SampleSet { points, tag: which })
}
