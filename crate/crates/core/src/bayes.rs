//! Bayesian optimization of the genetic period.
//!
//! A Gaussian process with a squared-exponential kernel models the map from
//! period `p` to validation loss. Each generation proposes new periods by
//! maximizing expected improvement on a dense grid, using the kriging believer
//! heuristic (the posterior mean stands in for the pending observation) to
//! spread several proposals within one generation.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::nets::{OptimizerSpec, TrainConfig};
use crate::pbt::{train_unit, PbtConfig, Population, PopulationUnit};
use crate::rng::derived_rng;
use crate::{Error, Result};

const INIT_STREAM: u64 = 0xBA7E;
const JITTER: f64 = 1e-8;

pub fn se_kernel(a: f64, b: f64, length_scale: f64, signal_variance: f64) -> f64 {
    signal_variance * (-(a - b).powi(2) / (2.0 * length_scale * length_scale)).exp()
}

/// A fitted GP regression over `(p, ℓ)` observations with constant prior mean.
#[derive(Debug, Clone)]
pub struct GpSurrogate {
    pub observations: Vec<(f64, f64)>,
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub prior_mean: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

impl GpSurrogate {
    pub fn new(
        observations: Vec<(f64, f64)>,
        length_scale: f64,
        signal_variance: f64,
        noise_variance: f64,
        prior_mean: f64,
    ) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::config("a GP needs at least one observation"));
        }
        if !(length_scale > 0.0 && signal_variance > 0.0 && noise_variance >= 0.0) {
            return Err(Error::config("kernel hyperparameters must be positive"));
        }
        let n = observations.len();
        let gram = |extra: f64| {
            DMatrix::from_fn(n, n, |i, j| {
                let k = se_kernel(observations[i].0, observations[j].0, length_scale, signal_variance);
                if i == j { k + noise_variance + extra } else { k }
            })
        };
        let chol = Cholesky::new(gram(0.0))
            .or_else(|| Cholesky::new(gram(JITTER)))
            .ok_or(Error::SingularKernel)?;
        let centred = DVector::from_iterator(n, observations.iter().map(|&(_, y)| y - prior_mean));
        let alpha = chol.solve(&centred);
        Ok(GpSurrogate { observations, length_scale, signal_variance, noise_variance, prior_mean, chol, alpha })
    }

    /// Signal variance and prior mean taken from the observed losses.
    pub fn from_observations(observations: Vec<(f64, f64)>, length_scale: f64, noise_variance: f64) -> Result<Self> {
        let n = observations.len() as f64;
        let mean = observations.iter().map(|o| o.1).sum::<f64>() / n;
        let var = observations.iter().map(|o| (o.1 - mean).powi(2)).sum::<f64>() / n;
        let signal_variance = if var > 0.0 && var.is_finite() { var } else { 1.0 };
        Self::new(observations, length_scale, signal_variance, noise_variance, mean)
    }

    fn cross(&self, p: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.observations.len(),
            self.observations.iter().map(|&(q, _)| se_kernel(p, q, self.length_scale, self.signal_variance)),
        )
    }

    /// Posterior mean and variance at `p`.
    pub fn posterior(&self, p: f64) -> (f64, f64) {
        let k = self.cross(p);
        let mean = self.prior_mean + k.dot(&self.alpha);
        let v = self.chol.l().solve_lower_triangular(&k).unwrap_or_else(|| DVector::zeros(k.len()));
        (mean, (self.signal_variance - v.norm_squared()).max(0.0))
    }
}

/// Expected improvement below `best` for a Gaussian with `mean` and `variance`.
pub fn expected_improvement(mean: f64, variance: f64, best: f64) -> f64 {
    let sigma = variance.max(0.0).sqrt();
    let gain = best - mean;
    if sigma == 0.0 {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    let n = Normal::standard();
    (gain * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BayesConfig {
    pub r_a: f64,
    pub r_b: f64,
    pub initial_design: usize,
    pub proposals: usize,
    pub max_generations: usize,
    pub grid_points: usize,
    pub noise_variance: f64,
    /// Search stops once the best loss falls strictly below this value.
    pub fitness_threshold: f64,
    pub hidden_width: usize,
    pub train: TrainConfig,
    pub optimizer: OptimizerSpec,
}

impl Default for BayesConfig {
    fn default() -> Self {
        BayesConfig::from_pbt(&PbtConfig::default())
    }
}

impl BayesConfig {
    /// Mirrors the population sizes of a PBT configuration.
    pub fn from_pbt(p: &PbtConfig) -> Self {
        BayesConfig {
            r_a: p.r_a,
            r_b: p.r_b,
            initial_design: p.root_count,
            proposals: p.reproducers,
            max_generations: p.max_generations,
            grid_points: 1000,
            noise_variance: 1e-6,
            fitness_threshold: p.fitness_threshold,
            hidden_width: p.hidden_width,
            train: p.train,
            optimizer: p.optimizer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_a > 0.0 && self.r_a < self.r_b && self.r_b.is_finite()) {
            return Err(Error::config("period range needs 0 < r_a < r_b"));
        }
        if self.initial_design < 2 || self.proposals == 0 || self.grid_points < 2 {
            return Err(Error::config("initial design >= 2, proposals >= 1 and grid >= 2 required"));
        }
        if !(self.noise_variance >= 0.0) {
            return Err(Error::config("noise variance must be non-negative"));
        }
        self.train.validate()?;
        self.optimizer.validate()
    }

    pub fn length_scale(&self) -> f64 {
        (self.r_b - self.r_a) / 4.0
    }

    pub fn initial_periods(&self) -> Vec<f64> {
        let n = self.initial_design;
        let step = (self.r_b - self.r_a) / (n - 1) as f64;
        (0..n).map(|i| if i + 1 == n { self.r_b } else { self.r_a + i as f64 * step }).collect()
    }

    fn grid(&self) -> (Vec<f64>, f64) {
        let step = (self.r_b - self.r_a) / (self.grid_points - 1) as f64;
        let g = (0..self.grid_points)
            .map(|i| if i + 1 == self.grid_points { self.r_b } else { self.r_a + i as f64 * step })
            .collect();
        (g, step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub period: f64,
    pub loss: f64,
    pub generation: usize,
}

/// Replaces non-finite losses with the worst finite one so the GP stays finite.
fn fit_targets(obs: &[Observation]) -> Vec<(f64, f64)> {
    let worst = obs.iter().map(|o| o.loss).filter(|l| l.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let fill = if worst.is_finite() { worst } else { 1.0 };
    obs.iter().map(|o| (o.period, if o.loss.is_finite() { o.loss } else { fill })).collect()
}

/// Next `count` periods by expected improvement with kriging believer updates.
/// Grid points closer than one grid step to a sampled period are skipped.
pub fn propose(cfg: &BayesConfig, observed: &[Observation], count: usize) -> Result<Vec<f64>> {
    let (grid, step) = cfg.grid();
    let mut points = fit_targets(observed);
    let best = points.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let gp = GpSurrogate::from_observations(points.clone(), cfg.length_scale(), cfg.noise_variance)?;
        let mut choice: Option<(f64, f64, f64)> = None;
        for &g in &grid {
            if points.iter().any(|&(p, _)| (g - p).abs() < step * (1.0 - 1e-9)) {
                continue;
            }
            let (m, v) = gp.posterior(g);
            let ei = expected_improvement(m, v, best);
            if choice.is_none_or(|(_, e, var)| ei > e || (ei == e && v > var)) {
                choice = Some((g, ei, v));
            }
        }
        let Some((g, _, _)) = choice else { break };
        out.push(g);
        points.push((g, gp.posterior(g).0));
    }
    Ok(out)
}

/// Generic search loop: `objective` scores a batch of periods for a generation.
pub fn search(
    cfg: &BayesConfig,
    mut objective: impl FnMut(usize, &[f64]) -> Result<Vec<f64>>,
) -> Result<Vec<Observation>> {
    cfg.validate()?;
    let mut observed = Vec::new();
    let record = |observed: &mut Vec<Observation>, g: usize, ps: &[f64], ls: Vec<f64>| {
        observed.extend(ps.iter().zip(ls).map(|(&period, loss)| Observation { period, loss, generation: g }));
    };
    let init = cfg.initial_periods();
    let losses = objective(0, &init)?;
    record(&mut observed, 0, &init, losses);
    for g in 1..=cfg.max_generations {
        let best = observed.iter().map(|o| o.loss).fold(f64::INFINITY, f64::min);
        if best < cfg.fitness_threshold {
            break;
        }
        let ps = propose(cfg, &observed, cfg.proposals)?;
        if ps.is_empty() {
            break;
        }
        let losses = objective(g, &ps)?;
        record(&mut observed, g, &ps, losses);
    }
    Ok(observed)
}

/// Trains a fresh unit at every sampled period and returns them all.
pub fn bayes_optimize(data: &[(f64, f64)], cfg: &BayesConfig, seed: u64) -> Result<Population> {
    let mut units: Vec<PopulationUnit> = Vec::new();
    let mut last_generation = 0;
    search(cfg, |g, ps| {
        let start = units.len();
        let mut batch: Vec<PopulationUnit> = ps
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let id = start + k;
                let mut u = PopulationUnit::root(id, p, cfg.hidden_width, &mut derived_rng(seed, &[INIT_STREAM, id as u64]));
                u.generation_born = g;
                u
            })
            .collect();
        batch.par_iter_mut().try_for_each(|u| train_unit(u, data, &cfg.train, &cfg.optimizer, seed))?;
        let losses = batch.iter().map(PopulationUnit::loss).collect();
        units.extend(batch);
        last_generation = g;
        Ok(losses)
    })?;
    Ok(Population { units, generation: last_generation })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gauss-Jordan inverse; deliberately independent of the Cholesky path.
    fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for c in 0..n {
            let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, piv);
            inv.swap(c, piv);
            let d = a[c][c];
            for j in 0..n {
                a[c][j] /= d;
                inv[c][j] /= d;
            }
            for r in 0..n {
                if r != c {
                    let f = a[r][c];
                    for j in 0..n {
                        a[r][j] -= f * a[c][j];
                        inv[r][j] -= f * inv[c][j];
                    }
                }
            }
        }
        inv
    }

    fn oracle(obs: &[(f64, f64)], ls: f64, sv: f64, noise: f64, m0: f64, p: f64) -> (f64, f64) {
        let n = obs.len();
        let k: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| se_kernel(obs[i].0, obs[j].0, ls, sv) + if i == j { noise } else { 0.0 }).collect())
            .collect();
        let ki = invert(k);
        let ks: Vec<f64> = obs.iter().map(|o| se_kernel(p, o.0, ls, sv)).collect();
        let mut mean = m0;
        let mut var = sv;
        for i in 0..n {
            for j in 0..n {
                mean += ks[i] * ki[i][j] * (obs[j].1 - m0);
                var -= ks[i] * ki[i][j] * ks[j];
            }
        }
        (mean, var.max(0.0))
    }

    #[test]
    fn posterior_matches_dense_oracle() {
        for n in [3usize, 7, 20] {
            let obs: Vec<(f64, f64)> = (0..n).map(|i| {
                let p = 0.5 + 0.5 * i as f64 / (n - 1) as f64;
                (p, (7.0 * p).sin() + 0.3 * p)
            })
            .collect();
            for ls in [0.05, 0.1, 0.125] {
                let gp = GpSurrogate::new(obs.clone(), ls, 0.7, 1e-3, 0.2).unwrap();
                for q in 0..50 {
                    let p = 0.45 + q as f64 * 0.012;
                    let (m, v) = gp.posterior(p);
                    let (mo, vo) = oracle(&obs, ls, 0.7, 1e-3, 0.2, p);
                    assert!((m - mo).abs() < 1e-10 && (v - vo).abs() < 1e-10, "n={n} ls={ls} p={p}: {m} {mo} {v} {vo}");
                }
            }
        }
    }

    #[test]
    fn noiseless_interpolation_and_decay() {
        let obs = vec![(0.5, 0.3), (0.7, 0.1), (0.9, 0.4)];
        let gp = GpSurrogate::new(obs.clone(), 0.125, 0.5, 0.0, 0.2).unwrap();
        for (p, y) in obs {
            let (m, v) = gp.posterior(p);
            assert!((m - y).abs() < 1e-8 && v <= 1e-8);
        }
        let (m, v) = gp.posterior(0.9 + 10.0 * 0.125);
        assert!((m - 0.2).abs() < 1e-6 && (v - 0.5).abs() < 1e-6);
    }

    #[test]
    fn ei_closed_forms() {
        assert_eq!(expected_improvement(0.5, 0.0, 0.3), 0.0);
        assert!((expected_improvement(0.1, 0.0, 0.3) - 0.2).abs() < 1e-15);
        assert!((expected_improvement(0.3, 1.0, 0.3) - 0.398_942_280_401_432_7).abs() < 1e-12);
        for i in 0..100 {
            let m = -1.0 + i as f64 * 0.02;
            assert!(expected_improvement(m, 0.04, 0.0) >= 0.0);
        }
    }

    #[test]
    fn bowl_is_found() {
        let cfg = BayesConfig::default();
        let obs = search(&cfg, |_, ps| Ok(ps.iter().map(|p| (p - 0.75).powi(2)).collect())).unwrap();
        let best = obs.iter().min_by(|a, b| a.loss.total_cmp(&b.loss)).unwrap();
        assert!((best.period - 0.75).abs() < 0.01, "{best:?}");
        let mut ps: Vec<f64> = obs.iter().map(|o| o.period).collect();
        ps.sort_by(f64::total_cmp);
        let step = 0.5 / 999.0;
        assert!(ps.windows(2).all(|w| w[1] - w[0] >= step * (1.0 - 1e-9)));
        let mut running = f64::INFINITY;
        for g in 0..=cfg.max_generations {
            let b = obs.iter().filter(|o| o.generation <= g).map(|o| o.loss).fold(f64::INFINITY, f64::min);
            assert!(b <= running);
            running = b;
        }
    }

    #[test]
    fn zero_generations_keeps_initial_design() {
        let cfg = BayesConfig { max_generations: 0, ..BayesConfig::default() };
        let obs = search(&cfg, |_, ps| Ok(vec![1.0; ps.len()])).unwrap();
        assert_eq!(obs.len(), 8);
    }

    #[test]
    fn infinite_losses_are_tolerated() {
        let cfg = BayesConfig { max_generations: 2, ..BayesConfig::default() };
        let obs = search(&cfg, |_, ps| Ok(ps.iter().map(|&p| if p > 0.9 { f64::INFINITY } else { (p - 0.6).abs() }).collect())).unwrap();
        assert_eq!(obs.len(), 8 + 14);
    }

    #[test]
    fn optimize_trains_units() {
        let data: Vec<(f64, f64)> = (0..120).map(|i| {
            let x = -3.0 + i as f64 * 0.05;
            (x, (2.0 * std::f64::consts::PI * x / 0.75).sin())
        })
        .collect();
        let cfg = BayesConfig {
            initial_design: 3,
            proposals: 2,
            max_generations: 1,
            hidden_width: 8,
            train: TrainConfig { max_epochs: 5, ..TrainConfig::default() },
            ..BayesConfig::default()
        };
        let pop = bayes_optimize(&data, &cfg, 3).unwrap();
        assert_eq!(pop.units.len(), 5);
        assert!(pop.units.iter().all(|u| u.trained && u.root_ancestor == u.id));
        assert_eq!(pop.units[4].generation_born, 1);
    }
}
