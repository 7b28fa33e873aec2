//! Population-based training over a genetic period guess.
//!
//! Each unit splits its input into a trend path and a periodicity path that
//! sees `x` modulo the unit's period `p`. Roots start with periods spread evenly
//! over `[r_a, r_b]`; every generation trains the newcomers, selects a
//! reproduction subset and breeds children whose periods interpolate between
//! neighbouring units, weighted toward the fitter parent.

mod log;
mod unit;

use std::collections::BTreeSet;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nets::{train, OptimizerKind, OptimizerSpec, TrainConfig};
use crate::rng::{derive_seed, derived_rng, Rng};
use crate::{Error, Result};

pub use log::{read_log, write_log, LogRecord};
pub use unit::{floor_mod, unit_forward, PopulationUnit, UnitScratch};

const INIT_STREAM: u64 = 0x1417;
const TRAIN_STREAM: u64 = 0x7EA1;
const SELECT_STREAM: u64 = 0x5E1E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    NFittest,
    Pareto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PbtConfig {
    pub r_a: f64,
    pub r_b: f64,
    pub root_count: usize,
    pub reproducers: usize,
    pub diversity_floor: usize,
    pub score_scale: f64,
    pub max_generations: usize,
    /// Evolution stops once the best loss falls strictly below this value.
    pub fitness_threshold: f64,
    pub hidden_width: usize,
    pub train: TrainConfig,
    pub optimizer: OptimizerSpec,
}

impl Default for PbtConfig {
    fn default() -> Self {
        PbtConfig {
            r_a: 0.5,
            r_b: 1.0,
            root_count: 8,
            reproducers: 7,
            diversity_floor: 3,
            score_scale: 1.0,
            max_generations: 10,
            fitness_threshold: 0.0,
            hidden_width: 60,
            train: TrainConfig::default(),
            optimizer: OptimizerSpec::new(OptimizerKind::Adam).with_learning_rate(1e-2),
        }
    }
}

impl PbtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_a > 0.0 && self.r_a < self.r_b && self.r_b.is_finite()) {
            return Err(Error::config("period range needs 0 < r_a < r_b"));
        }
        if self.root_count < 2 {
            return Err(Error::config("at least two roots are required"));
        }
        if self.reproducers == 0 || self.reproducers > self.root_count {
            return Err(Error::config("reproducers must lie in 1..=root_count"));
        }
        if self.diversity_floor > self.root_count {
            return Err(Error::config("diversity floor cannot exceed root_count"));
        }
        if !(self.score_scale > 0.0) {
            return Err(Error::config("score scale must be positive"));
        }
        if !(self.fitness_threshold >= 0.0) {
            return Err(Error::config("fitness threshold must be non-negative"));
        }
        if self.hidden_width == 0 {
            return Err(Error::config("hidden width must be positive"));
        }
        self.train.validate()?;
        self.optimizer.validate()
    }

    /// `n_r` evenly spaced periods on `[r_a, r_b]`, endpoints included.
    pub fn root_periods(&self) -> Vec<f64> {
        let n = self.root_count;
        let step = (self.r_b - self.r_a) / (n - 1) as f64;
        (0..n).map(|i| if i + 1 == n { self.r_b } else { self.r_a + i as f64 * step }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub units: Vec<PopulationUnit>,
    pub generation: usize,
}

impl Population {
    pub fn distinct_ancestors(&self) -> usize {
        self.units.iter().map(|u| u.root_ancestor).collect::<BTreeSet<_>>().len()
    }

    pub fn best_loss(&self) -> f64 {
        self.units.iter().map(PopulationUnit::loss).fold(f64::INFINITY, f64::min)
    }

    fn next_id(&self) -> usize {
        self.units.iter().map(|u| u.id + 1).max().unwrap_or(0)
    }
}

/// Ranking order: lower loss first, then younger, then later id.
fn fitter(a: &PopulationUnit, b: &PopulationUnit) -> std::cmp::Ordering {
    a.loss()
        .total_cmp(&b.loss())
        .then(b.generation_born.cmp(&a.generation_born))
        .then(b.id.cmp(&a.id))
}

pub fn init_roots(cfg: &PbtConfig, seed: u64) -> Result<Population> {
    cfg.validate()?;
    let units = cfg
        .root_periods()
        .into_iter()
        .enumerate()
        .map(|(id, p)| PopulationUnit::root(id, p, cfg.hidden_width, &mut derived_rng(seed, &[INIT_STREAM, id as u64])))
        .collect();
    Ok(Population { units, generation: 0 })
}

/// Trains `unit` in place and records its best validation loss. Divergence
/// records `+inf` and keeps the pre-training parameters.
///
/// Every unit trained under one `seed` gets the same train/validation split,
/// so losses are comparable across the population and a child never trains on
/// points its parent was scored on.
pub fn train_unit(
    unit: &mut PopulationUnit,
    data: &[(f64, f64)],
    train_cfg: &TrainConfig,
    opt: &OptimizerSpec,
    seed: u64,
) -> Result<()> {
    let cfg = train_cfg.with_seed(derive_seed(seed, &[TRAIN_STREAM]));
    match train(unit.clone(), data, &cfg, opt) {
        Ok(out) => {
            *unit = PopulationUnit { validation_loss: Some(out.validation_loss), trained: true, ..out.model };
            Ok(())
        }
        Err(Error::NonFiniteLoss { .. }) => {
            unit.validation_loss = Some(f64::INFINITY);
            unit.trained = true;
            Ok(())
        }
        Err(e) => Err(e),
    }
}

/// Trains every untrained unit concurrently; trained units are untouched.
pub fn train_untrained(pop: &mut Population, data: &[(f64, f64)], cfg: &PbtConfig, seed: u64) -> Result<()> {
    pop.units
        .par_iter_mut()
        .filter(|u| !u.trained)
        .try_for_each(|u| train_unit(u, data, &cfg.train, &cfg.optimizer, seed))
}

/// Indices of the `n_g` fittest units, younger first on ties.
pub fn select_nfittest(units: &[PopulationUnit], n_g: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..units.len()).collect();
    idx.sort_by(|&a, &b| fitter(&units[a], &units[b]));
    idx.truncate(n_g);
    idx
}

/// `s = S√g / (1 + μ)^(1 + S√g)` with `μ` the min-max normalized loss.
pub fn pareto_scores(units: &[PopulationUnit], generation: usize, score_scale: f64) -> Vec<f64> {
    let finite = units.iter().map(PopulationUnit::loss).filter(|l| l.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(l), hi.max(l)));
    let k = score_scale * (generation.max(1) as f64).sqrt();
    units
        .iter()
        .map(|u| {
            let l = u.loss();
            let mu = if !l.is_finite() {
                1.0
            } else if hi > lo {
                (l - lo) / (hi - lo)
            } else {
                0.0
            };
            k / (1.0 + mu).powf(1.0 + k)
        })
        .collect()
}

/// `n_g` draws without replacement, each proportional to the remaining scores.
pub fn select_pareto(scores: &[f64], n_g: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if scores.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::config("scores must be finite and non-negative"));
    }
    if scores.iter().all(|&s| s == 0.0) {
        return Err(Error::DegenerateScores);
    }
    let mut remaining: Vec<usize> = (0..scores.len()).collect();
    let mut chosen = Vec::with_capacity(n_g.min(scores.len()));
    while chosen.len() < n_g && !remaining.is_empty() {
        let total: f64 = remaining.iter().map(|&i| scores[i]).sum();
        if total <= 0.0 {
            chosen.extend(remaining.drain(..).take(n_g - chosen.len()));
            break;
        }
        let r = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = remaining.len() - 1;
        for (k, &i) in remaining.iter().enumerate() {
            acc += scores[i];
            if r < acc && scores[i] > 0.0 {
                pick = k;
                break;
            }
        }
        chosen.push(remaining.remove(pick));
    }
    Ok(chosen)
}

/// Appends the fittest outside units with unseen root ancestors until `selected`
/// covers `n_e` ancestors.
pub fn enforce_root_diversity(selected: &[usize], units: &[PopulationUnit], n_e: usize) -> Result<Vec<usize>> {
    let available = units.iter().map(|u| u.root_ancestor).collect::<BTreeSet<_>>().len();
    if available < n_e {
        return Err(Error::InsufficientDiversity { available, required: n_e });
    }
    let mut out = selected.to_vec();
    let mut seen: BTreeSet<usize> = out.iter().map(|&i| units[i].root_ancestor).collect();
    let mut candidates: Vec<usize> = (0..units.len()).filter(|i| !out.contains(i)).collect();
    candidates.sort_by(|&a, &b| fitter(&units[a], &units[b]));
    for i in candidates {
        if seen.len() >= n_e {
            break;
        }
        if seen.insert(units[i].root_ancestor) {
            out.push(i);
        }
    }
    Ok(out)
}

/// Nearest units strictly below and strictly above unit `b2` in period. Among
/// equal-period candidates the fitter one is taken.
pub fn neighbor_parents(b2: usize, units: &[PopulationUnit]) -> (Option<usize>, Option<usize>) {
    let p = units[b2].period;
    let pick = |below: bool| {
        (0..units.len())
            .filter(|&i| if below { units[i].period < p } else { units[i].period > p })
            .min_by(|&a, &b| {
                let (pa, pb) = (units[a].period, units[b].period);
                let near = if below { pb.total_cmp(&pa) } else { pa.total_cmp(&pb) };
                near.then(fitter(&units[a], &units[b]))
            })
    };
    (pick(true), pick(false))
}

/// Child period between `p_i < p_j`, biased toward the fitter parent. `fit_i`
/// and `fit_j` are losses under `NFittest` and scores under `Pareto`.
pub fn crossover_param(p_i: f64, p_j: f64, mode: SelectionMode, fit_i: f64, fit_j: f64) -> f64 {
    let (num, den) = match mode {
        SelectionMode::NFittest => (fit_i, fit_i + fit_j),
        SelectionMode::Pareto => (fit_j, fit_i + fit_j),
    };
    let sigma = if den == 0.0 || (fit_i.is_infinite() && fit_j.is_infinite()) {
        0.5
    } else if num.is_infinite() {
        1.0
    } else {
        (num / den).clamp(0.0, 1.0)
    };
    p_i + sigma * (p_j - p_i)
}

/// A child cloning the trained state of its central parent `b2`.
pub fn spawn_offspring(b2: &PopulationUnit, p_c: f64, generation: usize, id: usize, root_ancestor: usize) -> PopulationUnit {
    b2.clone_as_child(id, p_c, generation, root_ancestor)
}

/// Minimum-loss unit, youngest on ties.
pub fn best_unit(pop: &Population) -> Option<&PopulationUnit> {
    pop.units.iter().min_by(|a, b| fitter(a, b))
}

fn breed(pop: &Population, selected: &[usize], mode: SelectionMode, scores: &[f64], generation: usize) -> Vec<PopulationUnit> {
    let units = &pop.units;
    let fitness = |i: usize| match mode {
        SelectionMode::NFittest => units[i].loss(),
        SelectionMode::Pareto => scores[i],
    };
    let mut next_id = pop.next_id();
    let mut children = Vec::new();
    for &b2 in selected {
        let (b1, b3) = neighbor_parents(b2, units);
        for pair in [b1.map(|b1| (b1, b2)), b3.map(|b3| (b2, b3))].into_iter().flatten() {
            let (i, j) = pair;
            let p_c = crossover_param(units[i].period, units[j].period, mode, fitness(i), fitness(j));
            let other = if i == b2 { j } else { i };
            let ancestor = if fitter(&units[other], &units[b2]).is_lt() {
                units[other].root_ancestor
            } else {
                units[b2].root_ancestor
            };
            children.push(spawn_offspring(&units[b2], p_c, generation, next_id, ancestor));
            next_id += 1;
        }
    }
    children
}

/// Runs the full loop and returns every unit ever trained.
pub fn evolve(data: &[(f64, f64)], cfg: &PbtConfig, mode: SelectionMode, seed: u64) -> Result<Population> {
    let mut pop = init_roots(cfg, seed)?;
    train_untrained(&mut pop, data, cfg, seed)?;
    while pop.generation < cfg.max_generations && !(pop.best_loss() < cfg.fitness_threshold) {
        let g = pop.generation + 1;
        let scores = pareto_scores(&pop.units, g, cfg.score_scale);
        let selected = match mode {
            SelectionMode::NFittest => select_nfittest(&pop.units, cfg.reproducers),
            SelectionMode::Pareto => {
                let mut rng = derived_rng(seed, &[SELECT_STREAM, g as u64]);
                match select_pareto(&scores, cfg.reproducers, &mut rng) {
                    Ok(b) => b,
                    Err(Error::DegenerateScores) => select_nfittest(&pop.units, cfg.reproducers),
                    Err(e) => return Err(e),
                }
            }
        };
        let selected = enforce_root_diversity(&selected, &pop.units, cfg.diversity_floor)?;
        let children = breed(&pop, &selected, mode, &scores, g);
        pop.units.extend(children);
        pop.generation = g;
        train_untrained(&mut pop, data, cfg, seed)?;
    }
    Ok(pop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn unit(id: usize, p: f64, loss: f64, g: usize, ancestor: usize) -> PopulationUnit {
        let mut u = PopulationUnit::root(id, p, 2, &mut rng_from_seed(id as u64));
        u.validation_loss = Some(loss);
        u.trained = true;
        u.generation_born = g;
        u.root_ancestor = ancestor;
        u
    }

    #[test]
    fn root_periods_are_evenly_spaced() {
        let p = PbtConfig::default().root_periods();
        assert_eq!(p.len(), 8);
        assert_eq!(p[0], 0.5);
        assert_eq!(p[7], 1.0);
        for w in p.windows(2) {
            assert!((w[1] - w[0] - 1.0 / 14.0).abs() < 1e-15);
        }
        let two = PbtConfig { root_count: 2, reproducers: 2, diversity_floor: 2, ..PbtConfig::default() };
        assert_eq!(two.root_periods(), vec![0.5, 1.0]);
    }

    #[test]
    fn roots_are_their_own_ancestors() {
        let pop = init_roots(&PbtConfig::default(), 1).unwrap();
        assert_eq!(pop.distinct_ancestors(), 8);
        assert!(pop.units.iter().all(|u| u.root_ancestor == u.id && u.generation_born == 0 && !u.trained));
    }

    #[test]
    fn config_validation() {
        let d = PbtConfig::default();
        assert!(d.validate().is_ok());
        assert!(PbtConfig { r_a: 1.0, ..d }.validate().is_err());
        assert!(PbtConfig { root_count: 1, ..d }.validate().is_err());
        assert!(PbtConfig { reproducers: 9, ..d }.validate().is_err());
        assert!(PbtConfig { diversity_floor: 9, ..d }.validate().is_err());
        assert!(PbtConfig { score_scale: 0.0, ..d }.validate().is_err());
    }

    #[test]
    fn nfittest_examples() {
        let u = vec![unit(0, 0.5, 0.3, 0, 0), unit(1, 0.6, 0.1, 0, 1), unit(2, 0.7, 0.2, 0, 2)];
        assert_eq!(select_nfittest(&u, 2), vec![1, 2]);
        assert_eq!(select_nfittest(&u, 3).len(), 3);
        let tie = vec![unit(0, 0.5, 0.1, 0, 0), unit(1, 0.6, 0.2, 1, 1), unit(2, 0.7, 0.2, 3, 2)];
        assert_eq!(select_nfittest(&tie, 2), vec![0, 2]);
    }

    #[test]
    fn pareto_score_examples() {
        let u = vec![unit(0, 0.5, 0.1, 0, 0), unit(1, 0.6, 0.3, 0, 1), unit(2, 0.7, 0.5, 0, 2)];
        let s = pareto_scores(&u, 1, 1.0);
        assert_eq!(s[0], 1.0);
        assert!((s[1] - 1.0 / 1.5f64.powi(2)).abs() < 1e-15);
        assert_eq!(s[2], 0.25);
        let flat = vec![unit(0, 0.5, 0.2, 0, 0), unit(1, 0.6, 0.2, 0, 1)];
        assert_eq!(pareto_scores(&flat, 4, 1.0), vec![2.0, 2.0]);
        let failed = vec![unit(0, 0.5, 0.2, 0, 0), unit(1, 0.6, f64::INFINITY, 0, 1)];
        assert_eq!(pareto_scores(&failed, 1, 1.0), vec![1.0, 0.25]);
    }

    #[test]
    fn pareto_selection_edge_cases() {
        let mut rng = rng_from_seed(3);
        for _ in 0..100 {
            assert_eq!(select_pareto(&[0.0, 1.0, 0.0], 1, &mut rng).unwrap(), vec![1]);
        }
        let mut all = select_pareto(&[0.3, 0.1, 0.5, 0.2], 4, &mut rng).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(matches!(select_pareto(&[0.0, 0.0], 1, &mut rng), Err(Error::DegenerateScores)));
    }

    #[test]
    fn pareto_selection_frequency() {
        let mut rng = rng_from_seed(17);
        let n = 30000;
        let hits = (0..n).filter(|_| select_pareto(&[2.0, 1.0], 1, &mut rng).unwrap()[0] == 0).count();
        assert!((hits as f64 / n as f64 - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn diversity_examples() {
        let u = vec![
            unit(0, 0.5, 0.1, 0, 0),
            unit(1, 0.55, 0.15, 1, 0),
            unit(2, 0.6, 0.4, 0, 2),
            unit(3, 0.65, 0.3, 1, 2),
            unit(4, 0.7, 0.35, 0, 4),
            unit(5, 0.75, 0.2, 2, 0),
        ];
        let b = enforce_root_diversity(&[0, 1], &u, 3).unwrap();
        assert_eq!(b, vec![0, 1, 3, 4]);
        assert_eq!(enforce_root_diversity(&[0, 2, 4], &u, 3).unwrap(), vec![0, 2, 4]);
        assert!(matches!(enforce_root_diversity(&[0], &u, 4), Err(Error::InsufficientDiversity { available: 3, required: 4 })));
    }

    #[test]
    fn neighbors_use_strict_inequalities() {
        let u = vec![unit(0, 0.5, 0.1, 0, 0), unit(1, 0.7, 0.1, 0, 1), unit(2, 0.9, 0.1, 0, 2), unit(3, 0.7, 0.1, 1, 1)];
        assert_eq!(neighbor_parents(1, &u), (Some(0), Some(2)));
        assert_eq!(neighbor_parents(0, &u).0, None);
        assert_eq!(neighbor_parents(2, &u).1, None);
        assert_eq!(neighbor_parents(0, &u).1, Some(3));
    }

    #[test]
    fn crossover_examples() {
        assert!((crossover_param(0.5, 0.9, SelectionMode::NFittest, 1.0, 3.0) - 0.6).abs() < 1e-15);
        assert!((crossover_param(0.5, 0.9, SelectionMode::NFittest, 2.0, 2.0) - 0.7).abs() < 1e-15);
        assert!((crossover_param(0.5, 0.9, SelectionMode::Pareto, 3.0, 1.0) - 0.6).abs() < 1e-15);
        assert!((crossover_param(0.5, 0.9, SelectionMode::NFittest, 0.0, 0.0) - 0.7).abs() < 1e-15);
        assert_eq!(crossover_param(0.5, 0.9, SelectionMode::NFittest, 0.2, f64::INFINITY), 0.5);
        assert_eq!(crossover_param(0.5, 0.9, SelectionMode::NFittest, f64::INFINITY, 0.2), 0.9);
    }

    #[test]
    fn offspring_clone_parent_state() {
        let parent = unit(4, 0.7, 0.1, 2, 1);
        let child = spawn_offspring(&parent, 0.66, 3, 10, 1);
        assert_eq!(child.trend, parent.trend);
        assert_eq!(child.periodicity, parent.periodicity);
        assert_eq!(child.composer, parent.composer);
        assert!(!child.trained && child.validation_loss.is_none());
        assert_eq!((child.id, child.generation_born, child.period), (10, 3, 0.66));
    }

    #[test]
    fn breeding_takes_fitter_ancestor_and_stays_between_parents() {
        let pop = Population {
            units: vec![unit(0, 0.5, 0.4, 0, 0), unit(1, 0.7, 0.2, 0, 1), unit(2, 0.9, 0.1, 0, 2)],
            generation: 0,
        };
        let kids = breed(&pop, &[1], SelectionMode::NFittest, &[], 1);
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0].root_ancestor, 1);
        assert_eq!(kids[1].root_ancestor, 2);
        assert!(kids[0].period > 0.5 && kids[0].period < 0.7);
        assert!(kids[1].period > 0.7 && kids[1].period < 0.9);
        assert_eq!((kids[0].id, kids[1].id), (3, 4));
        let edge = breed(&pop, &[0], SelectionMode::NFittest, &[], 1);
        assert_eq!(edge.len(), 1);
    }

    #[test]
    fn best_unit_prefers_younger() {
        let pop = Population { units: vec![unit(0, 0.5, 0.2, 0, 0), unit(1, 0.6, 0.2, 2, 0), unit(2, 0.7, 0.3, 3, 0)], generation: 3 };
        assert_eq!(best_unit(&pop).unwrap().id, 1);
        let single = Population { units: vec![unit(5, 0.5, 0.9, 0, 5)], generation: 0 };
        assert_eq!(best_unit(&single).unwrap().id, 5);
    }

    fn sine_data(tau: f64, n: usize) -> Vec<(f64, f64)> {
        let half = 5.0 * tau;
        (0..n).map(|i| {
            let x = -half + 2.0 * half * (i as f64 + 0.5) / n as f64;
            (x, (2.0 * std::f64::consts::PI * x / tau).sin())
        })
        .collect()
    }

    fn small_cfg() -> PbtConfig {
        PbtConfig {
            root_count: 4,
            reproducers: 3,
            diversity_floor: 2,
            max_generations: 2,
            hidden_width: 12,
            train: TrainConfig { max_epochs: 15, patience: 3, ..TrainConfig::default() },
            ..PbtConfig::default()
        }
    }

    #[test]
    fn zero_generations_returns_trained_roots() {
        let cfg = PbtConfig { max_generations: 0, ..small_cfg() };
        let pop = evolve(&sine_data(0.75, 200), &cfg, SelectionMode::NFittest, 1).unwrap();
        assert_eq!(pop.units.len(), 4);
        assert!(pop.units.iter().all(|u| u.trained && u.validation_loss.is_some()));
    }

    #[test]
    fn threshold_stops_at_generation_zero() {
        let cfg = PbtConfig { fitness_threshold: 1e9, ..small_cfg() };
        let pop = evolve(&sine_data(0.75, 200), &cfg, SelectionMode::Pareto, 1).unwrap();
        assert_eq!(pop.generation, 0);
    }

    #[test]
    fn evolution_is_deterministic_and_contained() {
        let data = sine_data(0.75, 200);
        for mode in [SelectionMode::NFittest, SelectionMode::Pareto] {
            let a = evolve(&data, &small_cfg(), mode, 7).unwrap();
            let b = evolve(&data, &small_cfg(), mode, 7).unwrap();
            assert_eq!(a, b);
            assert!(a.units.len() > 4);
            assert!(a.units.iter().all(|u| u.period >= 0.5 && u.period <= 1.0 && u.trained));
            let roots: BTreeSet<usize> = (0..4).collect();
            assert!(a.units.iter().all(|u| roots.contains(&u.root_ancestor)));
        }
    }

    #[test]
    fn training_again_is_a_no_op() {
        let data = sine_data(0.75, 100);
        let cfg = small_cfg();
        let mut pop = init_roots(&cfg, 2).unwrap();
        train_untrained(&mut pop, &data, &cfg, 2).unwrap();
        let before = pop.clone();
        train_untrained(&mut pop, &data, &cfg, 2).unwrap();
        assert_eq!(pop, before);
    }
}
