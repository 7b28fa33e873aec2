//! Degradation-aware evaluation metrics.
//!
//! Every metric averages a point metric over the evaluation grid. The
//! distance-adjusted (DA) variant weighs each point by
//! `(|x - e_T| / d_T)^α`, where `e_T` is the training endpoint on the same side
//! as `x` and `d_T` the training diameter. The warped variants query the
//! predictor at a corrected argument and minimize over a correction `w` on an
//! odd, symmetric grid over `[-ε, ε]`:
//!
//! | warp | queried argument |
//! |------|------------------|
//! | shift (SH) | `x + sign(x) w k(x)` |
//! | speedup (SP) | `x (1 + w)` |
//! | acceleration (AC) | `x (1 + w k(x))` |
//!
//! with `k(x) = floor(|x - e_T| / τ)` the number of whole periods between `x`
//! and the training domain. All three warps point away from the training
//! domain on both branches.

use serde::{Deserialize, Serialize};

use crate::signals::{evaluation_grid, Domain, SignalVariant};
use crate::{Error, Result};

/// Anything evaluable at an arbitrary real argument.
pub trait Predictor {
    fn predict(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Predictor for F {
    fn predict(&self, x: f64) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointMetric {
    Mse,
    Mae,
}

pub fn point_metric(kind: PointMetric, y: f64, y_hat: f64) -> f64 {
    match kind {
        PointMetric::Mse => (y - y_hat).powi(2),
        PointMetric::Mae => (y - y_hat).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Warp {
    Shift,
    Speedup,
    Acceleration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub point_metric: PointMetric,
    pub epsilon: f64,
    /// Odd, so that `w = 0` is on the grid.
    pub grid_samples: usize,
    pub alpha: f64,
    /// Distance from the origin to either training endpoint, `n_T τ`.
    pub train_endpoint: f64,
    pub tau: f64,
    pub train_diameter: f64,
}

impl MetricConfig {
    /// Defaults (MSE, ε = 0.05, 21 samples, α = 1) for `domain`.
    pub fn for_domain(domain: &Domain) -> Self {
        MetricConfig {
            point_metric: PointMetric::Mse,
            epsilon: 0.05,
            grid_samples: 21,
            alpha: 1.0,
            train_endpoint: domain.train_half_width(),
            tau: domain.tau,
            train_diameter: domain.training_diameter(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_samples % 2 == 0 {
            return Err(Error::config("grid_samples must be odd"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be positive"));
        }
        if !(self.alpha >= 1.0) {
            return Err(Error::config("alpha must be at least 1"));
        }
        if !(self.tau > 0.0 && self.train_diameter > 0.0) {
            return Err(Error::config("tau and the training diameter must be positive"));
        }
        Ok(())
    }

    /// Correction values `(i - h) ε / h` for `i = 0..2h`; the centre is exactly 0.
    pub fn warp_grid(&self) -> Vec<f64> {
        let half = (self.grid_samples / 2) as f64;
        if half == 0.0 {
            return vec![0.0];
        }
        let step = self.epsilon / half;
        (0..self.grid_samples).map(|i| (i as f64 - half) * step).collect()
    }

    fn distance(&self, x: f64) -> f64 {
        (x.abs() - self.train_endpoint).abs()
    }

    fn whole_periods(&self, x: f64) -> f64 {
        (self.distance(x) / self.tau).floor()
    }
}

/// Weighs `m_value` by `(|x - e_T| / d_T)^α`.
pub fn distance_adjust(m_value: f64, x: f64, cfg: &MetricConfig) -> f64 {
    m_value * (cfg.distance(x) / cfg.train_diameter).powf(cfg.alpha)
}

/// The argument at which the predictor is queried for point `x`.
pub fn warp_argument(kind: Warp, x: f64, w: f64, cfg: &MetricConfig) -> f64 {
    match kind {
        Warp::Shift => x + x.signum() * w * cfg.whole_periods(x),
        Warp::Speedup => x * (1.0 + w),
        Warp::Acceleration => x * (1.0 + w * cfg.whole_periods(x)),
    }
}

fn checked(p: &impl Predictor, x: f64) -> Result<f64> {
    let v = p.predict(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinitePrediction { x })
    }
}

fn mean_da(points: &[(f64, f64)], cfg: &MetricConfig, mut query: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mut sum = 0.0;
    for &(x, y) in points {
        sum += distance_adjust(point_metric(cfg.point_metric, y, query(x)?), x, cfg);
    }
    Ok(sum / points.len() as f64)
}

/// Distance-adjusted metric minimized over the warp grid. Returns the minimum
/// and its `w`; ties go to the `w` of smallest magnitude.
pub fn warped_metric(
    kind: Warp,
    predictor: &impl Predictor,
    points: &[(f64, f64)],
    cfg: &MetricConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(Error::config("no evaluation points"));
    }
    let mut grid = cfg.warp_grid();
    grid.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    let mut best = (f64::INFINITY, 0.0);
    for w in grid {
        let v = mean_da(points, cfg, |x| checked(predictor, warp_argument(kind, x, w, cfg)))?;
        if v < best.0 {
            best = (v, w);
        }
    }
    Ok(best)
}

/// One table row: plain MSE, DA-m and the three warped DA-m values with their
/// minimizing corrections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub mse: f64,
    pub da: f64,
    pub shda: f64,
    pub spda: f64,
    pub acda: f64,
    pub sh_w: f64,
    pub sp_w: f64,
    pub ac_w: f64,
}

impl MetricRow {
    pub const COLUMNS: [&'static str; 5] = ["MSE", "DA-", "SHDA-", "SPDA-", "ACDA-"];

    pub fn values(&self) -> [f64; 5] {
        [self.mse, self.da, self.shda, self.spda, self.acda]
    }
}

/// Scores `predictor` against `(x, y)` evaluation points.
pub fn evaluate_model(predictor: &impl Predictor, points: &[(f64, f64)], cfg: &MetricConfig) -> Result<MetricRow> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(Error::config("no evaluation points"));
    }
    let mut se = 0.0;
    for &(x, y) in points {
        se += (y - checked(predictor, x)?).powi(2);
    }
    let da = mean_da(points, cfg, |x| checked(predictor, x))?;
    let (shda, sh_w) = warped_metric(Warp::Shift, predictor, points, cfg)?;
    let (spda, sp_w) = warped_metric(Warp::Speedup, predictor, points, cfg)?;
    let (acda, ac_w) = warped_metric(Warp::Acceleration, predictor, points, cfg)?;
    Ok(MetricRow { mse: se / points.len() as f64, da, shda, spda, acda, sh_w, sp_w, ac_w })
}

/// Scores `predictor` on the regular evaluation grid of `variant`.
pub fn evaluate_variant(
    predictor: &impl Predictor,
    variant: &SignalVariant,
    domain: &Domain,
    rate: usize,
    cfg: &MetricConfig,
) -> Result<MetricRow> {
    let points: Vec<(f64, f64)> = evaluation_grid(domain, rate).into_iter().map(|x| (x, variant.value(x))).collect();
    evaluate_model(predictor, &points, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> MetricConfig {
        MetricConfig::for_domain(&Domain::new(5, 10, 0.8).unwrap())
    }

    #[test]
    fn point_metrics() {
        assert_eq!(point_metric(PointMetric::Mse, 1.0, 1.0), 0.0);
        assert_eq!(point_metric(PointMetric::Mse, 0.0, 2.0), 4.0);
        assert_eq!(point_metric(PointMetric::Mae, -1.0, 2.0), 3.0);
    }

    #[test]
    fn distance_weights() {
        let c = cfg();
        // e_T = 4, d_T = 8
        assert_eq!(distance_adjust(1.0, 12.0, &c), 1.0);
        assert_eq!(distance_adjust(1.0, -12.0, &c), 1.0);
        assert_eq!(distance_adjust(3.0, 4.0, &c), 0.0);
        let c2 = MetricConfig { alpha: 2.0, ..c };
        assert_eq!(distance_adjust(1.0, 8.0, &c2), 0.25);
        assert_eq!(distance_adjust(1.0, -8.0, &c2), 0.25);
    }

    #[test]
    fn grid_has_exact_zero_and_step() {
        let g = cfg().warp_grid();
        assert_eq!(g.len(), 21);
        assert_eq!(g[10], 0.0);
        assert_eq!(g[0], -0.05);
        assert_eq!(g[20], 0.05);
        assert_eq!(g[14], 0.02);
        for w in g.windows(2) {
            assert!((w[1] - w[0] - 0.005).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(MetricConfig { grid_samples: 20, ..cfg() }.validate().is_err());
        assert!(MetricConfig { alpha: 0.5, ..cfg() }.validate().is_err());
        assert!(MetricConfig { epsilon: 0.0, ..cfg() }.validate().is_err());
    }

    #[test]
    fn warps_point_outward() {
        let c = cfg();
        for x in [5.0, 9.0, -5.0, -9.0] {
            for kind in [Warp::Shift, Warp::Speedup, Warp::Acceleration] {
                let moved = warp_argument(kind, x, 0.02, &c);
                assert!(moved.abs() >= x.abs(), "{kind:?} {x}");
                assert_eq!(warp_argument(kind, x, 0.0, &c), x);
            }
        }
        // k(x) = floor((9 - 4) / 0.8) = 6
        assert!((warp_argument(Warp::Shift, -9.0, 0.01, &c) + 9.06).abs() < 1e-12);
    }

    #[test]
    fn perfect_predictor_scores_zero() {
        let c = cfg();
        let f = |x: f64| (x * 2.0).sin() * 0.7;
        let points: Vec<(f64, f64)> = (0..200).map(|i| 4.05 + i as f64 * 0.02).map(|x| (x, f(x))).collect();
        let row = evaluate_model(&f, &points, &c).unwrap();
        assert_eq!(row.values(), [0.0; 5]);
        assert_eq!((row.sh_w, row.sp_w, row.ac_w), (0.0, 0.0, 0.0));
    }

    #[test]
    fn non_finite_predictions_fail() {
        let c = cfg();
        let points = vec![(5.0, 0.0), (6.0, 1.0)];
        let bad = |x: f64| if x > 5.5 { f64::NAN } else { 0.0 };
        assert!(matches!(evaluate_model(&bad, &points, &c), Err(Error::NonFinitePrediction { .. })));
    }
}
