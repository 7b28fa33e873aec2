use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::form::{ElementaryForm, ElementaryKind, FormExpr, FormSkeleton, TrendForm};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Training and evaluation windows measured in master periods.
///
/// Training covers `(-n_T τ, n_T τ)`; evaluation covers
/// `(-n_E τ, n_E τ)` minus the training window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub train_periods: u32,
    pub eval_periods: u32,
    pub tau: f64,
}

impl Domain {
    pub fn new(train_periods: u32, eval_periods: u32, tau: f64) -> Result<Self> {
        if train_periods == 0 || eval_periods <= train_periods {
            return Err(Error::config(format!(
                "need 0 < n_T < n_E, got n_T = {train_periods}, n_E = {eval_periods}"
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::config(format!("master period must be positive, got {tau}")));
        }
        Ok(Domain { train_periods, eval_periods, tau })
    }

    pub fn train_half_width(&self) -> f64 {
        self.train_periods as f64 * self.tau
    }

    pub fn eval_half_width(&self) -> f64 {
        self.eval_periods as f64 * self.tau
    }

    /// Diameter of the training window, `2 n_T τ`.
    pub fn training_diameter(&self) -> f64 {
        2.0 * self.train_half_width()
    }

    /// The training endpoint on the same side as `x`.
    pub fn nearest_training_endpoint(&self, x: f64) -> f64 {
        if x < 0.0 {
            -self.train_half_width()
        } else {
            self.train_half_width()
        }
    }

    pub fn in_training(&self, x: f64) -> bool {
        x.abs() < self.train_half_width()
    }

    pub fn in_evaluation(&self, x: f64) -> bool {
        x.abs() < self.eval_half_width() && !self.in_training(x)
    }
}

/// Ranges coefficients are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoeffRange {
    pub amplitude: (f64, f64),
    pub phase: (f64, f64),
    pub master_period: (f64, f64),
    /// Component periods are `τ / k` with `k` uniform on `1..=max_harmonic`.
    pub max_harmonic: u32,
}

impl Default for CoeffRange {
    fn default() -> Self {
        CoeffRange { amplitude: (0.2, 1.0), phase: (0.0, 1.0), master_period: (0.5, 1.0), max_harmonic: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    Linear,
    Polynomial { order: u32 },
    Exponential,
}

/// Tangent values are clamped to this magnitude when tangents are enabled.
pub const TANGENT_LIMIT: f64 = 10.0;

const GENERATION_ATTEMPTS: usize = 16;
const SUP_GRID_PER_PERIOD: usize = 2048;

/// A concrete benchmark signal: `(periodic(x) + trend(x)) / normalization`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalVariant {
    #[serde(with = "form_text")]
    pub periodic: FormExpr,
    pub trend: Option<TrendForm>,
    pub master_period: f64,
    pub normalization: f64,
    pub noise_variance: f64,
    pub seed: u64,
}

mod form_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::FormExpr;

    pub fn serialize<S: Serializer>(form: &FormExpr, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&form.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FormExpr, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl SignalVariant {
    fn raw_periodic(&self, x: f64) -> f64 {
        if self.periodic.contains_tangent() {
            self.periodic.eval_clamped(x, TANGENT_LIMIT)
        } else {
            // Only tangents can fail; they are excluded above.
            self.periodic.eval(x).unwrap_or(f64::NAN)
        }
    }

    fn raw_value(&self, x: f64) -> f64 {
        let trend = match &self.trend {
            Some(t) => t.eval(x).unwrap_or(f64::INFINITY),
            None => 0.0,
        };
        self.raw_periodic(x) + trend
    }

    /// Normalized periodic component; τ-periodic.
    pub fn periodic_value(&self, x: f64) -> f64 {
        self.raw_periodic(x) / self.normalization
    }

    /// Normalized noiseless signal value.
    pub fn value(&self, x: f64) -> f64 {
        self.raw_value(x) / self.normalization
    }

    pub fn domain(&self, train_periods: u32, eval_periods: u32) -> Result<Domain> {
        Domain::new(train_periods, eval_periods, self.master_period)
    }

    pub fn with_noise(mut self, variance: f64) -> Self {
        self.noise_variance = variance;
        self
    }
}

/// Largest |f| on `[a, b]`: dense grid followed by golden-section refinement
/// around every grid-local maximum.
fn sup_abs(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + i as f64 * h }).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x).abs()).collect();
    let mut best = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return best;
    }
    for i in 0..=n {
        let left = if i > 0 { vs[i - 1] } else { f64::NEG_INFINITY };
        let right = if i < n { vs[i + 1] } else { f64::NEG_INFINITY };
        if vs[i] < left || vs[i] < right {
            continue;
        }
        let (mut lo, mut hi) = (xs[i.saturating_sub(1)], xs[(i + 1).min(n)]);
        let g = |x: f64| f(x).abs();
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - r * (hi - lo);
        let mut d = lo + r * (hi - lo);
        let (mut fc, mut fd) = (g(c), g(d));
        for _ in 0..80 {
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - r * (hi - lo);
                fc = g(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + r * (hi - lo);
                fd = g(d);
            }
            best = best.max(fc).max(fd);
        }
    }
    best
}

/// Draws coefficients for `skeleton` (and optionally a trend), fixes every
/// component period to `τ / k` so the periodic part has period exactly τ, and
/// normalizes so the largest |value| over the evaluation domain is 1.
pub fn generate_variant(
    skeleton: &FormSkeleton,
    trend: Option<TrendKind>,
    seed: u64,
    coeffs: &CoeffRange,
    train_periods: u32,
    eval_periods: u32,
) -> Result<SignalVariant> {
    if eval_periods <= train_periods || train_periods == 0 {
        return Err(Error::config("need 0 < n_T < n_E"));
    }
    let mut rng = rng_from_seed(seed);
    let uniform = |rng: &mut crate::rng::Rng, (lo, hi): (f64, f64)| {
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    };
    for _ in 0..GENERATION_ATTEMPTS {
        let tau = uniform(&mut rng, coeffs.master_period);
        let mut fill = |kind: ElementaryKind| {
            let k = rng.random_range(1..=coeffs.max_harmonic.max(1));
            let phase = uniform(&mut rng, coeffs.phase);
            let amplitude = uniform(&mut rng, coeffs.amplitude);
            ElementaryForm { kind, period: tau / k as f64, phase, amplitude }
        };
        let periodic = skeleton.instantiate(&mut fill);
        let eval_extent = eval_periods as f64 * tau;
        let trend_form = trend.map(|kind| {
            let mut signed = |scale: f64| {
                let magnitude = uniform(&mut rng, coeffs.amplitude) * scale;
                if rng.random_bool(0.5) {
                    magnitude
                } else {
                    -magnitude
                }
            };
            match kind {
                TrendKind::Linear => TrendForm::Polynomial { coefficients: vec![signed(1.0), signed(1.0)] },
                TrendKind::Polynomial { order } => TrendForm::Polynomial {
                    coefficients: (0..=order)
                        .map(|k| signed(if k >= 2 { eval_extent.powi(1 - k as i32) } else { 1.0 }))
                        .collect(),
                },
                TrendKind::Exponential => {
                    let c0 = signed(1.0);
                    TrendForm::Exponential { c0, c1: signed(1.0 / eval_extent) }
                }
            }
        });
        let mut variant = SignalVariant {
            periodic,
            trend: trend_form,
            master_period: tau,
            normalization: 1.0,
            noise_variance: 0.0,
            seed,
        };
        let raw = |x: f64| variant.raw_value(x);
        let sup = if variant.trend.is_none() {
            // D_E consists of whole periods, so one period suffices.
            sup_abs(&raw, 0.0, tau, SUP_GRID_PER_PERIOD)
        } else {
            let inner = train_periods as f64 * tau;
            let n = SUP_GRID_PER_PERIOD * (eval_periods - train_periods) as usize;
            sup_abs(&raw, inner, eval_extent, n).max(sup_abs(&raw, -eval_extent, -inner, n))
        };
        if sup.is_finite() && sup > 0.0 {
            variant.normalization = sup;
            return Ok(variant);
        }
    }
    Err(Error::UnboundedVariant { attempts: GENERATION_ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn skeleton(s: &str) -> FormSkeleton {
        s.parse().unwrap()
    }

    #[test]
    fn domain_geometry() {
        let d = Domain::new(5, 10, 0.8).unwrap();
        assert!((d.training_diameter() - 8.0).abs() < 1e-12);
        assert_eq!(d.nearest_training_endpoint(-6.0), -4.0);
        assert_eq!(d.nearest_training_endpoint(6.0), 4.0);
        assert!(d.in_training(3.9) && !d.in_evaluation(3.9));
        assert!(d.in_evaluation(-4.1) && !d.in_training(-4.1));
        assert!(!d.in_evaluation(8.0));
        assert!(Domain::new(5, 5, 0.8).is_err());
        assert!(Domain::new(0, 5, 0.8).is_err());
    }

    #[test]
    fn variants_are_tau_periodic() {
        let mut rng = rng_from_seed(3);
        for (i, s) in ["sin", "(+ sin square)", "(* (+ saw sin) poly2)", "(* (* square sin) saw)"].iter().enumerate() {
            let v = generate_variant(&skeleton(s), None, 100 + i as u64, &CoeffRange::default(), 5, 10).unwrap();
            assert!((0.5..1.0).contains(&v.master_period));
            for _ in 0..1000 {
                let x = rng.random_range(-20.0..20.0);
                let d = (v.periodic_value(x + v.master_period) - v.periodic_value(x)).abs();
                assert!(d < 1e-9, "{s} at {x}: {d}");
            }
        }
    }

    #[test]
    fn normalization_reaches_one() {
        for (i, s) in ["sin", "(+ sin sin)", "(* sin poly3)", "saw", "(+ square saw)"].iter().enumerate() {
            let v = generate_variant(&skeleton(s), None, 7 + i as u64, &CoeffRange::default(), 5, 10).unwrap();
            let tau = v.master_period;
            let n = 2_000_000;
            let max = (0..n)
                .map(|j| v.value(5.0 * tau + tau * j as f64 / n as f64).abs())
                .fold(0.0, f64::max);
            assert!(max <= 1.0 + 1e-9, "{s}: {max}");
            assert!(max >= 1.0 - 1e-6, "{s}: {max}");
        }
    }

    #[test]
    fn trend_variants_normalized_over_evaluation_domain() {
        let v = generate_variant(&skeleton("(+ sin square)"), Some(TrendKind::Linear), 5, &CoeffRange::default(), 5, 10)
            .unwrap();
        let d = v.domain(5, 10).unwrap();
        match &v.trend {
            Some(TrendForm::Polynomial { coefficients }) => assert_eq!(coefficients.len(), 2),
            other => panic!("unexpected trend {other:?}"),
        }
        let n = 4_000_000;
        let (lo, hi) = (d.train_half_width(), d.eval_half_width());
        let max = (0..=n)
            .flat_map(|j| {
                let x = lo + (hi - lo) * j as f64 / n as f64;
                [v.value(x).abs(), v.value(-x).abs()]
            })
            .fold(0.0, f64::max);
        assert!(max <= 1.0 + 1e-9 && max >= 1.0 - 1e-6, "{max}");
    }

    #[test]
    fn same_seed_same_variant() {
        let sk = skeleton("(* (+ sin square) poly2)");
        let a = generate_variant(&sk, Some(TrendKind::Exponential), 11, &CoeffRange::default(), 5, 10).unwrap();
        let b = generate_variant(&sk, Some(TrendKind::Exponential), 11, &CoeffRange::default(), 5, 10).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.normalization.to_bits(), b.normalization.to_bits());
        let c = generate_variant(&sk, Some(TrendKind::Exponential), 12, &CoeffRange::default(), 5, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tangent_variants_are_clamped_and_bounded() {
        let v = generate_variant(&skeleton("(+ tan sin)"), None, 2, &CoeffRange::default(), 5, 10).unwrap();
        for j in 0..10_000 {
            let x = -10.0 + j as f64 * 0.002;
            assert!(v.value(x).abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn serde_round_trip_is_lossless() {
        let v = generate_variant(&skeleton("(+ (* sin saw) poly2)"), Some(TrendKind::Linear), 9, &CoeffRange::default(), 5, 10)
            .unwrap()
            .with_noise(0.15);
        let text = serde_json::to_string(&v).unwrap();
        let back: SignalVariant = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }
}
