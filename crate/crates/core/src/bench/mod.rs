//! Experiment harness: scenario suites, model rosters, sweeps and reports.

mod model;
mod report;
mod spec;

use std::time::Instant;

use rayon::prelude::*;

use crate::metrics::{evaluate_model, MetricConfig, MetricRow};
use crate::rng::derive_seed;
use crate::signals::{
    enumerate_skeletons, evaluation_grid, generate_variant, sample_dataset, Combinator, DomainTag, ElementaryKind,
    FormSkeleton, Manifest, ManifestEntry, TrendKind,
};
use crate::{Error, Result};

pub use model::{train_model, ModelKind, Trained, TrainedModel};
pub use report::{
    aggregate, read_records, read_summary_csv, render_markdown, render_report, write_records, write_summary_csv,
    RunRecord, SummaryRow, SummaryTable,
};
pub use spec::{ExperimentSpec, Scenario};

const SUITE_STREAM: u64 = 0x5017;
const DATA_STREAM: u64 = 0xDA7A;
const CELL_STREAM: u64 = 0xCE11;

/// The skeletons a spec draws variants from, in suite order.
pub fn suite_skeletons(spec: &ExperimentSpec) -> Result<Vec<FormSkeleton>> {
    match &spec.forms {
        Some(list) => list.iter().map(|s| s.parse()).collect(),
        None => Ok(enumerate_skeletons(
            &ElementaryKind::benchmark_kinds(spec.include_tangent),
            &[Combinator::Sum, Combinator::Product],
            spec.max_order,
        )),
    }
}

/// `n_v` seeded variants per skeleton. Noiseless and noisy suites under one
/// seed hold the same variants; only the recorded noise variance differs.
pub fn build_suite(spec: &ExperimentSpec) -> Result<Manifest> {
    spec.validate()?;
    let trend = match spec.scenario {
        Scenario::Trend => Some(spec.trend),
        _ => None,
    };
    let noise = spec.scenario.noise_variance();
    let mut entries = Vec::new();
    for (form_id, skeleton) in suite_skeletons(spec)?.iter().enumerate() {
        for k in 0..spec.variants {
            let seed = derive_seed(spec.seed, &[SUITE_STREAM, form_id as u64, k as u64]);
            let variant = generate_variant(skeleton, trend, seed, &spec.coefficients, spec.train_periods, spec.eval_periods)?
                .with_noise(noise);
            entries.push(ManifestEntry { id: entries.len(), form_id, skeleton: skeleton.to_string(), variant });
        }
    }
    Ok(Manifest {
        scenario: spec.scenario.to_string(),
        seed: spec.seed,
        train_periods: spec.train_periods,
        eval_periods: spec.eval_periods,
        coefficients: spec.coefficients,
        entries,
    })
}

/// One roster cell: a (variant, model, optimizer, repeat) combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub entry: usize,
    pub model: ModelKind,
    pub optimizer: usize,
    pub repeat: usize,
}

/// Every cell of the roster in a fixed order. Population models use only the
/// configured unit optimizer.
pub fn roster(spec: &ExperimentSpec, manifest: &Manifest) -> Vec<Cell> {
    let mut cells = Vec::new();
    for entry in 0..manifest.entries.len() {
        for &model in &spec.models {
            let optimizers = if model.is_population() { 1 } else { spec.optimizers.len() };
            for optimizer in 0..optimizers {
                for repeat in 0..spec.repeats {
                    cells.push(Cell { entry, model, optimizer, repeat });
                }
            }
        }
    }
    cells
}

/// Training data for `(entry, repeat)`, shared by every model of that pair.
pub fn training_data(spec: &ExperimentSpec, manifest: &Manifest, entry: usize, repeat: usize) -> Result<Vec<(f64, f64)>> {
    let e = &manifest.entries[entry];
    let domain = e.variant.domain(manifest.train_periods, manifest.eval_periods)?;
    let noise = if spec.per_epoch_noise { 0.0 } else { e.variant.noise_variance };
    let seed = derive_seed(manifest.seed, &[DATA_STREAM, e.id as u64, repeat as u64]);
    Ok(sample_dataset(&e.variant, &domain, spec.rate, DomainTag::Training, noise, seed)?.points)
}

/// Noiseless evaluation points on the regular evaluation grid.
pub fn evaluation_points(spec: &ExperimentSpec, manifest: &Manifest, entry: usize) -> Result<Vec<(f64, f64)>> {
    let v = &manifest.entries[entry].variant;
    let domain = v.domain(manifest.train_periods, manifest.eval_periods)?;
    Ok(evaluation_grid(&domain, spec.rate).into_iter().map(|x| (x, v.value(x))).collect())
}

fn metric_config(spec: &ExperimentSpec, manifest: &Manifest, entry: usize) -> Result<MetricConfig> {
    let domain = manifest.entries[entry].variant.domain(manifest.train_periods, manifest.eval_periods)?;
    Ok(MetricConfig {
        epsilon: spec.epsilon,
        alpha: spec.alpha,
        grid_samples: spec.warp_samples,
        point_metric: spec.point_metric,
        ..MetricConfig::for_domain(&domain)
    })
}

fn cell_seed(manifest: &Manifest, cell: &Cell) -> u64 {
    derive_seed(
        manifest.seed,
        &[CELL_STREAM, manifest.entries[cell.entry].id as u64, cell.model.code(), cell.optimizer as u64, cell.repeat as u64],
    )
}

fn run_cell(spec: &ExperimentSpec, manifest: &Manifest, cell: &Cell) -> (RunRecord, Option<Trained>) {
    let start = Instant::now();
    let e = &manifest.entries[cell.entry];
    let optimizer = if cell.model.is_population() { spec.pbt.optimizer.kind } else { spec.optimizers[cell.optimizer] };
    let outcome = (|| -> Result<(MetricRow, Trained)> {
        let data = training_data(spec, manifest, cell.entry, cell.repeat)?;
        let trained = train_model(cell.model, spec, &e.variant, &data, optimizer, cell_seed(manifest, cell))?;
        let points = evaluation_points(spec, manifest, cell.entry)?;
        let row = evaluate_model(&trained.model, &points, &metric_config(spec, manifest, cell.entry)?)?;
        Ok((row, trained))
    })();
    let mut record = RunRecord {
        scenario: manifest.scenario.clone(),
        form_id: e.form_id,
        skeleton: e.skeleton.clone(),
        variant_id: e.id,
        model: cell.model.name().to_string(),
        optimizer: optimizer.name().to_string(),
        repeat: cell.repeat,
        mse: f64::NAN,
        da: f64::NAN,
        shda: f64::NAN,
        spda: f64::NAN,
        acda: f64::NAN,
        sh_w: f64::NAN,
        sp_w: f64::NAN,
        ac_w: f64::NAN,
        wall_time: 0.0,
        failed: false,
        error: String::new(),
    };
    let model = match outcome {
        Ok((row, model)) => {
            record.set_metrics(&row);
            Some(model)
        }
        Err(err) => {
            record.failed = true;
            record.error = err.to_string();
            None
        }
    };
    record.wall_time = start.elapsed().as_secs_f64();
    (record, model)
}

/// Runs every roster cell and hands each finished cell to `sink`. Failures are
/// recorded, never propagated. Records come back in roster order.
pub fn run_experiment_with(
    spec: &ExperimentSpec,
    manifest: &Manifest,
    sink: impl Fn(&RunRecord, Option<&Trained>) + Sync,
) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    if manifest.entries.is_empty() {
        return Err(Error::config("the suite has no variants"));
    }
    let cells = roster(spec, manifest);
    Ok(cells
        .par_iter()
        .map(|cell| {
            let (record, model) = run_cell(spec, manifest, cell);
            sink(&record, model.as_ref());
            record
        })
        .collect())
}

pub fn run_experiment(spec: &ExperimentSpec, manifest: &Manifest) -> Result<Vec<RunRecord>> {
    run_experiment_with(spec, manifest, |_, _| {})
}

/// Runs `f` on a pool of `jobs` workers; `None` keeps rayon's default.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::config(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

pub(crate) fn trend_kind_default() -> TrendKind {
    TrendKind::Linear
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::{OptimizerKind, TrainConfig};

    fn tiny() -> ExperimentSpec {
        let mut s = ExperimentSpec {
            variants: 2,
            repeats: 2,
            forms: Some(vec!["sin".into(), "(* sin square)".into()]),
            models: vec![ModelKind::Sin, ModelKind::NFittest],
            optimizers: vec![OptimizerKind::Adam, OptimizerKind::Sgd],
            rate: 20,
            hidden_width: 8,
            train: TrainConfig { max_epochs: 3, ..TrainConfig::default() },
            ..ExperimentSpec::default()
        };
        s.pbt.max_generations = 1;
        s.pbt.hidden_width = 6;
        s.pbt.train.max_epochs = 3;
        s
    }

    #[test]
    fn default_suite_counts() {
        let spec = ExperimentSpec { variants: 1, ..ExperimentSpec::default() };
        assert_eq!(suite_skeletons(&spec).unwrap().len(), 4 + 2 * 16 + 4 * 64);
        let with_tan = ExperimentSpec { include_tangent: true, ..spec };
        assert_eq!(suite_skeletons(&with_tan).unwrap().len(), 5 + 50 + 500);
    }

    #[test]
    fn suites_are_deterministic_and_share_variants() {
        let base = tiny();
        let a = build_suite(&base).unwrap();
        assert_eq!(a, build_suite(&base).unwrap());
        assert_eq!(a.entries.len(), 4);
        let noisy = build_suite(&ExperimentSpec { scenario: Scenario::Noisy { variance: 0.15 }, ..tiny() }).unwrap();
        for (x, y) in a.entries.iter().zip(&noisy.entries) {
            assert_eq!(x.variant.periodic, y.variant.periodic);
            assert_eq!(x.variant.normalization, y.variant.normalization);
            assert_eq!(y.variant.noise_variance, 0.15);
        }
        let trend = build_suite(&ExperimentSpec { scenario: Scenario::Trend, ..tiny() }).unwrap();
        for e in &trend.entries {
            assert_eq!(e.variant.trend.as_ref().map(|t| t.order()), Some(1));
        }
    }

    #[test]
    fn roster_arithmetic() {
        let spec = tiny();
        let m = build_suite(&spec).unwrap();
        // 4 variants x (sin: 2 optimizers + n-fittest: 1) x 2 repeats
        assert_eq!(roster(&spec, &m).len(), 4 * 3 * 2);
    }

    #[test]
    fn sweep_is_reproducible_and_complete() {
        let spec = tiny();
        let m = build_suite(&spec).unwrap();
        let a = run_experiment(&spec, &m).unwrap();
        let b = run_experiment(&spec, &m).unwrap();
        assert_eq!(a.len(), roster(&spec, &m).len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.without_timing(), y.without_timing());
        }
        assert!(a.iter().all(|r| !r.failed && r.mse.is_finite()));
        assert!(a.iter().filter(|r| r.model == "n-fittest").all(|r| r.optimizer == "adam"));
    }
}
