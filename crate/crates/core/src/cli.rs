//! Command-line front end. [`run`] parses arguments, dispatches a command and
//! maps the outcome to an exit code: 0 on success, 1 on usage errors, 2 on
//! runtime failures.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    aggregate, build_suite, read_records, render_report, run_experiment_with, with_jobs, write_records, ExperimentSpec,
    RunRecord, Scenario, TrainedModel,
};
use crate::drift::{recovered_fraction, single_neuron_drift, write_drift_histograms, SingleNeuronDrift};
use crate::metrics::Predictor;
use crate::pbt::{read_log, write_log};
use crate::plot::{population_svg, prediction_svg};
use crate::signals::Manifest;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "perigen", version, about = "Periodic-extrapolation benchmarks, trainers and metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a benchmark suite manifest.
    Gen(GenArgs),
    /// Train and score every roster cell, writing one record per cell.
    Run(RunArgs),
    /// Aggregate a records file into summary tables.
    Report(ReportArgs),
    /// Plot a variant's truth curve against saved checkpoints.
    Plot(PlotArgs),
    /// Single snake neuron frequency-drift protocol; writes histogram data.
    Snakedrift(DriftArgs),
    /// Plot an evolution log.
    Popplot(PopplotArgs),
}

/// Experiment settings shared by `gen` and `run`. Flags override the config file.
#[derive(Debug, Clone, Args)]
pub struct SuiteArgs {
    /// Experiment config file (TOML); omitted fields keep their defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// noiseless, noisy, noisy:<variance> or trend.
    #[arg(long)]
    pub scenario: Option<Scenario>,
    /// Include tangent waveforms in the enumerated forms.
    #[arg(long)]
    pub include_tangent: bool,
    /// Resample training noise every epoch.
    #[arg(long)]
    pub per_epoch_noise: bool,
}

impl SuiteArgs {
    pub fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::load(path)?,
            None => ExperimentSpec::default(),
        };
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(scenario) = self.scenario {
            spec.scenario = scenario;
        }
        spec.include_tangent |= self.include_tangent;
        spec.per_epoch_noise |= self.per_epoch_noise;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
    /// Output manifest (JSON); stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
    /// Use this manifest instead of generating the suite.
    #[arg(long, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    /// Output records (CSV); stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker bound for the sweep.
    #[arg(long, env = "PERIGEN_JOBS")]
    pub jobs: Option<usize>,
    /// Directory for model checkpoints and evolution logs.
    #[arg(long, value_name = "DIR")]
    pub artifacts: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Records file written by `run`.
    #[arg(long, value_name = "PATH")]
    pub records: PathBuf,
    /// Directory for summary.md and summary.csv; the markdown goes to stdout
    /// when omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, value_name = "PATH")]
    pub manifest: PathBuf,
    /// Manifest entry id.
    #[arg(long)]
    pub variant: usize,
    /// Checkpoint to overlay; repeatable. Curves are labelled by file stem.
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Vec<PathBuf>,
    /// Samples per period.
    #[arg(long, default_value_t = 100)]
    pub rate: usize,
    /// Output SVG; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DriftArgs {
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Histogram bins over the initial frequency range.
    #[arg(long, default_value_t = 12)]
    pub bins: usize,
    /// Worker bound.
    #[arg(long, env = "PERIGEN_JOBS")]
    pub jobs: Option<usize>,
    /// Output histogram (CSV); stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PopplotArgs {
    /// Evolution log (CSV).
    #[arg(long, value_name = "PATH")]
    pub log: PathBuf,
    /// Output SVG; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// File stem used for a cell's checkpoint and log.
pub fn artifact_stem(r: &RunRecord) -> String {
    format!("v{}-{}-{}-r{}", r.variant_id, r.model, r.optimizer, r.repeat)
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn gen(args: &GenArgs, stdout: &mut dyn Write) -> Result<()> {
    let manifest = build_suite(&args.suite.spec()?)?;
    let mut buf = Vec::new();
    manifest.write(&mut buf)?;
    emit(args.out.as_deref(), stdout, &buf)
}

fn save_artifacts(dir: &Path, record: &RunRecord, trained: &crate::bench::Trained) -> Result<()> {
    let stem = artifact_stem(record);
    trained.model.write_json(BufWriter::new(File::create(dir.join(format!("{stem}.json")))?))?;
    if let Some(pop) = &trained.population {
        write_log(pop, BufWriter::new(File::create(dir.join(format!("{stem}.log.csv")))?))?;
    }
    Ok(())
}

fn run_cmd(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let spec = args.suite.spec()?;
    let manifest = match &args.manifest {
        Some(path) => Manifest::read(BufReader::new(File::open(path)?))?,
        None => build_suite(&spec)?,
    };
    if let Some(dir) = &args.artifacts {
        fs::create_dir_all(dir)?;
    }
    let artifact_errors = std::sync::Mutex::new(Vec::new());
    let records = with_jobs(args.jobs, || {
        run_experiment_with(&spec, &manifest, |record, trained| {
            if let (Some(dir), Some(t)) = (&args.artifacts, trained) {
                if let Err(e) = save_artifacts(dir, record, t) {
                    artifact_errors.lock().unwrap_or_else(|p| p.into_inner()).push(e.to_string());
                }
            }
        })
    })??;
    let errors = artifact_errors.into_inner().unwrap_or_else(|p| p.into_inner());
    if let Some(first) = errors.first() {
        return Err(Error::config(format!("writing artifacts failed: {first}")));
    }
    let failed = records.iter().filter(|r| r.failed).count();
    if failed > 0 {
        writeln!(stderr, "{failed} of {} cells failed", records.len())?;
    }
    let mut buf = Vec::new();
    write_records(&records, &mut buf)?;
    emit(args.out.as_deref(), stdout, &buf)
}

fn report(args: &ReportArgs, stdout: &mut dyn Write) -> Result<()> {
    let records = read_records(BufReader::new(File::open(&args.records)?))?;
    if records.is_empty() {
        return Err(Error::parse(format!("{} holds no records", args.records.display())));
    }
    let (md, csv) = render_report(&aggregate(&records))?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("summary.md"), &md)?;
            fs::write(dir.join("summary.csv"), &csv)?;
        }
        None => stdout.write_all(md.as_bytes())?,
    }
    Ok(())
}

fn plot(args: &PlotArgs, stdout: &mut dyn Write) -> Result<()> {
    let manifest = Manifest::read(BufReader::new(File::open(&args.manifest)?))?;
    let entry = manifest
        .entries
        .iter()
        .find(|e| e.id == args.variant)
        .ok_or_else(|| Error::config(format!("manifest has no variant {}", args.variant)))?;
    let domain = entry.variant.domain(manifest.train_periods, manifest.eval_periods)?;
    let mut models = Vec::new();
    for path in &args.checkpoint {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        models.push((name, TrainedModel::read_json(BufReader::new(File::open(path)?))?));
    }
    let predictors: Vec<(&str, &dyn Predictor)> = models.iter().map(|(n, m)| (n.as_str(), m as &dyn Predictor)).collect();
    let svg = prediction_svg(&entry.variant, &predictors, &domain, args.rate);
    emit(args.out.as_deref(), stdout, svg.as_bytes())
}

fn snakedrift(args: &DriftArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    if args.bins == 0 {
        return Err(Error::config("bins must be positive"));
    }
    let cfg = SingleNeuronDrift { runs: args.runs, ..SingleNeuronDrift::default() };
    let runs = with_jobs(args.jobs, || single_neuron_drift(&cfg, args.seed))??;
    let mut buf = Vec::new();
    write_drift_histograms(&runs, args.bins, &mut buf)?;
    writeln!(
        stderr,
        "{:.1}% of runs ended with |a - {}| < {}",
        100.0 * recovered_fraction(&runs, cfg.target_frequency, cfg.tolerance),
        cfg.target_frequency,
        cfg.tolerance
    )?;
    emit(args.out.as_deref(), stdout, &buf)
}

fn popplot(args: &PopplotArgs, stdout: &mut dyn Write) -> Result<()> {
    let records = read_log(BufReader::new(File::open(&args.log)?))?;
    emit(args.out.as_deref(), stdout, population_svg(&records).as_bytes())
}

pub fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => gen(a, stdout),
        Command::Run(a) => run_cmd(a, stdout, stderr),
        Command::Report(a) => report(a, stdout),
        Command::Plot(a) => plot(a, stdout),
        Command::Snakedrift(a) => snakedrift(a, stdout, stderr),
        Command::Popplot(a) => popplot(a, stdout),
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                return 1;
            }
            let _ = stdout.write_all(text.as_bytes());
            return 0;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

/// Entry point of the `perigen` binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = io::stdout().flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("perigen").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        let (code, _, err) = call(&["gen", "--bogus"]);
        assert_eq!(code, 1);
        assert!(err.contains("--bogus"));
        assert_eq!(call(&["frobnicate"]).0, 1);
        assert_eq!(call(&["gen", "--scenario", "loud"]).0, 1);
        assert_eq!(call(&[]).0, 1);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("snakedrift"));
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("exp.toml");
        fs::write(&cfg, "seed = 3\nvariants = 2\nscenario = \"trend\"\n").unwrap();
        let args = SuiteArgs {
            config: Some(cfg),
            seed: Some(9),
            scenario: None,
            include_tangent: true,
            per_epoch_noise: false,
        };
        let spec = args.spec().unwrap();
        assert_eq!((spec.seed, spec.variants, spec.scenario, spec.include_tangent), (9, 2, Scenario::Trend, true));
    }

    #[test]
    fn missing_config_is_a_runtime_failure() {
        let (code, _, err) = call(&["gen", "--config", "/nonexistent/exp.toml"]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error:"));
    }
}
