//! C ABI for perigen.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every fallible call returns a [`PgStatus`];
//! on failure [`pg_last_error`] describes the problem for the calling thread.
//! Panics never unwind into C: they are caught and reported as
//! `PG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use perigen::bench::{aggregate, build_suite, run_experiment, train_model, ExperimentSpec, ModelKind, TrainedModel};
use perigen::metrics::{evaluate_variant, MetricConfig, MetricRow, Predictor};
use perigen::nets::OptimizerKind;
use perigen::signals::{generate_variant, sample_dataset, CoeffRange, DomainTag, SignalVariant, TrendKind};
use perigen::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Config = 3,
    Parse = 4,
    Io = 5,
    Numeric = 6,
    Panic = 7,
}

/// A generated benchmark signal together with its domain sizes.
pub struct PgVariant {
    variant: SignalVariant,
    train_periods: u32,
    eval_periods: u32,
}

/// A trained predictor: a feedforward net or a population unit.
pub struct PgModel {
    model: TrainedModel,
}

/// Metric values of one evaluation; warp fields hold the chosen correction.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PgMetricRow {
    pub mse: f64,
    pub da: f64,
    pub shda: f64,
    pub spda: f64,
    pub acda: f64,
    pub sh_w: f64,
    pub sp_w: f64,
    pub ac_w: f64,
}

impl From<MetricRow> for PgMetricRow {
    fn from(r: MetricRow) -> Self {
        PgMetricRow { mse: r.mse, da: r.da, shda: r.shda, spda: r.spda, acda: r.acda, sh_w: r.sh_w, sp_w: r.sp_w, ac_w: r.ac_w }
    }
}

/// One finished sweep cell as seen by a [`PgRecordCallback`]. The strings are
/// only valid during the callback.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PgRecord {
    pub variant_id: usize,
    pub form_id: usize,
    pub repeat: usize,
    pub model: *const c_char,
    pub optimizer: *const c_char,
    pub failed: bool,
    pub wall_time: f64,
    pub metrics: PgMetricRow,
}

/// Receives each record of [`pg_run_experiment`] in roster order.
pub type PgRecordCallback = Option<unsafe extern "C" fn(record: *const PgRecord, user_data: *mut c_void)>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

enum Fail {
    Null(&'static str),
    Invalid(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn status_of(e: &Error) -> PgStatus {
    match e {
        Error::Config(_) | Error::DimensionMismatch { .. } | Error::InsufficientDiversity { .. } => PgStatus::Config,
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) => PgStatus::Parse,
        Error::Io(_) => PgStatus::Io,
        _ => PgStatus::Numeric,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PgStatus::Ok,
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("argument `{name}` is null"));
            PgStatus::NullArgument
        }
        Ok(Err(Fail::Invalid(msg))) => {
            set_error(msg);
            PgStatus::InvalidArgument
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PgStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Invalid(format!("`{name}` is not UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn put<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn slices<'a>(xs: *const f64, ys: *mut f64, n: usize) -> Result<(&'a [f64], &'a mut [f64]), Fail> {
    if n == 0 {
        return Ok((&[], &mut []));
    }
    if xs.is_null() {
        return Err(Fail::Null("xs"));
    }
    if ys.is_null() {
        return Err(Fail::Null("ys"));
    }
    Ok((std::slice::from_raw_parts(xs, n), std::slice::from_raw_parts_mut(ys, n)))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn pg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Generates a normalized variant of `skeleton` (e.g. `"(* sin square)"`),
/// optionally offset by a linear trend.
///
/// # Safety
/// `skeleton` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pg_variant_generate(
    skeleton: *const c_char,
    linear_trend: bool,
    seed: u64,
    train_periods: u32,
    eval_periods: u32,
    out: *mut *mut PgVariant,
) -> PgStatus {
    guard(|| {
        let form = text(skeleton, "skeleton")?.parse()?;
        let trend = linear_trend.then_some(TrendKind::Linear);
        let variant = generate_variant(&form, trend, seed, &CoeffRange::default(), train_periods, eval_periods)?;
        put(out, boxed(PgVariant { variant, train_periods, eval_periods }), "out")
    })
}

/// # Safety
/// `variant` must come from this library and not be freed twice; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn pg_variant_free(variant: *mut PgVariant) {
    if !variant.is_null() {
        drop(Box::from_raw(variant));
    }
}

/// # Safety
/// `variant` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pg_variant_master_period(variant: *const PgVariant, out: *mut f64) -> PgStatus {
    guard(|| put(out, get(variant, "variant")?.variant.master_period, "out"))
}

/// Noiseless signal values at `n` points.
///
/// # Safety
/// `xs` and `ys` must hold `n` elements each.
#[no_mangle]
pub unsafe extern "C" fn pg_variant_values(variant: *const PgVariant, xs: *const f64, n: usize, ys: *mut f64) -> PgStatus {
    guard(|| {
        let v = &get(variant, "variant")?.variant;
        let (xs, ys) = slices(xs, ys, n)?;
        for (y, &x) in ys.iter_mut().zip(xs) {
            *y = v.value(x);
        }
        Ok(())
    })
}

/// Trains a roster model (`"snake"`, `"n-fittest"`, ...) on `rate` samples
/// per period of the variant's training domain with noise variance
/// `noise_variance`. Feedforward models use `optimizer` (`"adam"`, ...);
/// population models always use their configured unit optimizer.
///
/// # Safety
/// String arguments must be NUL-terminated, `variant` live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pg_model_train(
    variant: *const PgVariant,
    model: *const c_char,
    optimizer: *const c_char,
    noise_variance: f64,
    rate: usize,
    seed: u64,
    out: *mut *mut PgModel,
) -> PgStatus {
    guard(|| {
        let v = get(variant, "variant")?;
        let kind: ModelKind = text(model, "model")?.parse()?;
        let opt: OptimizerKind = text(optimizer, "optimizer")?.parse()?;
        if rate == 0 || !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Fail::Invalid("need rate > 0 and a finite noise variance >= 0".into()));
        }
        let spec = ExperimentSpec { train_periods: v.train_periods, eval_periods: v.eval_periods, rate, ..ExperimentSpec::default() };
        let domain = v.variant.domain(v.train_periods, v.eval_periods)?;
        let data = sample_dataset(&v.variant, &domain, rate, DomainTag::Training, noise_variance, seed)?.points;
        let trained = train_model(kind, &spec, &v.variant, &data, opt, seed)?;
        put(out, boxed(PgModel { model: trained.model }), "out")
    })
}

/// Loads a JSON checkpoint written by the `run` command or [`pg_model_save`].
///
/// # Safety
/// `path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pg_model_load(path: *const c_char, out: *mut *mut PgModel) -> PgStatus {
    guard(|| {
        let file = std::fs::File::open(Path::new(text(path, "path")?)).map_err(Error::from)?;
        let model = TrainedModel::read_json(std::io::BufReader::new(file))?;
        put(out, boxed(PgModel { model }), "out")
    })
}

/// # Safety
/// `model` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pg_model_save(model: *const PgModel, path: *const c_char) -> PgStatus {
    guard(|| {
        let m = get(model, "model")?;
        let file = std::fs::File::create(Path::new(text(path, "path")?)).map_err(Error::from)?;
        Ok(m.model.write_json(std::io::BufWriter::new(file))?)
    })
}

/// # Safety
/// `xs` and `ys` must hold `n` elements each.
#[no_mangle]
pub unsafe extern "C" fn pg_model_predict(model: *const PgModel, xs: *const f64, n: usize, ys: *mut f64) -> PgStatus {
    guard(|| {
        let m = &get(model, "model")?.model;
        let (xs, ys) = slices(xs, ys, n)?;
        for (y, &x) in ys.iter_mut().zip(xs) {
            *y = m.predict(x);
        }
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library and not be freed twice; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn pg_model_free(model: *mut PgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Scores `model` on the variant's evaluation grid with the default metric
/// settings.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pg_evaluate(
    model: *const PgModel,
    variant: *const PgVariant,
    rate: usize,
    out: *mut PgMetricRow,
) -> PgStatus {
    guard(|| {
        let m = &get(model, "model")?.model;
        let v = get(variant, "variant")?;
        if rate == 0 {
            return Err(Fail::Invalid("rate must be positive".into()));
        }
        let domain = v.variant.domain(v.train_periods, v.eval_periods)?;
        let row = evaluate_variant(m, &v.variant, &domain, rate, &MetricConfig::for_domain(&domain))?;
        put(out, row.into(), "out")
    })
}

/// Runs the sweep described by `config_toml` (null or empty for defaults),
/// calls `callback` once per record in roster order and writes the markdown
/// summary table to `summary` (release it with [`pg_string_free`]) when
/// `summary` is not null.
///
/// # Safety
/// `config_toml` must be null or NUL-terminated; `callback` must be safe to
/// call with `user_data`.
#[no_mangle]
pub unsafe extern "C" fn pg_run_experiment(
    config_toml: *const c_char,
    callback: PgRecordCallback,
    user_data: *mut c_void,
    summary: *mut *mut c_char,
) -> PgStatus {
    guard(|| {
        let spec = if config_toml.is_null() {
            ExperimentSpec::default()
        } else {
            ExperimentSpec::from_toml(text(config_toml, "config_toml")?)?
        };
        let manifest = build_suite(&spec)?;
        let records = run_experiment(&spec, &manifest)?;
        if let Some(cb) = callback {
            for r in &records {
                let model = CString::new(r.model.as_str()).unwrap_or_default();
                let optimizer = CString::new(r.optimizer.as_str()).unwrap_or_default();
                let rec = PgRecord {
                    variant_id: r.variant_id,
                    form_id: r.form_id,
                    repeat: r.repeat,
                    model: model.as_ptr(),
                    optimizer: optimizer.as_ptr(),
                    failed: r.failed,
                    wall_time: r.wall_time,
                    metrics: PgMetricRow {
                        mse: r.mse,
                        da: r.da,
                        shda: r.shda,
                        spda: r.spda,
                        acda: r.acda,
                        sh_w: r.sh_w,
                        sp_w: r.sp_w,
                        ac_w: r.ac_w,
                    },
                };
                cb(&rec, user_data);
            }
        }
        if !summary.is_null() {
            let md = perigen::bench::render_markdown(&aggregate(&records));
            summary.write(CString::new(md).unwrap_or_default().into_raw());
        }
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn pg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
