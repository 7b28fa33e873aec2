use std::ffi::{c_void, CStr, CString};
use std::process::Command;
use std::ptr;

use perigen_ffi::*;

fn last_error() -> String {
    let p = pg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn variant(skeleton: &str, seed: u64) -> *mut PgVariant {
    let s = CString::new(skeleton).unwrap();
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { pg_variant_generate(s.as_ptr(), false, seed, 2, 4, &mut v) }, PgStatus::Ok);
    v
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(pg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn variant_values_are_periodic_and_bounded() {
    let v = variant("(* sin square)", 4);
    let mut tau = 0.0;
    assert_eq!(unsafe { pg_variant_master_period(v, &mut tau) }, PgStatus::Ok);
    assert!((0.5..=1.0).contains(&tau));
    let xs: Vec<f64> = (0..50).map(|i| -1.3 + 0.071 * i as f64).collect();
    let shifted: Vec<f64> = xs.iter().map(|x| x + tau).collect();
    let (mut a, mut b) = (vec![0.0; 50], vec![0.0; 50]);
    unsafe {
        assert_eq!(pg_variant_values(v, xs.as_ptr(), 50, a.as_mut_ptr()), PgStatus::Ok);
        assert_eq!(pg_variant_values(v, shifted.as_ptr(), 50, b.as_mut_ptr()), PgStatus::Ok);
        pg_variant_free(v);
    }
    for (p, q) in a.iter().zip(&b) {
        assert!(p.abs() <= 1.0 + 1e-12);
        assert!((p - q).abs() < 1e-9);
    }
}

#[test]
fn errors_map_to_codes_and_messages() {
    let mut v = ptr::null_mut();
    let bad = CString::new("(+ sin").unwrap();
    unsafe {
        assert_eq!(pg_variant_generate(ptr::null(), false, 0, 2, 4, &mut v), PgStatus::NullArgument);
        assert!(last_error().contains("skeleton"));
        assert_eq!(pg_variant_generate(bad.as_ptr(), false, 0, 2, 4, &mut v), PgStatus::Parse);
        let ok = CString::new("sin").unwrap();
        assert_eq!(pg_variant_generate(ok.as_ptr(), false, 0, 4, 4, &mut v), PgStatus::Config);
        assert!(v.is_null());
        assert_eq!(pg_variant_generate(ok.as_ptr(), false, 0, 2, 4, &mut v), PgStatus::Ok);
        assert!(pg_last_error().is_null());
        let missing = CString::new("/nonexistent/model.json").unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(pg_model_load(missing.as_ptr(), &mut m), PgStatus::Io);
        let gru = CString::new("gru").unwrap();
        let adam = CString::new("adam").unwrap();
        assert_eq!(pg_model_train(v, gru.as_ptr(), adam.as_ptr(), 0.0, 10, 1, &mut m), PgStatus::Parse);
        pg_variant_free(v);
        pg_variant_free(ptr::null_mut());
        pg_model_free(ptr::null_mut());
    }
}

#[test]
fn train_save_load_predict_evaluate() {
    let v = variant("sin", 11);
    let relu = CString::new("x+sin").unwrap();
    let adam = CString::new("adam").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.json").to_str().unwrap()).unwrap();
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(pg_model_train(v, relu.as_ptr(), adam.as_ptr(), 0.0, 20, 3, &mut m), PgStatus::Ok);
        assert_eq!(pg_model_save(m, path.as_ptr()), PgStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(pg_model_load(path.as_ptr(), &mut back), PgStatus::Ok);
        let xs = [-2.0, 0.1, 3.7];
        let (mut a, mut b) = ([0.0; 3], [0.0; 3]);
        assert_eq!(pg_model_predict(m, xs.as_ptr(), 3, a.as_mut_ptr()), PgStatus::Ok);
        assert_eq!(pg_model_predict(back, xs.as_ptr(), 3, b.as_mut_ptr()), PgStatus::Ok);
        assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
        let mut row = PgMetricRow::default();
        assert_eq!(pg_evaluate(back, v, 20, &mut row), PgStatus::Ok);
        assert!(row.mse.is_finite() && row.spda <= row.da + 1e-12);
        assert_eq!(pg_evaluate(back, v, 20, ptr::null_mut()), PgStatus::NullArgument);
        pg_model_free(m);
        pg_model_free(back);
        pg_variant_free(v);
    }
}

unsafe extern "C" fn collect(record: *const PgRecord, user: *mut c_void) {
    let seen = &mut *(user as *mut Vec<(String, f64)>);
    let r = &*record;
    seen.push((CStr::from_ptr(r.model).to_string_lossy().into_owned(), r.metrics.mse));
}

#[test]
fn experiment_callback_sees_every_record() {
    let config = CString::new(
        r#"
        variants = 1
        repeats = 2
        rate = 20
        hidden_width = 8
        forms = ["sin"]
        models = ["sin", "snake"]
        optimizers = ["adam", "sgd"]
        [train]
        max_epochs = 3
        "#,
    )
    .unwrap();
    let mut seen: Vec<(String, f64)> = Vec::new();
    let mut summary = ptr::null_mut();
    let status = unsafe {
        pg_run_experiment(config.as_ptr(), Some(collect), &mut seen as *mut _ as *mut c_void, &mut summary)
    };
    assert_eq!(status, PgStatus::Ok);
    assert_eq!(seen.len(), 2 * 2 * 2);
    assert!(seen.iter().all(|(_, mse)| mse.is_finite()));
    let md = unsafe { CStr::from_ptr(summary) }.to_str().unwrap().to_string();
    assert!(md.starts_with("| model | MSE |") && md.contains("| snake |"));
    unsafe { pg_string_free(summary) };

    let bad = CString::new("bogus = 1").unwrap();
    assert_eq!(unsafe { pg_run_experiment(bad.as_ptr(), None, ptr::null_mut(), ptr::null_mut()) }, PgStatus::Config);
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "perigen.h"
static void on_record(const PgRecord *r, void *u) { (void)r; (void)u; }
int main(void) {
    PgVariant *v = NULL;
    PgModel *m = NULL;
    PgMetricRow row;
    PgStatus s = pg_variant_generate("sin", false, 1, 5, 10, &v);
    if (s == PG_STATUS_OK) s = pg_model_train(v, "snake", "adam", 0.0, 100, 1, &m);
    if (s == PG_STATUS_OK) s = pg_evaluate(m, v, 100, &row);
    if (s != PG_STATUS_OK) { const char *e = pg_last_error(); (void)e; }
    pg_run_experiment(NULL, on_record, NULL, NULL);
    pg_model_free(m);
    pg_variant_free(v);
    return (int)s;
}
"#,
    )
    .unwrap();
    for (compiler, extra) in [("cc", vec!["-std=c99"]), ("c++", vec!["-x", "c++"])] {
        let out = Command::new(compiler)
            .args(&extra)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I", include])
            .arg(&src)
            .output();
        match out {
            Ok(o) => assert!(o.status.success(), "{compiler}: {}", String::from_utf8_lossy(&o.stderr)),
            Err(e) => panic!("{compiler} unavailable: {e}"),
        }
    }
}
