use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use blie_ffi::*;

fn last_error() -> String {
    let p = blie_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn instance(json: &str, seed: u64) -> *mut BlieInstance {
    let json = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { blie_instance_new(json.as_ptr(), seed, &mut out) }, BlieStatus::Ok);
    assert!(!out.is_null());
    out
}

fn run(inst: *const BlieInstance, algo: &str, budget: u64, seed: u64) -> Result<*mut BlieTrace, BlieStatus> {
    let algo = CString::new(algo).unwrap();
    let mut out = ptr::null_mut();
    match unsafe { blie_run(inst, algo.as_ptr(), budget, seed, 1, &mut out) } {
        BlieStatus::Ok => Ok(out),
        status => {
            assert!(out.is_null());
            Err(status)
        }
    }
}

#[test]
fn runs_blie_through_handles() {
    let inst = instance(r#"{"kind":"toy","variant":"mu1","d":2,"sigma":0.1}"#, 9);
    assert_eq!(unsafe { blie_instance_dim(inst) }, 2);
    let trace = run(inst, r#"{"name":"blie"}"#, 1 << 14, 9).unwrap();
    unsafe {
        assert!(blie_trace_total_spent(trace) <= 1 << 14);
        assert!(blie_trace_batch_count(trace) >= 1);
        assert!(blie_trace_best_loss(trace).is_finite());
        let mut regret = f64::NAN;
        assert_eq!(blie_trace_simple_regret(trace, &mut regret), BlieStatus::Ok);
        assert!((0.0..1.0).contains(&regret));

        assert_eq!(blie_trace_output(trace, ptr::null_mut(), 0), 2);
        let mut point = [f64::NAN; 2];
        assert_eq!(blie_trace_output(trace, point.as_mut_ptr(), 2), 2);
        assert!(point.iter().all(|v| (0.0..=1.0).contains(v)));

        let mut json = ptr::null_mut();
        assert_eq!(blie_trace_to_json(trace, &mut json), BlieStatus::Ok);
        let parsed: blie::RunTrace = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(parsed.output, point.to_vec());
        assert_eq!(parsed.simple_regret, Some(regret));
        blie_string_free(json);
        blie_trace_free(trace);
        blie_instance_free(inst);
    }
}

#[test]
fn matches_the_rust_api() {
    let inst = instance(r#"{"kind":"toy","variant":"mu1","d":2}"#, 4);
    let trace = run(inst, r#"{"name":"hyperband","eta":3}"#, 1 << 12, 4).unwrap();
    let native = {
        let descriptor = blie::InstanceDescriptor::parse(r#"{"kind":"toy","variant":"mu1","d":2}"#).unwrap();
        let instance = descriptor.build(4).unwrap();
        let algo = blie::AlgorithmConfig::from_name("hyperband").unwrap();
        blie::run_algorithm(&algo, &instance, 1 << 12, 4, 1).unwrap()
    };
    unsafe {
        assert_eq!(blie_trace_total_spent(trace), native.total_spent);
        assert_eq!(blie_trace_best_loss(trace), native.best_loss);
        blie_trace_free(trace);
        blie_instance_free(inst);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let bad = CString::new(r#"{"kind":"nope"}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { blie_instance_new(bad.as_ptr(), 0, &mut out) }, BlieStatus::Config);
    assert!(out.is_null());
    assert!(last_error().contains("instance descriptor"));

    assert_eq!(unsafe { blie_instance_new(ptr::null(), 0, &mut out) }, BlieStatus::NullPointer);
    let invalid_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { blie_instance_new(invalid_utf8.as_ptr().cast(), 0, &mut out) },
        BlieStatus::InvalidUtf8
    );

    let inst = instance(r#"{"kind":"toy","variant":"mu1","d":3}"#, 0);
    assert_eq!(run(inst, r#"{"name":"blie"}"#, 10, 0).unwrap_err(), BlieStatus::BudgetTooSmall);
    assert!(last_error().contains("budget too small"));
    assert_eq!(run(inst, r#"{"name":"simplex"}"#, 1 << 10, 0).unwrap_err(), BlieStatus::Config);
    assert_eq!(run(ptr::null(), r#"{"name":"blie"}"#, 1 << 10, 0).unwrap_err(), BlieStatus::NullPointer);
    unsafe { blie_instance_free(inst) };
}

#[test]
fn adversary_instance_reports_regret() {
    let inst = instance(r#"{"kind":"adversary","d":1,"budget":4096,"level":2}"#, 0);
    let trace = run(inst, r#"{"name":"uniform"}"#, 4096, 0).unwrap();
    let mut regret = 0.0;
    assert_eq!(unsafe { blie_trace_simple_regret(trace, &mut regret) }, BlieStatus::Ok);
    unsafe {
        assert_eq!(blie_trace_simple_regret(ptr::null(), &mut regret), BlieStatus::NullPointer);
        blie_trace_free(trace);
        blie_instance_free(inst);
    }
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        blie_instance_free(ptr::null_mut());
        blie_trace_free(ptr::null_mut());
        blie_string_free(ptr::null_mut());
        assert_eq!(blie_instance_dim(ptr::null()), 0);
        assert_eq!(blie_trace_output(ptr::null(), ptr::null_mut(), 0), 0);
        assert!(blie_trace_best_loss(ptr::null()).is_nan());
    }
    let version = unsafe { CStr::from_ptr(blie_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header_path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/blie.h");
    let header = std::fs::read_to_string(header_path).unwrap();
    for symbol in [
        "blie_instance_new",
        "blie_instance_free",
        "blie_run",
        "blie_trace_free",
        "blie_trace_to_json",
        "blie_string_free",
        "blie_last_error",
        "typedef struct BlieTrace BlieTrace",
        "BLIE_STATUS_BUDGET_TOO_SMALL = 5",
    ] {
        assert!(header.contains(symbol), "header lacks {symbol}");
    }
    // Syntax-check with the system C compiler when one is installed.
    match Command::new("cc").args(["-fsyntax-only", "-x", "c", header_path]).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; skipped header compile check"),
    }
}
