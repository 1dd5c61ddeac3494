//! C ABI for the blie optimizer.
//!
//! Objects cross the boundary as opaque handles created and destroyed by
//! this library. Every fallible call returns a [`BlieStatus`]; on failure
//! [`blie_last_error`] describes what went wrong on the calling thread.
//! Strings returned by the library must be released with
//! [`blie_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blie::{AlgorithmConfig, Error, Instance, InstanceDescriptor, RunTrace};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlieStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    BudgetTooSmall = 5,
    ResourceLimit = 6,
    InvalidLoss = 7,
    Evaluator = 8,
    Overflow = 9,
    /// The requested value does not exist (e.g. regret without a known optimum).
    NotAvailable = 10,
    Internal = 11,
    Panic = 12,
}

/// An objective built from a JSON instance descriptor.
pub struct BlieInstance {
    inner: Instance,
}

/// The record of one finished run.
pub struct BlieTrace {
    inner: RunTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> BlieStatus {
    match err {
        Error::InvalidArgument(_) | Error::ConstructionInfeasible(_) | Error::FitFailed(_) => {
            BlieStatus::InvalidArgument
        }
        Error::Config(_) | Error::Json(_) => BlieStatus::Config,
        Error::BudgetTooSmall { .. } => BlieStatus::BudgetTooSmall,
        Error::ResourceLimit { .. } => BlieStatus::ResourceLimit,
        Error::InvalidLoss { .. } => BlieStatus::InvalidLoss,
        Error::Overflow(_) => BlieStatus::Overflow,
        Error::Spawn { .. } | Error::Protocol(_) | Error::Timeout(_) | Error::WorkerExited(_) => {
            BlieStatus::Evaluator
        }
        Error::BatchFailed { source, .. } => status_of(source),
        Error::Io(_) => BlieStatus::Internal,
    }
}

struct Failure(BlieStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BlieStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BlieStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            BlieStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(BlieStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| Failure(BlieStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn blie_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn blie_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds an instance from a JSON descriptor such as
/// `{"kind":"toy","variant":"mu1","d":2,"sigma":0.1}`.
///
/// # Safety
/// `descriptor_json` must be a NUL-terminated string and `out` a valid
/// pointer. On success `*out` owns a handle to free with [`blie_instance_free`].
#[no_mangle]
pub unsafe extern "C" fn blie_instance_new(
    descriptor_json: *const c_char,
    seed: u64,
    out: *mut *mut BlieInstance,
) -> BlieStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let json = read_str(descriptor_json, "descriptor_json")?;
        let inner = InstanceDescriptor::parse(json)?.build(seed)?;
        *out = Box::into_raw(Box::new(BlieInstance { inner }));
        Ok(())
    })
}

/// # Safety
/// `instance` must come from [`blie_instance_new`] and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn blie_instance_free(instance: *mut BlieInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Dimension of the instance, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn blie_instance_dim(instance: *const BlieInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.dim())
}

/// Runs an algorithm, given as JSON (e.g. `{"name":"blie"}` or
/// `{"name":"hyperband","eta":3}`), with total budget `total_budget`.
/// `parallelism = 0` uses every logical core.
///
/// # Safety
/// `instance` must be a live handle, `algorithm_json` a NUL-terminated string
/// and `out` a valid pointer. On success `*out` owns a handle to free with
/// [`blie_trace_free`].
#[no_mangle]
pub unsafe extern "C" fn blie_run(
    instance: *const BlieInstance,
    algorithm_json: *const c_char,
    total_budget: u64,
    seed: u64,
    parallelism: usize,
    out: *mut *mut BlieTrace,
) -> BlieStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let instance = deref(instance, "instance")?;
        let json = read_str(algorithm_json, "algorithm_json")?;
        let algorithm: AlgorithmConfig =
            serde_json::from_str(json).map_err(|e| Failure(BlieStatus::Config, format!("algorithm: {e}")))?;
        let workers = if parallelism == 0 {
            blie::executor::default_parallelism()
        } else {
            parallelism
        };
        let inner = blie::run_algorithm(&algorithm, &instance.inner, total_budget, seed, workers)?;
        *out = Box::into_raw(Box::new(BlieTrace { inner }));
        Ok(())
    })
}

/// # Safety
/// `trace` must come from [`blie_run`] and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn blie_trace_free(trace: *mut BlieTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Budget consumed by the run, or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn blie_trace_total_spent(trace: *const BlieTrace) -> u64 {
    trace.as_ref().map_or(0, |t| t.inner.total_spent)
}

/// Number of executor batches (clean-up included), or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn blie_trace_batch_count(trace: *const BlieTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.batch_count())
}

/// Observed loss of the output arm, or NaN for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn blie_trace_best_loss(trace: *const BlieTrace) -> f64 {
    trace.as_ref().map_or(f64::NAN, |t| t.inner.best_loss)
}

/// Simple regret of the output arm. Returns `NotAvailable` when the
/// instance has no known optimum.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn blie_trace_simple_regret(trace: *const BlieTrace, out: *mut f64) -> BlieStatus {
    guard(|| {
        let trace = deref(trace, "trace")?;
        if out.is_null() {
            return Err(null("out"));
        }
        match trace.inner.simple_regret {
            Some(r) => {
                *out = r;
                Ok(())
            }
            None => Err(Failure(BlieStatus::NotAvailable, "simple regret is unknown for this instance".into())),
        }
    })
}

/// Copies the output arm into `buf` (up to `len` coordinates) and returns
/// its dimension, so a call with `len = 0` queries the size. Returns 0 for
/// a null handle.
///
/// # Safety
/// `trace` must be null or a live handle; `buf` must hold `len` doubles
/// when `len > 0`.
#[no_mangle]
pub unsafe extern "C" fn blie_trace_output(trace: *const BlieTrace, buf: *mut f64, len: usize) -> usize {
    let Some(trace) = trace.as_ref() else {
        return 0;
    };
    let output = &trace.inner.output;
    if !buf.is_null() {
        let n = len.min(output.len());
        ptr::copy_nonoverlapping(output.as_ptr(), buf, n);
    }
    output.len()
}

/// Serializes the full trace as JSON. On success `*out` owns a string to
/// release with [`blie_string_free`].
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn blie_trace_to_json(trace: *const BlieTrace, out: *mut *mut c_char) -> BlieStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let trace = deref(trace, "trace")?;
        let json = serde_json::to_string(&trace.inner).map_err(Error::from)?;
        let json = CString::new(json).map_err(|e| Failure(BlieStatus::Internal, e.to_string()))?;
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn blie_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
