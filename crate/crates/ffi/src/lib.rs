//! C ABI over the `padiflow` core.
//!
//! Objects cross the boundary as opaque handles (`PadiflowField`,
//! `PadiflowOde`) built from JSON and freed by the caller. Every call returns
//! a [`PadiflowStatus`]; on failure the message is kept per thread and read
//! back with [`padiflow_last_error`]. Results that are not a single number
//! come back as NUL-terminated JSON, released with [`padiflow_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use padiflow::charp::{closure_at, Closure};
use padiflow::exactnum::OddPrime;
use padiflow::foliation::{blowup_chart, classify_singularity, separatrix_series, Chart, VectorField, Which};
use padiflow::ode::{find_k1, solve_direct, solve_newton, OdeProblem};
use padiflow::size::{aanalyticity_budget, BudgetParams};
use padiflow::Error;

/// Result code of every call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadiflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    HypothesisViolated = 5,
    PreconditionViolated = 6,
    BadReduction = 7,
    InsufficientBudget = 8,
    Undecided = 9,
    /// A Rust panic was caught at the boundary.
    Panic = 10,
}

impl From<&Error> for PadiflowStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => PadiflowStatus::InvalidArgument,
            Error::HypothesisViolated { .. } => PadiflowStatus::HypothesisViolated,
            Error::PreconditionViolated(_) => PadiflowStatus::PreconditionViolated,
            Error::BadReduction { .. } => PadiflowStatus::BadReduction,
            Error::InsufficientBudget { .. } => PadiflowStatus::InsufficientBudget,
            Error::Undecided { .. } => PadiflowStatus::Undecided,
            Error::Parse(_) => PadiflowStatus::Parse,
        }
    }
}

/// Outcome of the p-closure test at one prime.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadiflowClosure {
    Closed = 0,
    NotClosed = 1,
    BadReduction = 2,
}

/// A planar polynomial vector field.
pub struct PadiflowField(VectorField);

/// An ODE instance `x y' + alpha y = a + b y + sum c_m y^m` with its radius.
pub struct PadiflowOde(OdeProblem);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(PadiflowStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(PadiflowStatus::from(&e), e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

/// Runs `f`, translating errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Res<()>) -> PadiflowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PadiflowStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PadiflowStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PadiflowStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Res<&'a str> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(PadiflowStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(h: *const T, what: &str) -> Res<&'a T> {
    h.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Res<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_json(out: *mut *mut c_char, value: serde_json::Value) -> Res<()> {
    let s = CString::new(value.to_string()).expect("JSON has no NUL bytes");
    write_out(out, s.into_raw())
}

fn parse_error(e: serde_json::Error) -> Failure {
    Failure(PadiflowStatus::Parse, format!("parse error: {e}"))
}

macro_rules! to_value {
    ($v:expr) => {
        serde_json::to_value($v).expect("report types serialize")
    };
}

fn odd_prime(p: u64) -> Res<OddPrime> {
    Ok(OddPrime::new(p)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn padiflow_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL if none failed yet.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn padiflow_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn padiflow_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a field from `{"P": [[[i, j], "q"], ...], "Q": [...]}`.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_field_from_json(json: *const c_char, out: *mut *mut PadiflowField) -> PadiflowStatus {
    guard(|| {
        let v: VectorField = serde_json::from_str(read_str(json, "json")?).map_err(parse_error)?;
        write_out(out, Box::into_raw(Box::new(PadiflowField(v))))
    })
}

/// # Safety
/// `field` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn padiflow_field_free(field: *mut PadiflowField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// The field back as JSON.
///
/// # Safety
/// `field` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_field_to_json(field: *const PadiflowField, out_json: *mut *mut c_char) -> PadiflowStatus {
    guard(|| {
        let f = handle(field, "field")?;
        write_json(out_json, to_value!(&f.0))
    })
}

/// Singularity class at the origin, as JSON.
///
/// # Safety
/// `field` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_field_classify(field: *const PadiflowField, out_json: *mut *mut c_char) -> PadiflowStatus {
    guard(|| {
        let f = handle(field, "field")?;
        write_json(out_json, to_value!(&classify_singularity(&f.0)?))
    })
}

/// Separatrix `x_which = phi(x_other)` through order `order`, as a series
/// JSON object. `which` is 1 or 2; the field must be `x1 d1 + (lambda x2 + ...) d2`.
///
/// # Safety
/// `field` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_field_separatrix(
    field: *const PadiflowField,
    which: u8,
    order: usize,
    out_json: *mut *mut c_char,
) -> PadiflowStatus {
    guard(|| {
        let f = handle(field, "field")?;
        let which = Which::try_from(which)?;
        write_json(out_json, to_value!(&separatrix_series(&f.0, which, order)?))
    })
}

/// Strict transform in blow-up chart 1 or 2, as a new handle.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_field_blowup(field: *const PadiflowField, chart: u8, out: *mut *mut PadiflowField) -> PadiflowStatus {
    guard(|| {
        let f = handle(field, "field")?;
        let b = blowup_chart(&f.0, Chart::try_from(chart)?)?;
        write_out(out, Box::into_raw(Box::new(PadiflowField(b))))
    })
}

/// Whether the reduction mod `p` is closed under `p`-th powers.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_field_p_closed(field: *const PadiflowField, p: u64, out: *mut PadiflowClosure) -> PadiflowStatus {
    guard(|| {
        let f = handle(field, "field")?;
        let c = match closure_at(&f.0, odd_prime(p)?)? {
            Closure::Closed => PadiflowClosure::Closed,
            Closure::NotClosed => PadiflowClosure::NotClosed,
            Closure::BadReduction => PadiflowClosure::BadReduction,
        };
        write_out(out, c)
    })
}

/// Builds an ODE instance from `{"a", "b"?, "c"?, "s", "t", "p", "logr"?}`.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_ode_from_json(json: *const c_char, out: *mut *mut PadiflowOde) -> PadiflowStatus {
    guard(|| {
        let prob: OdeProblem = serde_json::from_str(read_str(json, "json")?).map_err(parse_error)?;
        write_out(out, Box::into_raw(Box::new(PadiflowOde(prob))))
    })
}

/// # Safety
/// `ode` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn padiflow_ode_free(ode: *mut PadiflowOde) {
    if !ode.is_null() {
        drop(Box::from_raw(ode));
    }
}

/// Coefficient-recursion solution through `order`, as a series JSON object.
///
/// # Safety
/// `ode` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_ode_solve_direct(ode: *const PadiflowOde, order: usize, out_json: *mut *mut c_char) -> PadiflowStatus {
    guard(|| {
        let o = handle(ode, "ode")?;
        write_json(out_json, to_value!(&solve_direct(&o.0, order)?))
    })
}

/// Newton solution with its radius ledger: `{"y": ..., "ledger": ...}`.
/// Fails with `HYPOTHESIS_VIOLATED` when the norm hypotheses do not hold.
///
/// # Safety
/// `ode` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_ode_solve_newton(ode: *const PadiflowOde, order: usize, out_json: *mut *mut c_char) -> PadiflowStatus {
    guard(|| {
        let o = handle(ode, "ode")?;
        write_json(out_json, to_value!(&solve_newton(&o.0, order)?))
    })
}

/// Smallest `k` with `(k + 1) / 2^k <= 1/p^2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_find_k1(p: u64, out: *mut u32) -> PadiflowStatus {
    guard(|| write_out(out, find_k1(odd_prime(p)?)))
}

/// Partial sum over primes up to `p_max` and tail enclosure, as JSON, with
/// the default constant.
///
/// # Safety
/// `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn padiflow_budget(s: u64, t: u64, p_max: u64, out_json: *mut *mut c_char) -> PadiflowStatus {
    guard(|| {
        let b = aanalyticity_budget(&BudgetParams::new(s, t), p_max)?;
        write_json(out_json, to_value!(&b))
    })
}
