//! C interface to `maxmin-core`.
//!
//! Instances are loaded from the JSON file format into an opaque
//! [`MaxminInstance`] handle. Every fallible call returns one of the
//! `MAXMIN_*` status codes and writes its result through an out pointer;
//! strings returned this way are owned by the caller and must be released
//! with [`maxmin_string_free`]. The message of the most recent failure on
//! the calling thread is available from [`maxmin_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use maxmin_core::configlp;
use maxmin_core::exact;
use maxmin_core::format;
use maxmin_core::{greedy, Error, Instance, TieBreakPolicy, Value};
use serde_json::json;

pub const MAXMIN_OK: i32 = 0;
/// A required pointer argument was null.
pub const MAXMIN_ERR_NULL: i32 = 1;
/// Malformed input or an out-of-range parameter.
pub const MAXMIN_ERR_USAGE: i32 = 2;
pub const MAXMIN_ERR_UNSUPPORTED: i32 = 3;
/// Enumeration budget or size limit exceeded.
pub const MAXMIN_ERR_RESOURCE: i32 = 4;
/// Certificate verification failed or the LP is infeasible.
pub const MAXMIN_ERR_VERIFICATION: i32 = 5;
/// The library panicked; this is a bug.
pub const MAXMIN_ERR_INTERNAL: i32 = 6;

/// Opaque instance handle.
pub struct MaxminInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_of(e: &Error) -> i32 {
    match e.exit_code() {
        3 => MAXMIN_ERR_UNSUPPORTED,
        4 => MAXMIN_ERR_RESOURCE,
        5 => MAXMIN_ERR_VERIFICATION,
        _ => MAXMIN_ERR_USAGE,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MAXMIN_OK,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            MAXMIN_ERR_NULL
        }
        Ok(Err(Failure::Lib(e))) => {
            let code = code_of(&e);
            set_error(e.to_string());
            code
        }
        Err(_) => {
            set_error("internal error".into());
            MAXMIN_ERR_INTERNAL
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::Parse(format!("{what} is not valid UTF-8"))))
}

unsafe fn handle<'a>(p: *const MaxminInstance) -> Result<&'a Instance, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or(Failure::Null("instance"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = CString::new(s).expect("no interior nul").into_raw();
    Ok(())
}

fn parse_value(s: &str, what: &str) -> Result<Value, Failure> {
    s.parse::<Value>()
        .map_err(|_| Failure::Lib(Error::Usage(format!("{what} must be a rational p/q, got {s:?}"))))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn maxmin_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn maxmin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn maxmin_instance_from_json(json: *const c_char, out: *mut *mut MaxminInstance) -> i32 {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let inner = format::read_instance(text)?;
        *out = Box::into_raw(Box::new(MaxminInstance { inner }));
        Ok(())
    })
}

/// # Safety
/// `inst` must be null or a handle from [`maxmin_instance_from_json`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn maxmin_instance_free(inst: *mut MaxminInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of items, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn maxmin_instance_items(inst: *const MaxminInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.items())
}

/// Number of players, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn maxmin_instance_players(inst: *const MaxminInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.players())
}

/// Re-serializes the instance in canonical form.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn maxmin_instance_to_json(inst: *const MaxminInstance, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let inst = handle(inst)?;
        write_string(out, format::write_instance(inst))
    })
}

fn allocation_doc(inst: &Instance, a: &maxmin_core::Allocation) -> serde_json::Value {
    json!({
        "bundles": format::allocation_to_json(inst, a.bundles()),
        "values": a.values(inst).iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    })
}

/// Approximate allocation with lexicographic tie-breaking. Writes a JSON
/// document with `min`, `threshold`, `guessed_opt` and `allocation`.
///
/// # Safety
/// `inst` must be a live handle, `alpha` a nul-terminated rational such as
/// `"2/5"`, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn maxmin_solve_approx(
    inst: *const MaxminInstance,
    alpha: *const c_char,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let inst = handle(inst)?;
        let alpha = parse_value(read_str(alpha, "alpha")?, "alpha")?;
        let r = greedy::solve_approx(inst, &alpha, &TieBreakPolicy::Lexicographic)?;
        let doc = json!({
            "min": r.achieved_min.to_string(),
            "threshold": r.threshold.to_string(),
            "guessed_opt": r.guessed_opt.to_string(),
            "allocation": allocation_doc(inst, &r.allocation),
        });
        write_string(out, doc.to_string())
    })
}

/// Exact optimum. A `budget` of 0 selects the default node budget. Writes a
/// JSON document with `opt` and `allocation`.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn maxmin_opt(inst: *const MaxminInstance, budget: u64, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let inst = handle(inst)?;
        let budget = if budget == 0 { exact::default_budget() } else { budget };
        let (opt, a) = exact::opt_maxmin_with_budget(inst, budget)?;
        let doc = json!({"opt": opt.to_string(), "allocation": allocation_doc(inst, &a)});
        write_string(out, doc.to_string())
    })
}

/// Optimum of the configuration LP, as a rational string.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn maxmin_lp_opt(inst: *const MaxminInstance, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let inst = handle(inst)?;
        write_string(out, configlp::lp_opt(inst)?.to_string())
    })
}

/// Builds and verifies a dual certificate. `theorem` is 3 for instances
/// without matroids and 8 for instances with matroids. Writes a JSON
/// document with `threshold`, `y` (by item label) and `sum`.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn maxmin_certify(inst: *const MaxminInstance, theorem: i32, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let inst = handle(inst)?;
        let cert = match theorem {
            3 => configlp::build_certificate_thm3(inst)?,
            8 => configlp::build_certificate_thm8(inst)?,
            t => return Err(Error::Usage(format!("theorem must be 3 or 8, got {t}")).into()),
        };
        let y: serde_json::Map<String, serde_json::Value> = cert
            .y
            .iter()
            .enumerate()
            .map(|(j, v)| (inst.label(j).to_string(), json!(v.to_string())))
            .collect();
        let doc = json!({
            "threshold": cert.threshold.to_string(),
            "y": y,
            "sum": cert.sum().to_string(),
        });
        write_string(out, doc.to_string())
    })
}
