//! C ABI over `lqhv`.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `*_free`. Every function returns an [`LqhvStatus`]; on failure a message
//! is available from [`lqhv_last_error_message`] on the same thread.
//! Strings returned through `out` parameters must be released with
//! [`lqhv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lqhv::io::{self, AnyFamily, AnyMeasure};
use lqhv::{
    build_from_family, check_nonsignaling, lhv_feasible, verify_measure, BuildOptions, Error, ErrorKind, Scalar,
};

/// Result of every call. Values 1 to 3 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqhvStatus {
    Ok = 0,
    /// Malformed or inconsistent input.
    InputError = 1,
    /// A mathematical precondition failed, e.g. the family is signaling.
    PreconditionFailed = 2,
    /// The joint space exceeds the atom budget.
    ResourceExceeded = 3,
    NullArgument = 4,
    /// A Rust panic was caught at the boundary.
    InternalError = 5,
}

/// Default atom budget for [`lqhv_build`] and [`lqhv_lhv_feasible`].
pub const LQHV_DEFAULT_BUDGET: usize = 10_000_000;

/// A distribution family in float or rational mode.
pub struct LqhvFamily(AnyFamily);

/// A signed measure on the joint space.
pub struct LqhvMeasure(AnyMeasure);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(LqhvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Input => LqhvStatus::InputError,
            ErrorKind::Precondition => LqhvStatus::PreconditionFailed,
            ErrorKind::Resource => LqhvStatus::ResourceExceeded,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LqhvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LqhvStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            LqhvStatus::InternalError
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(LqhvStatus::NullArgument, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LqhvStatus::InputError, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(LqhvStatus::InternalError, "string contains NUL".into()))
}

/// Parses a family JSON document. `tol` governs validation in float mode.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqhv_family_from_json(json: *const c_char, tol: f64, out: *mut *mut LqhvFamily) -> LqhvStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let fam = io::parse_family(text, tol, None)?;
        put(out, Box::into_raw(Box::new(LqhvFamily(fam))), "out")
    })
}

/// # Safety
/// `family` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lqhv_family_free(family: *mut LqhvFamily) {
    if !family.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(family))));
    }
}

/// Serializes a family to JSON.
///
/// # Safety
/// `family` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqhv_family_to_json(family: *const LqhvFamily, out: *mut *mut c_char) -> LqhvStatus {
    guard(|| {
        let fam = borrow(family, "family")?;
        let s = to_c_string(fam.0.to_json().to_string())?;
        put(out, s, "out")
    })
}

/// Checks the nonsignaling condition. Returns `PreconditionFailed` when it
/// fails, with the largest discrepancy in `discrepancy` (0 on success).
///
/// # Safety
/// `family` must be a live handle; `discrepancy` may be null.
#[no_mangle]
pub unsafe extern "C" fn lqhv_check_nonsignaling(
    family: *const LqhvFamily,
    tol: f64,
    discrepancy: *mut f64,
) -> LqhvStatus {
    guard(|| {
        let fam = borrow(family, "family")?;
        let res = match &fam.0 {
            AnyFamily::Float(f) => check_nonsignaling(f, tol),
            AnyFamily::Rational(f) => check_nonsignaling(f, tol),
        };
        let gap = res.as_ref().err().map_or(0.0, |w| w.max_discrepancy);
        if !discrepancy.is_null() {
            discrepancy.write(gap);
        }
        res.map_err(|w| Failure(LqhvStatus::PreconditionFailed, w.to_string()))
    })
}

/// Builds the simulating signed measure in the family's arithmetic mode.
///
/// # Safety
/// `family` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqhv_build(
    family: *const LqhvFamily,
    tol: f64,
    budget: usize,
    out: *mut *mut LqhvMeasure,
) -> LqhvStatus {
    guard(|| {
        let fam = borrow(family, "family")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = BuildOptions { budget, tol };
        let m = match &fam.0 {
            AnyFamily::Float(f) => AnyMeasure::Float(build_from_family(f, opts)?.into_measure()),
            AnyFamily::Rational(f) => AnyMeasure::Rational(build_from_family(f, opts)?.into_measure()),
        };
        put(out, Box::into_raw(Box::new(LqhvMeasure(m))), "out")
    })
}

/// Parses a measure JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqhv_measure_from_json(
    json: *const c_char,
    tol: f64,
    out: *mut *mut LqhvMeasure,
) -> LqhvStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let m = io::parse_measure(text, tol)?;
        put(out, Box::into_raw(Box::new(LqhvMeasure(m))), "out")
    })
}

/// # Safety
/// `measure` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lqhv_measure_free(measure: *mut LqhvMeasure) {
    if !measure.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(measure))));
    }
}

/// Number of atoms, in row-major axis order.
///
/// # Safety
/// `measure` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqhv_measure_atom_count(measure: *const LqhvMeasure, out: *mut usize) -> LqhvStatus {
    guard(|| {
        let m = borrow(measure, "measure")?;
        let n = match &m.0 {
            AnyMeasure::Float(m) => m.atoms().len(),
            AnyMeasure::Rational(m) => m.atoms().len(),
        };
        put(out, n, "out")
    })
}

/// Copies the atoms as doubles into `buf`, which must hold `len` values
/// with `len` equal to the atom count.
///
/// # Safety
/// `measure` must be a live handle; `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lqhv_measure_atoms(measure: *const LqhvMeasure, buf: *mut f64, len: usize) -> LqhvStatus {
    guard(|| {
        let m = borrow(measure, "measure")?;
        let values: Vec<f64> = match &m.0 {
            AnyMeasure::Float(m) => m.atoms().data().to_vec(),
            AnyMeasure::Rational(m) => m.atoms().data().iter().map(Scalar::to_f64).collect(),
        };
        if values.len() != len {
            return Err(Failure(
                LqhvStatus::InputError,
                format!("buffer holds {len} values, measure has {}", values.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, len);
        Ok(())
    })
}

/// Smallest atom.
///
/// # Safety
/// `measure` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqhv_measure_min_atom(measure: *const LqhvMeasure, out: *mut f64) -> LqhvStatus {
    guard(|| {
        let m = borrow(measure, "measure")?;
        let v = match &m.0 {
            AnyMeasure::Float(m) => m.min_atom(),
            AnyMeasure::Rational(m) => m.min_atom().to_f64(),
        };
        put(out, v, "out")
    })
}

/// Total variation: the sum of absolute atom values.
///
/// # Safety
/// `measure` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqhv_measure_total_variation(measure: *const LqhvMeasure, out: *mut f64) -> LqhvStatus {
    guard(|| {
        let m = borrow(measure, "measure")?;
        let v = match &m.0 {
            AnyMeasure::Float(m) => m.jordan().total_variation,
            AnyMeasure::Rational(m) => m.jordan().total_variation.to_f64(),
        };
        put(out, v, "out")
    })
}

/// Serializes a measure to JSON.
///
/// # Safety
/// `measure` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqhv_measure_to_json(measure: *const LqhvMeasure, out: *mut *mut c_char) -> LqhvStatus {
    guard(|| {
        let m = borrow(measure, "measure")?;
        let v = match &m.0 {
            AnyMeasure::Float(m) => io::measure_to_json(m),
            AnyMeasure::Rational(m) => io::measure_to_json(m),
        };
        put(out, to_c_string(v.to_string())?, "out")
    })
}

/// Compares every tuple marginal of `measure` with the family. Returns
/// `PreconditionFailed` on a mismatch; `max_error` receives the largest
/// entrywise difference either way.
///
/// # Safety
/// Both handles must be live; `max_error` may be null.
#[no_mangle]
pub unsafe extern "C" fn lqhv_verify(
    measure: *const LqhvMeasure,
    family: *const LqhvFamily,
    tol: f64,
    max_error: *mut f64,
) -> LqhvStatus {
    guard(|| {
        let m = borrow(measure, "measure")?;
        let fam = borrow(family, "family")?.0.clone().into_mode(m.0.mode(), tol)?;
        let report = match (&m.0, &fam) {
            (AnyMeasure::Float(m), AnyFamily::Float(f)) => verify_measure(m, f, tol)?,
            (AnyMeasure::Rational(m), AnyFamily::Rational(f)) => verify_measure(m, f, tol)?,
            _ => unreachable!("family converted to the measure's mode"),
        };
        if !max_error.is_null() {
            max_error.write(report.max_error);
        }
        if report.passed() {
            Ok(())
        } else {
            Err(Failure(
                LqhvStatus::PreconditionFailed,
                format!("measure misses the family by {}", report.max_error),
            ))
        }
    })
}

/// Decides whether a nonnegative simulating measure exists.
///
/// # Safety
/// `family` must be a live handle; `feasible` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqhv_lhv_feasible(
    family: *const LqhvFamily,
    tol: f64,
    budget: usize,
    feasible: *mut bool,
) -> LqhvStatus {
    guard(|| {
        let fam = borrow(family, "family")?;
        if feasible.is_null() {
            return Err(null("feasible"));
        }
        let v = match &fam.0 {
            AnyFamily::Float(f) => lhv_feasible(f, tol, budget)?.feasible,
            AnyFamily::Rational(f) => lhv_feasible(f, tol, budget)?.feasible,
        };
        put(feasible, v, "feasible")
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lqhv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn lqhv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
