//! C interface to `twistgate`.
//!
//! Curves are opaque `TgCurve` handles created by `tg_curve_from_*` and
//! released with `tg_curve_free`. Every fallible call returns a `TgStatus`;
//! on failure `tg_last_error_message` describes the error for the calling
//! thread. Strings returned through out-parameters are owned by the caller
//! and released with `tg_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use twistgate::curve::{self, CurveTable, WeierstrassModel};
use twistgate::error::Error;
use twistgate::fieldsearch::{self, Outcome};
use twistgate::lseries::{self, LSeriesConfig, Verdict};
use twistgate::{galois, reduction, rootnum};

/// Result codes. The first three match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgStatus {
    Ok = 0,
    CheckFailed = 1,
    Unsupported = 2,
    NullPointer = 3,
    InvalidUtf8 = 4,
    Panic = 5,
}

/// Opaque curve handle.
pub struct TgCurve {
    model: WeierstrassModel,
}

/// Summary of an L(E,1) estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TgLValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: u64,
    pub conductor: u64,
    pub root_number: i32,
    pub nonzero_evidence: bool,
    pub retried: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(err: &Error) -> TgStatus {
    set_error(err.to_string());
    if err.is_unsupported() {
        TgStatus::Unsupported
    } else {
        TgStatus::CheckFailed
    }
}

fn guard(f: impl FnOnce() -> TgStatus + UnwindSafe) -> TgStatus {
    clear_error();
    catch_unwind(f).unwrap_or_else(|_| {
        set_error("panic inside twistgate");
        TgStatus::Panic
    })
}

unsafe fn curve_ref<'a>(c: *const TgCurve) -> Option<&'a TgCurve> {
    c.as_ref()
}

fn null() -> TgStatus {
    set_error("null pointer argument");
    TgStatus::NullPointer
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> TgStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            TgStatus::Ok
        }
        Err(_) => {
            set_error("string contains NUL");
            TgStatus::Panic
        }
    }
}

fn boxed(model: WeierstrassModel) -> *mut TgCurve {
    Box::into_raw(Box::new(TgCurve { model }))
}

/// Looks up `label` in the curve table (honouring `TWISTGATE_CURVES`).
///
/// # Safety
/// `label` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_curve_from_label(label: *const c_char, out: *mut *mut TgCurve) -> TgStatus {
    guard(|| {
        if label.is_null() || out.is_null() {
            return null();
        }
        let Ok(label) = CStr::from_ptr(label).to_str() else {
            set_error("label is not UTF-8");
            return TgStatus::InvalidUtf8;
        };
        match CurveTable::load().and_then(|t| t.get(label).cloned()) {
            Ok(model) => {
                *out = boxed(model);
                TgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Builds a curve from `[a1, a2, a3, a4, a6]`.
///
/// # Safety
/// `coeffs` must point to five readable `int64_t`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_curve_from_coeffs(coeffs: *const i64, out: *mut *mut TgCurve) -> TgStatus {
    guard(|| {
        if coeffs.is_null() || out.is_null() {
            return null();
        }
        let mut a = [0i64; 5];
        ptr::copy_nonoverlapping(coeffs, a.as_mut_ptr(), 5);
        match WeierstrassModel::from_coeffs(a) {
            Ok(model) => {
                *out = boxed(model);
                TgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `c` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tg_curve_free(c: *mut TgCurve) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Quadratic twist by squarefree `d`, as a new handle.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_curve_twist(c: *const TgCurve, d: i64, out: *mut *mut TgCurve) -> TgStatus {
    guard(|| {
        let (Some(c), false) = (curve_ref(c), out.is_null()) else {
            return null();
        };
        match curve::quadratic_twist(&c.model, d) {
            Ok(model) => {
                *out = boxed(model);
                TgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// j-invariant as a reduced fraction "num/den".
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_curve_j_invariant(c: *const TgCurve, out: *mut *mut c_char) -> TgStatus {
    guard(|| {
        let (Some(c), false) = (curve_ref(c), out.is_null()) else {
            return null();
        };
        match c.model.invariants() {
            Ok(inv) => write_string(out, inv.j.to_string()),
            Err(e) => fail(&e),
        }
    })
}

/// Discriminant as a decimal string.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_curve_discriminant(c: *const TgCurve, out: *mut *mut c_char) -> TgStatus {
    guard(|| {
        let (Some(c), false) = (curve_ref(c), out.is_null()) else {
            return null();
        };
        write_string(out, c.model.discriminant().to_string())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of points over F_p, the point at infinity included.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_count_points(c: *const TgCurve, p: u64, out: *mut u64) -> TgStatus {
    guard(|| {
        let (Some(c), false) = (curve_ref(c), out.is_null()) else {
            return null();
        };
        match reduction::count_points(&c.model, p) {
            Ok(n) => {
                *out = n;
                TgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_conductor(c: *const TgCurve, out: *mut u64) -> TgStatus {
    guard(|| {
        let (Some(c), false) = (curve_ref(c), out.is_null()) else {
            return null();
        };
        match reduction::conductor(&c.model) {
            Ok(n) => {
                *out = n;
                TgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Global root number (+1 or -1) from the product of local factors.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_global_root_number(c: *const TgCurve, out: *mut i32) -> TgStatus {
    guard(|| {
        let (Some(c), false) = (curve_ref(c), out.is_null()) else {
            return null();
        };
        match rootnum::global_root_number(&c.model) {
            Ok(w) => {
                *out = w.value.to_i8() as i32;
                TgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Root number of the twist by `d` predicted by (d/N) w(E).
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_twist_root_number_formula(c: *const TgCurve, d: i64, out: *mut i32) -> TgStatus {
    guard(|| {
        let (Some(c), false) = (curve_ref(c), out.is_null()) else {
            return null();
        };
        match rootnum::twist_root_number_formula(&c.model, d) {
            Ok(w) => {
                *out = w.to_i8() as i32;
                TgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Estimate of L(E,1). `terms = 0` picks the default; `margin <= 0` uses 10.
/// Returns `CheckFailed` when the evidence is inconclusive; `out` is filled
/// in either case.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_l_value(c: *const TgCurve, terms: usize, margin: f64, out: *mut TgLValue) -> TgStatus {
    guard(|| {
        let (Some(c), false) = (curve_ref(c), out.is_null()) else {
            return null();
        };
        let config = LSeriesConfig {
            terms: (terms > 0).then_some(terms),
            margin: if margin > 0.0 { margin } else { lseries::DEFAULT_MARGIN },
            ..Default::default()
        };
        match lseries::l_value_with_retry(&c.model, &config) {
            Ok(est) => {
                let nonzero = est.verdict == Verdict::NonzeroEvidence;
                *out = TgLValue {
                    value: est.value_f64(),
                    tail_bound: est.tail_bound_f64(),
                    terms_used: est.terms_used as u64,
                    conductor: est.conductor,
                    root_number: est.root_number.to_i8() as i32,
                    nonzero_evidence: nonzero,
                    retried: est.retried,
                };
                if nonzero {
                    TgStatus::Ok
                } else {
                    set_error("L-value not separated from zero");
                    TgStatus::CheckFailed
                }
            }
            Err(e) => fail(&e),
        }
    })
}

/// Checks Serre's criterion hypotheses mod `ell` with auxiliary prime `aux`
/// (`aux = 0` picks the first prime of good reduction other than `ell`).
///
/// # Safety
/// `c` must be a live handle; `pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_serre_check(c: *const TgCurve, ell: u64, aux: u64, pass: *mut bool) -> TgStatus {
    guard(|| {
        let (Some(c), false) = (curve_ref(c), pass.is_null()) else {
            return null();
        };
        let aux = if aux == 0 { galois::first_good_prime(&c.model, ell) } else { aux };
        match galois::serre_check(&c.model, ell, aux) {
            Ok(r) => {
                *pass = r.overall;
                if r.overall {
                    TgStatus::Ok
                } else {
                    TgStatus::CheckFailed
                }
            }
            Err(e) => fail(&e),
        }
    })
}

/// Runs every character twist of X0(3p) over Q(sqrt d_1, ..., sqrt d_r) and
/// writes the report as JSON. Returns `Ok` only for a verified report,
/// `Unsupported` for a non-admissible tuple.
///
/// # Safety
/// `ds` must point to `len` readable values; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_check_hypothesis_json(
    p: u64,
    ds: *const u64,
    len: usize,
    out_json: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        if (ds.is_null() && len > 0) || out_json.is_null() {
            return null();
        }
        let ds = if len == 0 { &[][..] } else { std::slice::from_raw_parts(ds, len) };
        match fieldsearch::check_hypothesis(p, ds, &LSeriesConfig::default()) {
            Ok(report) => {
                let json = serde_json::to_string(&report).expect("serializable");
                let written = write_string(out_json, json);
                if written != TgStatus::Ok {
                    return written;
                }
                match report.overall {
                    Outcome::Verified => TgStatus::Ok,
                    Outcome::NotAdmissible => {
                        set_error(format!("{:?} is not admissible", report.ds));
                        TgStatus::Unsupported
                    }
                    other => {
                        set_error(other.to_string());
                        TgStatus::CheckFailed
                    }
                }
            }
            Err(e) => fail(&e),
        }
    })
}

/// Message for the last failure on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn tg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn tg_status_str(status: TgStatus) -> *const c_char {
    let s: &'static CStr = match status {
        TgStatus::Ok => c"ok",
        TgStatus::CheckFailed => c"check failed",
        TgStatus::Unsupported => c"unsupported input",
        TgStatus::NullPointer => c"null pointer",
        TgStatus::InvalidUtf8 => c"invalid UTF-8",
        TgStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
