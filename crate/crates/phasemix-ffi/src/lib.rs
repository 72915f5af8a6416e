//! C ABI for the phasemix library.
//!
//! Mixture models are exposed as opaque handles created from the same JSON
//! documents the CLI consumes. Every call returns a `PmStatus`; on failure a
//! thread-local message is retrievable via `pm_last_error_message`. Strings
//! returned by this library are owned by Rust and must be released with
//! `pm_string_free`.
//!
//! The committed header `include/phasemix.h` is produced by cbindgen
//! (`cargo build -p phasemix-ffi --features gen-header`).

use libc::{c_char, size_t};
use phasemix::error::Error;
use phasemix::mixture::MixtureModel;
use phasemix::model::mixture_from_json;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Call outcome. Mirrors the CLI exit-code split: model/argument problems
/// versus numerical failures.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmStatus {
    PmOk = 0,
    /// Null pointer, malformed UTF-8, or an out-of-domain argument.
    PmInvalidArgument = 1,
    /// The model document failed schema or invariant validation.
    PmInvalidModel = 2,
    /// A numerical routine failed to converge or broke down.
    PmNumericalError = 3,
    /// A panic was caught at the boundary.
    PmPanic = 4,
}

/// Opaque mixture-model handle.
pub struct PmMixture {
    inner: MixtureModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> PmStatus {
    match err {
        Error::NonStochasticInitial(_)
        | Error::NotSubIntensity(_)
        | Error::InvalidModel(_)
        | Error::ComplexSpectrum(_)
        | Error::NotRegularlyVarying(_)
        | Error::NotFrechet(_)
        | Error::DomainError(_) => PmStatus::PmInvalidModel,
        _ => PmStatus::PmNumericalError,
    }
}

fn guard<F: FnOnce() -> PmStatus>(f: F) -> PmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic caught at the FFI boundary".into());
            PmStatus::PmPanic
        }
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn pm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread, or null. The caller
/// owns the returned string and must free it with `pm_string_free`.
#[no_mangle]
pub extern "C" fn pm_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `phasemix` FFI call and
/// not yet freed; null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn pm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a mixture model from a JSON document (same schema as the CLI).
/// Returns null on failure; consult `pm_last_error_message`.
///
/// # Safety
/// `json` must point to a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pm_mixture_from_json(json: *const c_char) -> *mut PmMixture {
    if json.is_null() {
        set_error("json pointer is null".into());
        return std::ptr::null_mut();
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("json is not valid UTF-8".into());
            return std::ptr::null_mut();
        }
    };
    match catch_unwind(|| mixture_from_json(text)) {
        Ok(Ok(model)) => Box::into_raw(Box::new(PmMixture { inner: model })),
        Ok(Err(e)) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("panic caught at the FFI boundary".into());
            std::ptr::null_mut()
        }
    }
}

/// Release a mixture handle.
///
/// # Safety
/// `handle` must come from `pm_mixture_from_json` and not be freed twice;
/// null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn pm_mixture_free(handle: *mut PmMixture) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn model_ref<'a>(handle: *const PmMixture) -> Option<&'a MixtureModel> {
    handle.as_ref().map(|h| &h.inner)
}

/// Tail probability F̄(x) into `out`.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid f64 pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_mixture_tail(
    handle: *const PmMixture,
    x: f64,
    out: *mut f64,
) -> PmStatus {
    let (Some(model), false) = (model_ref(handle), out.is_null()) else {
        set_error("null handle or output pointer".into());
        return PmStatus::PmInvalidArgument;
    };
    guard(|| match model.tail(x) {
        Ok(v) => {
            *out = v;
            PmStatus::PmOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    })
}

/// Density f(x) into `out`.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid f64 pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_mixture_density(
    handle: *const PmMixture,
    x: f64,
    out: *mut f64,
) -> PmStatus {
    let (Some(model), false) = (model_ref(handle), out.is_null()) else {
        set_error("null handle or output pointer".into());
        return PmStatus::PmInvalidArgument;
    };
    guard(|| match model.density(x) {
        Ok(v) => {
            *out = v;
            PmStatus::PmOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    })
}

/// Raw moment E[(SY)^n] into `out`; divergent moments yield +infinity.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid f64 pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_mixture_moment(
    handle: *const PmMixture,
    n: u32,
    out: *mut f64,
) -> PmStatus {
    let (Some(model), false) = (model_ref(handle), out.is_null()) else {
        set_error("null handle or output pointer".into());
        return PmStatus::PmInvalidArgument;
    };
    guard(|| match model.moment(n) {
        Ok(v) => {
            *out = v;
            PmStatus::PmOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    })
}

/// Fill `buf` with `count` i.i.d. draws of S * Y, deterministic per seed.
///
/// # Safety
/// `handle` must be a live handle and `buf` must have room for `count` f64.
#[no_mangle]
pub unsafe extern "C" fn pm_mixture_sample(
    handle: *const PmMixture,
    seed: u64,
    count: size_t,
    buf: *mut f64,
) -> PmStatus {
    let (Some(model), false) = (model_ref(handle), buf.is_null()) else {
        set_error("null handle or buffer pointer".into());
        return PmStatus::PmInvalidArgument;
    };
    guard(|| {
        let draws = model.sample(seed, count);
        let slice = std::slice::from_raw_parts_mut(buf, count);
        slice.copy_from_slice(&draws);
        PmStatus::PmOk
    })
}

/// Run the full tail classification and return the report as a JSON string
/// (caller frees with `pm_string_free`); null on failure.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pm_mixture_mda_report_json(handle: *const PmMixture) -> *mut c_char {
    let Some(model) = model_ref(handle) else {
        set_error("null handle".into());
        return std::ptr::null_mut();
    };
    match catch_unwind(AssertUnwindSafe(|| phasemix::analyze(model))) {
        Ok(Ok(report)) => match serde_json::to_string(&report) {
            Ok(json) => CString::new(json).map(CString::into_raw).unwrap_or_else(|_| {
                set_error("report contained interior NUL".into());
                std::ptr::null_mut()
            }),
            Err(e) => {
                set_error(format!("serialization failed: {e}"));
                std::ptr::null_mut()
            }
        },
        Ok(Err(e)) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("panic caught at the FFI boundary".into());
            std::ptr::null_mut()
        }
    }
}
