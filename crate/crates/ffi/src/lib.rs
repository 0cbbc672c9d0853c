//! C interface to `structsync`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free`. Every fallible call returns an [`SsStatus`]; on failure
//! [`ss_last_error`] describes it until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_traits::ToPrimitive;
use structsync::format::parse_interconnection;
use structsync::graphs::Interconnection;
use structsync::laplacians::{laplacian, WeightMap};
use structsync::spectral::spectrum;
use structsync::structural::{self, SssOptions, SssVerdict};
use structsync::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullArgument = 1,
    Parse = 2,
    Budget = 3,
    Invalid = 4,
    Overflow = 5,
    Panic = 6,
}

/// A parsed interconnection.
pub struct SsInterconnection {
    inner: Interconnection,
}

/// Outcome of the strong structural synchronization test.
pub struct SsSssVerdict {
    inner: SssVerdict,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SsStatus, msg: impl Into<String>) -> SsStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> SsStatus {
    let status = match e {
        Error::Parse { .. } => SsStatus::Parse,
        Error::BudgetExceeded { .. } => SsStatus::Budget,
        _ => SsStatus::Invalid,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> SsStatus) -> SsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SsStatus::Panic, "internal panic"),
    }
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library; valid until the next call.
#[no_mangle]
pub extern "C" fn ss_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses the text interconnection format.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ss_interconnection_parse(
    text: *const c_char,
    out: *mut *mut SsInterconnection,
) -> SsStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(SsStatus::NullArgument, "null argument");
        }
        let Ok(s) = CStr::from_ptr(text).to_str() else {
            return fail(SsStatus::Parse, "input is not UTF-8");
        };
        match parse_interconnection(s) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(SsInterconnection {
                    inner: f.interconnection,
                }));
                SsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `ic` is null or came from [`ss_interconnection_parse`] and is not used again.
#[no_mangle]
pub unsafe extern "C" fn ss_interconnection_free(ic: *mut SsInterconnection) {
    if !ic.is_null() {
        drop(Box::from_raw(ic));
    }
}

/// Vertex count, dissipative and restorative edge counts.
///
/// # Safety
/// `ic` is a live handle; the outputs are writable or null.
#[no_mangle]
pub unsafe extern "C" fn ss_interconnection_shape(
    ic: *const SsInterconnection,
    q: *mut usize,
    dissipative: *mut usize,
    restorative: *mut usize,
) -> SsStatus {
    guard(|| {
        let Some(ic) = ic.as_ref() else {
            return fail(SsStatus::NullArgument, "null handle");
        };
        for (p, v) in [
            (q, ic.inner.q()),
            (dissipative, ic.inner.dissipative().len()),
            (restorative, ic.inner.restorative().len()),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        SsStatus::Ok
    })
}

/// # Safety
/// `ic` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ss_is_ss(ic: *const SsInterconnection, out: *mut bool) -> SsStatus {
    guard(|| {
        let (Some(ic), false) = (ic.as_ref(), out.is_null()) else {
            return fail(SsStatus::NullArgument, "null argument");
        };
        *out = structural::is_ss(&ic.inner).is_ss;
        SsStatus::Ok
    })
}

/// Runs the sign-pattern search. `budget` caps the restorative edge count;
/// `jobs` of zero uses every core.
///
/// # Safety
/// `ic` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ss_is_sss(
    ic: *const SsInterconnection,
    budget: usize,
    jobs: usize,
    out: *mut *mut SsSssVerdict,
) -> SsStatus {
    guard(|| {
        let (Some(ic), false) = (ic.as_ref(), out.is_null()) else {
            return fail(SsStatus::NullArgument, "null argument");
        };
        let options = SssOptions {
            budget,
            jobs: (jobs > 0).then_some(jobs),
        };
        match structural::is_sss(&ic.inner, options) {
            Ok(v) => {
                *out = Box::into_raw(Box::new(SsSssVerdict { inner: v }));
                SsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `v` is null or came from [`ss_is_sss`] and is not used again.
#[no_mangle]
pub unsafe extern "C" fn ss_sss_verdict_free(v: *mut SsSssVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `v` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_sss_verdict_holds(v: *const SsSssVerdict) -> bool {
    v.as_ref().is_some_and(|v| v.inner.is_sss)
}

/// # Safety
/// `v` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_sss_verdict_refuted(v: *const SsSssVerdict) -> u64 {
    v.as_ref().map_or(0, |v| v.inner.refuted_patterns)
}

/// Entries of the sign witness, one per restorative edge, into `buf`.
/// `len` receives the witness length, zero when there is none; call with a
/// null `buf` to query it.
///
/// # Safety
/// `v` is a live handle; `buf` is null or holds `cap` values; `len` is writable.
#[no_mangle]
pub unsafe extern "C" fn ss_sss_verdict_witness(
    v: *const SsSssVerdict,
    buf: *mut i64,
    cap: usize,
    len: *mut usize,
) -> SsStatus {
    guard(|| {
        let (Some(v), false) = (v.as_ref(), len.is_null()) else {
            return fail(SsStatus::NullArgument, "null argument");
        };
        let Some(w) = &v.inner.witness else {
            *len = 0;
            return SsStatus::Ok;
        };
        *len = w.len();
        if buf.is_null() {
            return SsStatus::Ok;
        }
        if cap < w.len() {
            return fail(
                SsStatus::Invalid,
                format!("buffer holds {cap}, witness has {}", w.len()),
            );
        }
        for (i, x) in w.entries().iter().enumerate() {
            let Some(x) = x.to_i64() else {
                return fail(
                    SsStatus::Overflow,
                    format!("witness entry {} exceeds 64 bits", i + 1),
                );
            };
            *buf.add(i) = x;
        }
        SsStatus::Ok
    })
}

/// Real part of the second eigenvalue of `D + jR` for the given weights,
/// listed in file order of each edge kind.
///
/// # Safety
/// `ic` is a live handle; the weight arrays hold one value per edge of
/// their kind; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ss_margin(
    ic: *const SsInterconnection,
    d_weights: *const f64,
    d_len: usize,
    r_weights: *const f64,
    r_len: usize,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        let (Some(ic), false) = (ic.as_ref(), out.is_null()) else {
            return fail(SsStatus::NullArgument, "null argument");
        };
        let slice = |p: *const f64, n: usize| {
            if n == 0 {
                Some(Vec::new())
            } else if p.is_null() {
                None
            } else {
                Some(std::slice::from_raw_parts(p, n).to_vec())
            }
        };
        let (Some(dw), Some(rw)) = (slice(d_weights, d_len), slice(r_weights, r_len)) else {
            return fail(SsStatus::NullArgument, "null weight array");
        };
        let ic = &ic.inner;
        let result = (|| {
            let d = laplacian(ic.q(), ic.dissipative(), &WeightMap::new(dw)?)?;
            let r = laplacian(ic.q(), ic.restorative(), &WeightMap::new(rw)?)?;
            spectrum(&d, &r)
        })();
        match result {
            Ok(s) => {
                *out = s.margin();
                SsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
