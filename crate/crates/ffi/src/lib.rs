//! C ABI over the ea4rca toolkit.
//!
//! Designs are opaque handles. Every fallible call returns an
//! [`Ea4rcaStatus`]; on failure [`ea4rca_last_error_message`] describes the
//! error for the calling thread. Strings handed out by the library are
//! NUL-terminated UTF-8 JSON and must be released with [`ea4rca_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ea4rca::ops::{self, ErrorKind, OpError};
use ea4rca::validate::{EXIT_INFEASIBLE, EXIT_OVER_BUDGET, EXIT_STRUCTURAL};
use ea4rca::{ConfigDocument, PlatformSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ea4rcaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or a structural rule violation.
    InvalidDocument = 3,
    OverBudget = 4,
    Infeasible = 5,
    NotFound = 6,
    Internal = 7,
}

/// A parsed design document.
pub struct Ea4rcaDesign {
    doc: ConfigDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &OpError) -> Ea4rcaStatus {
    match e.kind {
        ErrorKind::BadRequest => Ea4rcaStatus::InvalidDocument,
        ErrorKind::Invalid => match e.exit_code() {
            EXIT_OVER_BUDGET => Ea4rcaStatus::OverBudget,
            EXIT_STRUCTURAL => Ea4rcaStatus::InvalidDocument,
            EXIT_INFEASIBLE => Ea4rcaStatus::Infeasible,
            _ => Ea4rcaStatus::InvalidDocument,
        },
        ErrorKind::Infeasible => Ea4rcaStatus::Infeasible,
        ErrorKind::NotFound => Ea4rcaStatus::NotFound,
        ErrorKind::Unprocessable | ErrorKind::Conflict => Ea4rcaStatus::InvalidDocument,
        ErrorKind::Internal => Ea4rcaStatus::Internal,
    }
}

fn fail(e: OpError) -> Ea4rcaStatus {
    let mut msg = e.to_string();
    for d in &e.diagnostics {
        msg.push_str(&format!("\n{d}"));
    }
    set_error(&msg);
    status_of(&e)
}

/// Runs `f`, converting panics into [`Ea4rcaStatus::Internal`].
fn guard(f: impl FnOnce() -> Result<(), Ea4rcaStatus>) -> Ea4rcaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            Ea4rcaStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            Ea4rcaStatus::Internal
        }
    }
}

unsafe fn input_str<'a>(p: *const c_char) -> Result<&'a str, Ea4rcaStatus> {
    if p.is_null() {
        set_error("null argument");
        return Err(Ea4rcaStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not UTF-8");
        Ea4rcaStatus::InvalidUtf8
    })
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Ea4rcaStatus> {
    let c = CString::new(s).map_err(|_| {
        set_error("output contains NUL");
        Ea4rcaStatus::Internal
    })?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), Ea4rcaStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(Ea4rcaStatus::NullArgument);
    }
    Ok(())
}

unsafe fn design_ref<'a>(d: *const Ea4rcaDesign) -> Result<&'a Ea4rcaDesign, Ea4rcaStatus> {
    d.as_ref().ok_or_else(|| {
        set_error("null design handle");
        Ea4rcaStatus::NullArgument
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ea4rca_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
///
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ea4rca_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a design document.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable. On success `*out`
/// owns a handle to release with [`ea4rca_design_free`].
#[no_mangle]
pub unsafe extern "C" fn ea4rca_design_parse(json: *const c_char, out: *mut *mut Ea4rcaDesign) -> Ea4rcaStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let text = input_str(json)?;
        let v = ops::parse_json(text).map_err(fail)?;
        let doc = ops::load_document(&v, &PlatformSpec::default()).map_err(fail)?;
        *out = Box::into_raw(Box::new(Ea4rcaDesign { doc }));
        Ok(())
    })
}

/// Reference design for `app` (`mm`, `filter2d`, `fft`, `mmt`); `pus == 0`
/// keeps every PU.
///
/// # Safety
/// `app` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ea4rca_design_template(app: *const c_char, pus: u32, out: *mut *mut Ea4rcaDesign) -> Ea4rcaStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let app = input_str(app)?;
        let doc = ops::template(app, (pus > 0).then_some(pus)).map_err(fail)?;
        *out = Box::into_raw(Box::new(Ea4rcaDesign { doc }));
        Ok(())
    })
}

/// Releases a design handle. Null is ignored.
///
/// # Safety
/// `d` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ea4rca_design_free(d: *mut Ea4rcaDesign) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of PUs in the design, 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ea4rca_design_pu_count(d: *const Ea4rcaDesign) -> u32 {
    d.as_ref().map_or(0, |d| d.doc.design.pus.len() as u32)
}

/// Serializes the design to its canonical JSON document.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ea4rca_design_to_json(d: *const Ea4rcaDesign, out: *mut *mut c_char) -> Ea4rcaStatus {
    guard(|| {
        check_out(out)?;
        let d = design_ref(d)?;
        put_string(out, ea4rca::serialize_design(&d.doc))
    })
}

/// Validates against the default platform and writes the report JSON to
/// `*out` whenever a report exists. Returns `OVER_BUDGET` or
/// `INVALID_DOCUMENT` when the design is not deployable.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ea4rca_design_validate(d: *const Ea4rcaDesign, out: *mut *mut c_char) -> Ea4rcaStatus {
    let mut rejected: Option<(Ea4rcaStatus, String)> = None;
    let r = guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let d = design_ref(d)?;
        let report = ops::validate(&d.doc.to_value(), &PlatformSpec::default()).map_err(fail)?;
        put_string(out, serde_json::to_string(&report).expect("serializable"))?;
        if !report.is_deployable {
            let status = match report.exit_code() {
                EXIT_OVER_BUDGET => Ea4rcaStatus::OverBudget,
                _ => Ea4rcaStatus::InvalidDocument,
            };
            rejected = Some((status, ops::render_report(&report).trim_end().to_string()));
        }
        Ok(())
    });
    match rejected {
        Some((status, msg)) if r == Ea4rcaStatus::Ok => {
            set_error(&msg);
            status
        }
        _ => r,
    }
}

/// Lowers the design and writes `{graph, census, files}` JSON to `*out`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ea4rca_design_generate(d: *const Ea4rcaDesign, out: *mut *mut c_char) -> Ea4rcaStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let d = design_ref(d)?;
        let g = ops::generate(&d.doc.to_value(), &PlatformSpec::default()).map_err(fail)?;
        put_string(out, serde_json::to_string(&g).expect("serializable"))
    })
}

/// Simulates the design. `size` may be null for the application default;
/// `pus == 0` keeps every PU. Writes the result JSON to `*out`.
///
/// # Safety
/// `d` must be a live handle; `size` null or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ea4rca_design_simulate(
    d: *const Ea4rcaDesign,
    size: *const c_char,
    pus: u32,
    out: *mut *mut c_char,
) -> Ea4rcaStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let d = design_ref(d)?;
        let size = if size.is_null() { None } else { Some(input_str(size)?.to_string()) };
        let req: ops::SimulateRequest = ops::from_json(
            serde_json::json!({ "design": d.doc.to_value(), "size": size, "pus": (pus > 0).then_some(pus) }),
            "$",
        )
        .map_err(fail)?;
        let r = ops::simulate(&req).map_err(fail)?;
        put_string(out, serde_json::to_string(&r).expect("serializable"))
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ea4rca_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
