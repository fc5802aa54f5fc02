//! C ABI for the relsurf engine. Workspaces are opaque handles; commands go
//! in as JSON requests and come back as JSON reports, mirroring the CLI's
//! report schema and exit-code contract.
//!
//! Every function returns a [`RelsurfStatus`]; on failure a textual message
//! is available through [`relsurf_last_error`]. Strings returned through out
//! parameters are owned by the caller and must be released with
//! [`relsurf_string_free`].

use relsurf::commands;
use relsurf::workspace::{self, LoadError, Workspace};
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::path::Path;

/// Opaque workspace handle.
pub struct RelsurfWorkspace {
    inner: Workspace,
}

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelsurfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    ParseError = 4,
    ValidationError = 5,
    CommandError = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// The most recent error message on this thread, or null. The caller owns
/// the returned string and must free it with [`relsurf_string_free`].
#[no_mangle]
pub extern "C" fn relsurf_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be a pointer previously returned by this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn relsurf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn relsurf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opens the built-in scenario workspace.
///
/// # Safety
/// `out` must be a valid pointer to a workspace-handle slot.
#[no_mangle]
pub unsafe extern "C" fn relsurf_workspace_builtin(
    out: *mut *mut RelsurfWorkspace,
) -> RelsurfStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return RelsurfStatus::NullArgument;
    }
    clear_error();
    let handle = Box::new(RelsurfWorkspace { inner: workspace::builtin_fr() });
    unsafe { *out = Box::into_raw(handle) };
    RelsurfStatus::Ok
}

unsafe fn opt_path<'a>(p: *const c_char) -> Result<Option<&'a Path>, RelsurfStatus> {
    if p.is_null() {
        return Ok(None);
    }
    match unsafe { CStr::from_ptr(p) }.to_str() {
        Ok(s) => Ok(Some(Path::new(s))),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(RelsurfStatus::InvalidUtf8)
        }
    }
}

/// Loads a workspace from a circuit file and optional atom and deduction
/// files (null to omit).
///
/// # Safety
/// `circuit_path` must be a valid C string; `atoms_path` and
/// `deductions_path` must each be null or a valid C string; `out` must be a
/// valid pointer to a workspace-handle slot.
#[no_mangle]
pub unsafe extern "C" fn relsurf_workspace_open(
    circuit_path: *const c_char,
    atoms_path: *const c_char,
    deductions_path: *const c_char,
    out: *mut *mut RelsurfWorkspace,
) -> RelsurfStatus {
    if out.is_null() || circuit_path.is_null() {
        set_error("required pointer is null");
        return RelsurfStatus::NullArgument;
    }
    let circuit = match unsafe { opt_path(circuit_path) } {
        Ok(Some(p)) => p,
        Ok(None) => unreachable!("null checked above"),
        Err(status) => return status,
    };
    let atoms = match unsafe { opt_path(atoms_path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    let deductions = match unsafe { opt_path(deductions_path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match workspace::load_workspace(circuit, atoms, deductions) {
        Ok(ws) => {
            clear_error();
            unsafe { *out = Box::into_raw(Box::new(RelsurfWorkspace { inner: ws })) };
            RelsurfStatus::Ok
        }
        Err(e) => {
            let status = match &e {
                LoadError::Io(_) => RelsurfStatus::Io,
                LoadError::Parse(_) => RelsurfStatus::ParseError,
                LoadError::Validation(_) => RelsurfStatus::ValidationError,
            };
            set_error(e.to_string());
            status
        }
    }
}

/// Releases a workspace handle. Null is ignored.
///
/// # Safety
/// `ws` must be a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn relsurf_workspace_free(ws: *mut RelsurfWorkspace) {
    if !ws.is_null() {
        drop(unsafe { Box::from_raw(ws) });
    }
}

/// Runs a JSON command request (e.g. `{"cmd":"fr-demo"}`) against a
/// workspace. On success, `out_report_json` receives the JSON report (free
/// with [`relsurf_string_free`]) and `out_exit_code` (optional) receives the
/// CLI exit-code equivalent: 0 success, 4 invalid deduction step, 5 unsound
/// deduction.
///
/// # Safety
/// `ws` must be a live handle from this library; `request_json` a valid C
/// string; `out_report_json` a valid pointer; `out_exit_code` null or valid.
#[no_mangle]
pub unsafe extern "C" fn relsurf_run_json(
    ws: *const RelsurfWorkspace,
    request_json: *const c_char,
    out_report_json: *mut *mut c_char,
    out_exit_code: *mut c_int,
) -> RelsurfStatus {
    if ws.is_null() || request_json.is_null() || out_report_json.is_null() {
        set_error("required pointer is null");
        return RelsurfStatus::NullArgument;
    }
    let request = match unsafe { CStr::from_ptr(request_json) }.to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("request is not valid UTF-8");
            return RelsurfStatus::InvalidUtf8;
        }
    };
    let workspace = unsafe { &(*ws).inner };
    match commands::run_json(workspace, request) {
        Ok(outcome) => {
            clear_error();
            let json = outcome.report.to_json();
            let c = CString::new(json).expect("reports contain no NUL bytes");
            unsafe {
                *out_report_json = c.into_raw();
                if !out_exit_code.is_null() {
                    *out_exit_code = outcome.exit_code as c_int;
                }
            }
            RelsurfStatus::Ok
        }
        Err(e) => {
            let status = match &e {
                commands::CommandError::Parse(_) => RelsurfStatus::ParseError,
                commands::CommandError::Validation(_) => RelsurfStatus::ValidationError,
                _ => RelsurfStatus::CommandError,
            };
            set_error(e.to_string());
            status
        }
    }
}
