//! C interface to the `greenpack` consolidation planner.
//!
//! Every fallible call returns a [`GpStatus`]; on any status other than
//! `GP_STATUS_OK` a thread-local message describing the failure is stored and
//! can be fetched with [`gp_last_error_message`]. Handles returned through
//! out-parameters own their data and must be released with the matching
//! `*_free` function. Strings returned through `char **` out-parameters are
//! NUL-terminated UTF-8 and must be released with [`gp_string_free`].
//!
//! The generated header lives at `include/greenpack.h` and is refreshed by
//! the build script whenever this file changes.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use greenpack::{
    parse_inventory, render, run_pipeline, Error, Inventory, InventoryFormat, OutputFormat,
    PipelineOptions, PlanMode, PowerCurve,
};

/// Outcome of a call into this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument was malformed: bad UTF-8, an unknown format or mode name,
    /// or output that cannot be represented as a C string.
    InvalidArgument = 2,
    /// The input text could not be parsed.
    ParseError = 3,
    /// The input parsed but violated an inventory invariant.
    ValidationError = 4,
    /// A numeric argument or configuration value was out of its domain.
    DomainError = 5,
    /// No feasible placement exists for the requested consolidation.
    PackingError = 6,
    /// An underlying I/O operation failed.
    IoError = 7,
    /// The library panicked; the handle state is unchanged.
    Panic = 8,
}

/// Opaque handle to a parsed, validated server inventory.
pub struct GpInventory {
    inner: Inventory,
}

/// Opaque handle to a validated power curve.
pub struct GpPowerCurve {
    inner: PowerCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let mut bytes = message.into_bytes();
    bytes.retain(|&b| b != 0);
    let message = CString::new(bytes).expect("NUL bytes were removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> GpStatus {
    match err {
        Error::Parse { .. } | Error::Json(_) => GpStatus::ParseError,
        Error::Invalid(_) | Error::DuplicateId(_) => GpStatus::ValidationError,
        Error::Domain(_) => GpStatus::DomainError,
        Error::UnknownFormat(_) => GpStatus::InvalidArgument,
        Error::InfeasibleGuest { .. } | Error::InsufficientCapacity { .. } => {
            GpStatus::PackingError
        }
        Error::Io(_) => GpStatus::IoError,
    }
}

fn fail(err: &Error) -> GpStatus {
    set_error(err.to_string());
    status_of(err)
}

fn guarded(f: impl FnOnce() -> GpStatus) -> GpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            GpStatus::Panic
        }
    }
}

/// Reads a borrowed C string argument, reporting null or bad UTF-8.
unsafe fn text_argument<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, GpStatus> {
    if ptr.is_null() {
        set_error(format!("`{name}` is null"));
        return Err(GpStatus::NullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(text) => Ok(text),
        Err(_) => {
            set_error(format!("`{name}` is not valid UTF-8"));
            Err(GpStatus::InvalidArgument)
        }
    }
}

/// Moves `text` into a freshly allocated C string at `*out`.
unsafe fn string_out(text: String, out: *mut *mut c_char) -> GpStatus {
    match CString::new(text) {
        Ok(text) => {
            *out = text.into_raw();
            clear_error();
            GpStatus::Ok
        }
        Err(_) => {
            set_error("output contains an interior NUL byte".to_string());
            GpStatus::InvalidArgument
        }
    }
}

/// Returns the library version as a static NUL-terminated string.
/// The pointer is valid for the lifetime of the process; do not free it.
#[no_mangle]
pub extern "C" fn gp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the message for the most recent failure on this thread, or null
/// when the last call succeeded. The caller owns the returned string and must
/// release it with `gp_string_free`.
#[no_mangle]
pub extern "C" fn gp_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(message) => message.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string previously returned by this library. Null is ignored.
///
/// # Safety
///
/// `string` must be null or a string returned by this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn gp_string_free(string: *mut c_char) {
    if !string.is_null() {
        drop(CString::from_raw(string));
    }
}

/// Parses and validates an inventory from `text`. `format` selects the
/// encoding: `"csv"` or `"json"`. On success stores a new handle in `*out`;
/// release it with `gp_inventory_free`.
///
/// # Safety
///
/// `text` and `format` must be null or NUL-terminated strings; `out` must be
/// null or point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn gp_inventory_parse(
    text: *const c_char,
    format: *const c_char,
    out: *mut *mut GpInventory,
) -> GpStatus {
    guarded(|| {
        if out.is_null() {
            set_error("`out` is null".to_string());
            return GpStatus::NullArgument;
        }
        *out = std::ptr::null_mut();
        let text = match text_argument(text, "text") {
            Ok(text) => text,
            Err(status) => return status,
        };
        let format = match text_argument(format, "format") {
            Ok(format) => format,
            Err(status) => return status,
        };
        let format: InventoryFormat = match format.parse() {
            Ok(format) => format,
            Err(err) => return fail(&err),
        };
        match parse_inventory(text, format) {
            Ok(inventory) => {
                *out = Box::into_raw(Box::new(GpInventory { inner: inventory }));
                clear_error();
                GpStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases an inventory handle. Null is ignored.
///
/// # Safety
///
/// `inventory` must be null or a handle from `gp_inventory_parse` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn gp_inventory_free(inventory: *mut GpInventory) {
    if !inventory.is_null() {
        drop(Box::from_raw(inventory));
    }
}

/// Number of servers in the inventory. Returns 0 for a null handle.
///
/// # Safety
///
/// `inventory` must be null or a live handle from `gp_inventory_parse`.
#[no_mangle]
pub unsafe extern "C" fn gp_inventory_server_count(inventory: *const GpInventory) -> usize {
    match inventory.as_ref() {
        Some(inventory) => inventory.inner.len(),
        None => 0,
    }
}

/// Writes the ids of servers whose utilization is strictly below `threshold`
/// as a JSON array of strings at `*out`. `threshold` must be a fraction in
/// [0, 1]. Release the string with `gp_string_free`.
///
/// # Safety
///
/// `inventory` must be null or a live handle from `gp_inventory_parse`;
/// `out` must be null or point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn gp_inventory_dead_json(
    inventory: *const GpInventory,
    threshold: f64,
    out: *mut *mut c_char,
) -> GpStatus {
    guarded(|| {
        if inventory.is_null() || out.is_null() {
            set_error("`inventory` or `out` is null".to_string());
            return GpStatus::NullArgument;
        }
        if !threshold.is_finite() || !(0.0..=1.0).contains(&threshold) {
            return fail(&Error::domain(format!(
                "dead threshold must be a fraction in [0, 1], got {threshold}"
            )));
        }
        let dead = (*inventory).inner.identify_dead(threshold);
        match serde_json::to_string(&dead) {
            Ok(json) => string_out(json, out),
            Err(err) => fail(&Error::from(err)),
        }
    })
}

/// Returns a handle to the built-in three-anchor power curve. Release it with
/// `gp_power_curve_free`.
#[no_mangle]
pub extern "C" fn gp_power_curve_default() -> *mut GpPowerCurve {
    Box::into_raw(Box::new(GpPowerCurve {
        inner: PowerCurve::default(),
    }))
}

/// Parses and validates a power curve from JSON. On success stores a new
/// handle in `*out`; release it with `gp_power_curve_free`.
///
/// # Safety
///
/// `json` must be null or a NUL-terminated string; `out` must be null or
/// point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn gp_power_curve_parse(
    json: *const c_char,
    out: *mut *mut GpPowerCurve,
) -> GpStatus {
    guarded(|| {
        if out.is_null() {
            set_error("`out` is null".to_string());
            return GpStatus::NullArgument;
        }
        *out = std::ptr::null_mut();
        let json = match text_argument(json, "json") {
            Ok(json) => json,
            Err(status) => return status,
        };
        match PowerCurve::from_json(json) {
            Ok(curve) => {
                *out = Box::into_raw(Box::new(GpPowerCurve { inner: curve }));
                clear_error();
                GpStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases a power curve handle. Null is ignored.
///
/// # Safety
///
/// `curve` must be null or a handle from `gp_power_curve_default` or
/// `gp_power_curve_parse` that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn gp_power_curve_free(curve: *mut GpPowerCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Evaluates the curve at `utilization` (a fraction in [0, 1]) and writes the
/// draw in watts to `*watts`.
///
/// # Safety
///
/// `curve` must be null or a live power curve handle; `watts` must be null
/// or point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn gp_power_curve_watts_at(
    curve: *const GpPowerCurve,
    utilization: f64,
    watts: *mut f64,
) -> GpStatus {
    guarded(|| {
        if curve.is_null() || watts.is_null() {
            set_error("`curve` or `watts` is null".to_string());
            return GpStatus::NullArgument;
        }
        match (*curve).inner.power_at(utilization) {
            Ok(value) => {
                *watts = value;
                clear_error();
                GpStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Runs the full pipeline on `inventory` with default rules, ratios, targets,
/// and curve, then renders the energy report. `mode` is `"fixed_ratio"` (or
/// the short form `"fixed"`) or `"packed"`; `format` is `"text"`, `"csv"`, or
/// `"json"`. Writes the rendered report to `*out`; release it with
/// `gp_string_free`.
///
/// # Safety
///
/// `inventory` must be null or a live handle from `gp_inventory_parse`;
/// `mode` and `format` must be null or NUL-terminated strings; `out` must be
/// null or point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn gp_report_render(
    inventory: *const GpInventory,
    mode: *const c_char,
    format: *const c_char,
    out: *mut *mut c_char,
) -> GpStatus {
    guarded(|| {
        if inventory.is_null() || out.is_null() {
            set_error("`inventory` or `out` is null".to_string());
            return GpStatus::NullArgument;
        }
        *out = std::ptr::null_mut();
        let mode = match text_argument(mode, "mode") {
            Ok(mode) => mode,
            Err(status) => return status,
        };
        let mode = match mode {
            "fixed_ratio" | "fixed" => PlanMode::FixedRatio,
            "packed" => PlanMode::Packed,
            other => {
                set_error(format!(
                    "unknown plan mode `{other}`; expected `fixed_ratio` or `packed`"
                ));
                return GpStatus::InvalidArgument;
            }
        };
        let format = match text_argument(format, "format") {
            Ok(format) => format,
            Err(status) => return status,
        };
        let format: OutputFormat = match format.parse() {
            Ok(format) => format,
            Err(err) => return fail(&err),
        };
        let options = PipelineOptions {
            mode,
            ..PipelineOptions::default()
        };
        let report = match run_pipeline(&(*inventory).inner, &options) {
            Ok(report) => report,
            Err(err) => return fail(&err),
        };
        match render(&report, format) {
            Ok(text) => string_out(text, out),
            Err(err) => fail(&err),
        }
    })
}
