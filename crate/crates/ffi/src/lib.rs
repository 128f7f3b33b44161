//! C ABI over the `asian-boundary` solvers.
//!
//! Every fallible function returns an [`AbStatus`]; on failure a message is
//! available from [`ab_last_error`] on the calling thread. Results are
//! written through out-pointers only on success. Boundaries are returned as
//! opaque [`AbBoundary`] handles released with [`ab_boundary_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use asian_boundary::boundary::BoundaryCurve;
use asian_boundary::expiry::{expiry_limit, h_star};
use asian_boundary::front_fixing::{self, FrontFixingOptions};
use asian_boundary::integral::{self, DEFAULT_QUAD_NODES};
use asian_boundary::{AveragingSpec, Error, GridSpec, ModelParams, OptionKind};

pub const AB_AVERAGING_ARITHMETIC: i32 = 0;
pub const AB_AVERAGING_GEOMETRIC: i32 = 1;
pub const AB_AVERAGING_WEIGHTED: i32 = 2;

pub const AB_KIND_CALL: i32 = 0;
pub const AB_KIND_PUT: i32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Unsupported = 4,
    NoConvergence = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbParams {
    pub r: f64,
    pub q: f64,
    pub sigma: f64,
    pub maturity: f64,
}

/// `method` is one of the `AB_AVERAGING_*` constants; `lambda` is read only
/// for weighted averaging.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbAveraging {
    pub method: i32,
    pub lambda: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbGrid {
    pub n: usize,
    pub m: usize,
    pub domain_length: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AbPrice {
    pub european: f64,
    pub premium: f64,
    pub total: f64,
}

/// Opaque early exercise boundary.
pub struct AbBoundary {
    curve: BoundaryCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(AbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidParameter { .. } => AbStatus::InvalidArgument,
            Error::Domain(_) | Error::BoundaryCoverage { .. } => AbStatus::Domain,
            Error::Unsupported(_) => AbStatus::Unsupported,
            Error::RootNotBracketed { .. }
            | Error::FixedPointDivergence { .. }
            | Error::PsorDivergence { .. } => AbStatus::NoConvergence,
            _ => AbStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AbStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, mapping errors and panics to status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> AbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            AbStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            AbStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for reads.
unsafe fn read<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: guaranteed by the caller.
    unsafe { ptr.as_ref() }.ok_or_else(|| null(what))
}

/// # Safety
/// `ptr` must be null or valid for writes.
unsafe fn write<T>(ptr: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and valid for writes per the caller.
    unsafe { ptr.write(value) };
    Ok(())
}

fn model(p: &AbParams) -> Result<ModelParams, Failure> {
    Ok(ModelParams::new(p.r, p.q, p.sigma, p.maturity)?)
}

fn averaging(a: &AbAveraging) -> Result<AveragingSpec, Failure> {
    let spec = match a.method {
        AB_AVERAGING_ARITHMETIC => AveragingSpec::Arithmetic,
        AB_AVERAGING_GEOMETRIC => AveragingSpec::Geometric,
        AB_AVERAGING_WEIGHTED => AveragingSpec::weighted(a.lambda)?,
        other => {
            return Err(Failure(
                AbStatus::InvalidArgument,
                format!("unknown averaging method {other}"),
            ))
        }
    };
    Ok(spec)
}

fn kind(k: i32) -> Result<OptionKind, Failure> {
    match k {
        AB_KIND_CALL => Ok(OptionKind::Call),
        AB_KIND_PUT => Ok(OptionKind::Put),
        other => Err(Failure(AbStatus::InvalidArgument, format!("unknown option kind {other}"))),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Slope constant `h*` of the near-expiry boundary expansion.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ab_h_star(out: *mut f64) -> AbStatus {
    guard(|| unsafe { write(out, h_star(), "out") })
}

/// Boundary position `x*_T` at expiry.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ab_expiry_limit(
    params: *const AbParams,
    avg: *const AbAveraging,
    option_kind: i32,
    out: *mut f64,
) -> AbStatus {
    guard(|| unsafe {
        let p = model(read(params, "params")?)?;
        let a = averaging(read(avg, "avg")?)?;
        let lim = expiry_limit(&p, a, kind(option_kind)?)?;
        write(out, lim.x_star_t, "out")
    })
}

/// European part `e^{-qT} E_t[(rho (1 - x_T))^+]` at state `(t, x)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ab_european_value(
    params: *const AbParams,
    avg: *const AbAveraging,
    option_kind: i32,
    t: f64,
    x: f64,
    out: *mut f64,
) -> AbStatus {
    guard(|| unsafe {
        let p = model(read(params, "params")?)?;
        let a = averaging(read(avg, "avg")?)?;
        let v = integral::european_value(t, x, &p, a, kind(option_kind)?)?;
        write(out, v, "out")
    })
}

/// Solves for the call boundary with the front-fixing scheme. On success
/// `*out` receives a handle owned by the caller.
///
/// # Safety
/// Pointers must be valid; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ab_boundary_solve(
    params: *const AbParams,
    avg: *const AbAveraging,
    grid: *const AbGrid,
    out: *mut *mut AbBoundary,
) -> AbStatus {
    guard(|| unsafe {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = model(read(params, "params")?)?;
        let a = averaging(read(avg, "avg")?)?;
        let g = read(grid, "grid")?;
        let g = GridSpec::new(g.n, g.m, g.domain_length)?;
        let report = front_fixing::solve(&p, a, &g, &FrontFixingOptions::default())?;
        let handle = Box::new(AbBoundary { curve: report.boundary });
        write(out, Box::into_raw(handle), "out")
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `handle` must be null or come from [`ab_boundary_solve`] and not be
/// freed twice.
#[no_mangle]
pub unsafe extern "C" fn ab_boundary_free(handle: *mut AbBoundary) {
    if !handle.is_null() {
        // SAFETY: the handle was created by Box::into_raw in ab_boundary_solve.
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Number of boundary nodes.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ab_boundary_len(handle: *const AbBoundary, out: *mut usize) -> AbStatus {
    guard(|| unsafe {
        let h = read(handle, "handle")?;
        write(out, h.curve.len(), "out")
    })
}

/// Copies node times `t` and values `x*_t` in increasing `t`. Fails with
/// `BUFFER_TOO_SMALL` when `capacity` is below the node count.
///
/// # Safety
/// `t_out` and `x_out` must be valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn ab_boundary_copy(
    handle: *const AbBoundary,
    t_out: *mut f64,
    x_out: *mut f64,
    capacity: usize,
) -> AbStatus {
    guard(|| unsafe {
        let h = read(handle, "handle")?;
        if t_out.is_null() || x_out.is_null() {
            return Err(null("output buffer"));
        }
        let len = h.curve.len();
        if capacity < len {
            return Err(Failure(
                AbStatus::BufferTooSmall,
                format!("need {len} slots, got {capacity}"),
            ));
        }
        // SAFETY: both buffers hold at least `len` elements per the caller.
        let (ts, xs) = (
            std::slice::from_raw_parts_mut(t_out, len),
            std::slice::from_raw_parts_mut(x_out, len),
        );
        for (k, node) in h.curve.nodes().enumerate() {
            ts[len - 1 - k] = node.t;
            xs[len - 1 - k] = node.x_star;
        }
        Ok(())
    })
}

/// `x*_t`, linear between nodes.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ab_boundary_x_star(handle: *const AbBoundary, t: f64, out: *mut f64) -> AbStatus {
    guard(|| unsafe {
        let h = read(handle, "handle")?;
        write(out, h.curve.x_star(t)?, "out")
    })
}

/// Smallest boundary value and its time.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ab_boundary_min(handle: *const AbBoundary, t_out: *mut f64, x_out: *mut f64) -> AbStatus {
    guard(|| unsafe {
        let h = read(handle, "handle")?;
        let node = h.curve.min_x_star();
        write(t_out, node.t, "t_out")?;
        write(x_out, node.x_star, "x_out")
    })
}

/// Value decomposition at `(t, x)` using the boundary in `handle`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ab_price(
    handle: *const AbBoundary,
    params: *const AbParams,
    avg: *const AbAveraging,
    option_kind: i32,
    t: f64,
    x: f64,
    out: *mut AbPrice,
) -> AbStatus {
    guard(|| unsafe {
        let h = read(handle, "handle")?;
        let p = model(read(params, "params")?)?;
        let a = averaging(read(avg, "avg")?)?;
        let d = integral::price(t, x, &h.curve, &p, a, kind(option_kind)?, DEFAULT_QUAD_NODES)?;
        write(
            out,
            AbPrice {
                european: d.european,
                premium: d.premium,
                total: d.total,
            },
            "out",
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn error_mapping() {
        let f: Failure = Error::Unsupported("x".into()).into();
        assert_eq!(f.0, AbStatus::Unsupported);
        let f: Failure = Error::FixedPointDivergence { level: 1, residual: 1.0 }.into();
        assert_eq!(f.0, AbStatus::NoConvergence);
    }

    #[test]
    fn panics_become_status() {
        assert_eq!(guard(|| panic!("boom")), AbStatus::Panic);
        let msg = unsafe { CStr::from_ptr(ab_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }

    #[test]
    fn version_string() {
        let v = unsafe { CStr::from_ptr(ab_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
