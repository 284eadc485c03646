//! C ABI over `mathieu_floquet`.
//!
//! Every fallible function returns an [`MfStatus`]; on failure a message is
//! available from [`mf_last_error_message`] on the same thread. Results are
//! written through caller-supplied out-pointers. Handles are opaque and must
//! be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mathieu_floquet::hill;
use mathieu_floquet::monodromy::{self, IntegratorConfig};
use mathieu_floquet::wkb;
use mathieu_floquet::{Error, FloquetResult, MathieuParams, PeriodicBranch, PeriodicPart};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    InvalidConfig = 3,
    StiffnessGuard = 4,
    IntegrationFailed = 5,
    ComplexMultipliers = 6,
    NegativeMultiplier = 7,
    NonPeriodic = 8,
    NoConvergence = 9,
    DomainError = 10,
    TurningPoint = 11,
    BufferTooSmall = 12,
    Panic = 13,
    Other = 14,
}

/// Values accepted for the `branch` argument of [`mf_periodic_part`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfBranch {
    Max = 0,
    Min = 1,
}

/// Physical parameters `(m, gamma, epsilon, omega)`.
pub struct MfParams(MathieuParams);

/// Monodromy matrix with its multipliers and exponents.
pub struct MfFloquet(FloquetResult);

/// Sampled periodic part of a Floquet solution.
pub struct MfPeriodic(PeriodicPart);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> MfStatus {
    match err {
        Error::InvalidParams(_) => MfStatus::InvalidParams,
        Error::InvalidConfig(_) => MfStatus::InvalidConfig,
        Error::StiffnessGuard { .. } => MfStatus::StiffnessGuard,
        Error::StepUnderflow { .. } | Error::MaxStepsExceeded { .. } => MfStatus::IntegrationFailed,
        Error::ComplexMultipliers { .. } => MfStatus::ComplexMultipliers,
        Error::NegativeMultiplier { .. } => MfStatus::NegativeMultiplier,
        Error::NonPeriodic { .. } | Error::NormalizationUndefined { .. } => MfStatus::NonPeriodic,
        Error::NoConvergence { .. } | Error::SingularTruncation { .. } => MfStatus::NoConvergence,
        Error::DomainError { .. } => MfStatus::DomainError,
        Error::TurningPoint { .. } => MfStatus::TurningPoint,
        _ => MfStatus::Other,
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), (MfStatus, String)>>(body: F) -> MfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MfStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside mathieu_floquet".into());
            MfStatus::Panic
        }
    }
}

fn lib_err(err: Error) -> (MfStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (MfStatus, String) {
    (MfStatus::NullPointer, format!("{name} is null"))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Validates and stores parameters. `wkb_valid` is not required.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mf_params_new(
    m: f64,
    gamma: f64,
    epsilon: f64,
    omega: f64,
    out: *mut *mut MfParams,
) -> MfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = MathieuParams::new(m, gamma, epsilon, omega).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MfParams(params)));
        Ok(())
    })
}

/// # Safety
/// `params` must be NULL or a handle from [`mf_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mf_params_free(params: *mut MfParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// `gamma^2/4 > m |epsilon|`. False for a NULL handle.
///
/// # Safety
/// `params` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_params_wkb_valid(params: *const MfParams) -> bool {
    params.as_ref().is_some_and(|p| p.0.wkb_valid())
}

/// Integrates over one period and extracts multipliers and exponents.
/// `rel_tol <= 0` selects the default tolerance; `stiff` switches to the
/// fixed-step implicit integrator.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_floquet_compute(
    params: *const MfParams,
    rel_tol: f64,
    stiff: bool,
    out: *mut *mut MfFloquet,
) -> MfStatus {
    guard(|| {
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = IntegratorConfig::default().with_stiff(stiff);
        if rel_tol > 0.0 {
            cfg = cfg.with_rel_tol(rel_tol);
        }
        let result = monodromy::floquet(&params.0, &cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MfFloquet(result)));
        Ok(())
    })
}

/// # Safety
/// `floquet` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_floquet_free(floquet: *mut MfFloquet) {
    if !floquet.is_null() {
        drop(Box::from_raw(floquet));
    }
}

/// # Safety
/// `floquet` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_floquet_exponents(
    floquet: *const MfFloquet,
    lambda_max: *mut f64,
    lambda_min: *mut f64,
) -> MfStatus {
    guard(|| {
        let f = floquet.as_ref().ok_or_else(|| null("floquet"))?;
        if lambda_max.is_null() || lambda_min.is_null() {
            return Err(null("output"));
        }
        *lambda_max = f.0.lambda_max;
        *lambda_min = f.0.lambda_min;
        Ok(())
    })
}

/// Writes the monodromy matrix row-major into `out[0..4]`.
///
/// # Safety
/// `floquet` must be a live handle and `out` must have room for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn mf_floquet_monodromy(floquet: *const MfFloquet, out: *mut f64) -> MfStatus {
    guard(|| {
        let f = floquet.as_ref().ok_or_else(|| null("floquet"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = f.0.monodromy;
        ptr::copy_nonoverlapping([m[0][0], m[0][1], m[1][0], m[1][1]].as_ptr(), out, 4);
        Ok(())
    })
}

/// Writes `rho_1 >= rho_2` into `out[0..2]`.
///
/// # Safety
/// `floquet` must be a live handle and `out` must have room for 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn mf_floquet_multipliers(floquet: *const MfFloquet, out: *mut f64) -> MfStatus {
    guard(|| {
        let f = floquet.as_ref().ok_or_else(|| null("floquet"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(f.0.multipliers.as_ptr(), out, 2);
        Ok(())
    })
}

/// `ln det M` and `|det M e^{gamma T/m} - 1|`.
///
/// # Safety
/// `floquet` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_floquet_abel(floquet: *const MfFloquet, log_det: *mut f64, residual: *mut f64) -> MfStatus {
    guard(|| {
        let f = floquet.as_ref().ok_or_else(|| null("floquet"))?;
        if log_det.is_null() || residual.is_null() {
            return Err(null("output"));
        }
        *log_det = f.0.log_det;
        *residual = f.0.abel_residual;
        Ok(())
    })
}

/// Converged `Delta(0)`. `tol <= 0` selects the default tolerance.
///
/// # Safety
/// `params` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_hill_delta0(
    params: *const MfParams,
    tol: f64,
    delta0: *mut f64,
    truncation_n: *mut usize,
) -> MfStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if delta0.is_null() || truncation_n.is_null() {
            return Err(null("output"));
        }
        let tol = if tol > 0.0 { tol } else { hill::DEFAULT_HILL_TOL };
        let d = hill::delta0(&p.0, tol).map_err(lib_err)?;
        *delta0 = d.delta0;
        *truncation_n = d.truncation_n;
        Ok(())
    })
}

/// Exponents implied by `Delta(0)`. `tol <= 0` selects the default tolerance.
///
/// # Safety
/// `params` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_hill_exponents(
    params: *const MfParams,
    tol: f64,
    lambda_max: *mut f64,
    lambda_min: *mut f64,
) -> MfStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if lambda_max.is_null() || lambda_min.is_null() {
            return Err(null("output"));
        }
        let tol = if tol > 0.0 { tol } else { hill::DEFAULT_HILL_TOL };
        let h = hill::hill(&p.0, tol).map_err(lib_err)?;
        *lambda_max = h.lambda_max_hill;
        *lambda_min = h.lambda_min_hill;
        Ok(())
    })
}

/// Leading-order predictions `(-m epsilon^2/(2 gamma^3), -gamma/m)`.
///
/// # Safety
/// `params` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn mf_wkb_exponents(
    params: *const MfParams,
    lambda_max: *mut f64,
    lambda_min: *mut f64,
) -> MfStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if lambda_max.is_null() || lambda_min.is_null() {
            return Err(null("output"));
        }
        let (max, min) = wkb::wkb_exponents(&p.0);
        *lambda_max = max;
        *lambda_min = min;
        Ok(())
    })
}

/// Samples the periodic part for `branch` (an [`MfBranch`] value) on
/// `grid_len` points.
///
/// # Safety
/// `params` and `floquet` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mf_periodic_part(
    params: *const MfParams,
    floquet: *const MfFloquet,
    branch: u32,
    grid_len: usize,
    stiff: bool,
    out: *mut *mut MfPeriodic,
) -> MfStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let f = floquet.as_ref().ok_or_else(|| null("floquet"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let branch = match branch {
            b if b == MfBranch::Max as u32 => PeriodicBranch::Max,
            b if b == MfBranch::Min as u32 => PeriodicBranch::Min,
            other => return Err((MfStatus::InvalidConfig, format!("unknown branch {other}"))),
        };
        let cfg = IntegratorConfig::default().with_stiff(stiff);
        let part = monodromy::periodic_part(&p.0, &f.0, branch, grid_len, &cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MfPeriodic(part)));
        Ok(())
    })
}

/// Number of samples; 0 for a NULL handle.
///
/// # Safety
/// `periodic` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_periodic_len(periodic: *const MfPeriodic) -> usize {
    periodic.as_ref().map_or(0, |p| p.0.values.len())
}

/// Copies the grid and samples into caller buffers of length `len`, which
/// must be at least [`mf_periodic_len`]. Either buffer may be NULL to skip
/// it.
///
/// # Safety
/// `periodic` must be a live handle; non-NULL buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mf_periodic_copy(
    periodic: *const MfPeriodic,
    grid: *mut f64,
    values: *mut f64,
    len: usize,
    normalization: *mut f64,
) -> MfStatus {
    guard(|| {
        let p = periodic.as_ref().ok_or_else(|| null("periodic"))?;
        let n = p.0.values.len();
        if len < n {
            return Err((MfStatus::BufferTooSmall, format!("buffer holds {len} values, need {n}")));
        }
        if !grid.is_null() {
            ptr::copy_nonoverlapping(p.0.grid.as_ptr(), grid, n);
        }
        if !values.is_null() {
            ptr::copy_nonoverlapping(p.0.values.as_ptr(), values, n);
        }
        if !normalization.is_null() {
            *normalization = p.0.normalization;
        }
        Ok(())
    })
}

/// # Safety
/// `periodic` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_periodic_free(periodic: *mut MfPeriodic) {
    if !periodic.is_null() {
        drop(Box::from_raw(periodic));
    }
}
