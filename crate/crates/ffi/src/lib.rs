//! C ABI for `photonsub`.
//!
//! Objects are opaque and owned by the caller once returned: every
//! `*_new` or out-parameter handle must be released with the matching
//! `*_free`. Functions return a [`PsStatus`]; on failure the message of the
//! last error on the calling thread is available from
//! [`ps_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use photonsub::measures::{log_negativity, EntanglementReport};
use photonsub::protocols::{run_bruteforce_oracle, run_realistic, ConcentrationOutcome, DetectorModel, LocalOp, ProtocolParams};
use photonsub::{optimize_displacement, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    /// A parameter violates its guard or an argument is out of range.
    InvalidArgument = 2,
    /// Both detectors click with negligible probability.
    ZeroSuccess = 3,
    /// The four-mode oracle refused the input (mixed state or cutoff too large).
    Unsupported = 4,
    /// A numerical check failed (positivity, Hermiticity, optimizer bracket).
    Numerical = 5,
    BufferTooSmall = 6,
    /// An unexpected internal failure was caught at the boundary.
    Internal = 7,
}

/// Detector model selector for [`ps_params_set_detector_model`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsDetectorModel {
    AncillaLoss = 0,
    Reparametrized = 1,
    ReparametrizedWithoutLoss = 2,
}

/// Protocol parameters.
pub struct PsParams {
    inner: ProtocolParams,
}

/// Result of one protocol run.
pub struct PsOutcome {
    outcome: ConcentrationOutcome,
    report: EntanglementReport,
}

/// Optimal real displacement `α = −β`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PsOptimum {
    pub alpha_opt: f64,
    pub e_n_at_opt: f64,
    pub p_succ_at_opt: f64,
    pub iterations: u32,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(err: &Error) -> PsStatus {
    match err {
        Error::ZeroSuccess { .. } => PsStatus::ZeroSuccess,
        Error::MixedInput { .. } | Error::MemoryGuard { .. } => PsStatus::Unsupported,
        Error::NotPsd { .. }
        | Error::NotHermitian { .. }
        | Error::NonFinite
        | Error::NoInteriorMaximum { .. }
        | Error::ZeroNorm
        | Error::NotNormalized { .. } => PsStatus::Numerical,
        _ => PsStatus::InvalidArgument,
    }
}

fn fail(status: PsStatus, message: &str) -> PsStatus {
    set_last_error(message);
    status
}

/// Runs `f`, translating library errors and panics into status codes.
fn guarded<F>(f: F) -> PsStatus
where
    F: FnOnce() -> Result<(), PsStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PsStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(PsStatus::Internal, "internal panic"),
    }
}

fn lib_err(err: Error) -> PsStatus {
    fail(status_of(&err), &format!("{err} ({})", err.tag()))
}

fn null() -> PsStatus {
    fail(PsStatus::NullPointer, "null pointer argument")
}

unsafe fn params_mut<'a>(p: *mut PsParams) -> Result<&'a mut PsParams, PsStatus> {
    p.as_mut().ok_or_else(null)
}

/// Creates parameters with perfect detectors, no loss, no local operation and
/// cutoff 10. Values are checked when a protocol runs.
#[no_mangle]
pub extern "C" fn ps_params_new(lambda: f64, reflectance: f64) -> *mut PsParams {
    Box::into_raw(Box::new(PsParams { inner: ProtocolParams::new(lambda, reflectance) }))
}

/// # Safety
/// `params` must come from [`ps_params_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ps_params_free(params: *mut PsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ps_params_set_eta(params: *mut PsParams, eta: f64) -> PsStatus {
    guarded(|| {
        params_mut(params)?.inner.eta = eta;
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ps_params_set_nu(params: *mut PsParams, nu: f64) -> PsStatus {
    guarded(|| {
        params_mut(params)?.inner.nu = nu;
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ps_params_set_cutoff(params: *mut PsParams, cutoff: u32) -> PsStatus {
    guarded(|| {
        params_mut(params)?.inner.cutoff = cutoff as usize;
        Ok(())
    })
}

/// Local displacements `D_A(α) ⊗ D_B(β)`.
///
/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ps_params_set_displacement(
    params: *mut PsParams,
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
) -> PsStatus {
    guarded(|| {
        params_mut(params)?.inner.local_op = LocalOp::Displacement {
            alpha: Complex64::new(alpha_re, alpha_im),
            beta: Complex64::new(beta_re, beta_im),
        };
        Ok(())
    })
}

/// Equal local squeezing `S_A(s) ⊗ S_B(s)`.
///
/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ps_params_set_squeezing(params: *mut PsParams, s: f64) -> PsStatus {
    guarded(|| {
        params_mut(params)?.inner.local_op = LocalOp::Squeezing { s };
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ps_params_clear_local_op(params: *mut PsParams) -> PsStatus {
    guarded(|| {
        params_mut(params)?.inner.local_op = LocalOp::None;
        Ok(())
    })
}

/// `model` takes a [`PsDetectorModel`] value.
///
/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ps_params_set_detector_model(params: *mut PsParams, model: u32) -> PsStatus {
    guarded(|| {
        let params = params_mut(params)?;
        params.inner.detector_model = match model {
            m if m == PsDetectorModel::AncillaLoss as u32 => DetectorModel::AncillaLoss,
            m if m == PsDetectorModel::Reparametrized as u32 => {
                DetectorModel::Reparametrized { keep_transmission_loss: true }
            }
            m if m == PsDetectorModel::ReparametrizedWithoutLoss as u32 => {
                DetectorModel::Reparametrized { keep_transmission_loss: false }
            }
            other => return Err(fail(PsStatus::InvalidArgument, &format!("unknown detector model {other}"))),
        };
        Ok(())
    })
}

/// Checks every guard without running the protocol.
///
/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ps_params_validate(params: *const PsParams) -> PsStatus {
    guarded(|| params.as_ref().ok_or_else(null)?.inner.validate().map_err(lib_err))
}

unsafe fn run_with(
    params: *const PsParams,
    out: *mut *mut PsOutcome,
    runner: fn(&ProtocolParams) -> photonsub::Result<ConcentrationOutcome>,
) -> PsStatus {
    guarded(|| {
        let params = params.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let outcome = runner(&params.inner).map_err(lib_err)?;
        let report = log_negativity(&outcome.rho_out_normalized).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PsOutcome { outcome, report }));
        Ok(())
    })
}

/// Runs the realistic protocol. On success `*out` receives a new outcome.
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_run_realistic(params: *const PsParams, out: *mut *mut PsOutcome) -> PsStatus {
    run_with(params, out, run_realistic)
}

/// Runs the four-mode oracle (pure input, cutoff at most 10).
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_run_bruteforce(params: *const PsParams, out: *mut *mut PsOutcome) -> PsStatus {
    run_with(params, out, run_bruteforce_oracle)
}

/// # Safety
/// `outcome` must come from a run function and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ps_outcome_free(outcome: *mut PsOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// # Safety
/// `outcome` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_outcome_success_probability(outcome: *const PsOutcome, value: *mut f64) -> PsStatus {
    guarded(|| {
        let o = outcome.as_ref().ok_or_else(null)?;
        *value.as_mut().ok_or_else(null)? = o.outcome.success_probability;
        Ok(())
    })
}

/// Logarithmic negativity (base 2) of the normalized output.
///
/// # Safety
/// `outcome` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_outcome_log_negativity(outcome: *const PsOutcome, value: *mut f64) -> PsStatus {
    guarded(|| {
        let o = outcome.as_ref().ok_or_else(null)?;
        *value.as_mut().ok_or_else(null)? = o.report.log_negativity;
        Ok(())
    })
}

/// Side length `(cutoff + 1)²` of the output density matrix, or 0 for null.
///
/// # Safety
/// `outcome` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ps_outcome_dimension(outcome: *const PsOutcome) -> usize {
    outcome.as_ref().map_or(0, |o| o.outcome.rho_out_normalized.dim())
}

/// Copies the output density matrix in row-major order into `re` and `im`,
/// each holding at least `len = dimension²` doubles. `normalized` selects
/// the trace-one state; otherwise the trace equals the success probability.
///
/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ps_outcome_density_matrix(
    outcome: *const PsOutcome,
    normalized: bool,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> PsStatus {
    guarded(|| {
        let o = outcome.as_ref().ok_or_else(null)?;
        if re.is_null() || im.is_null() {
            return Err(null());
        }
        let rho = if normalized { &o.outcome.rho_out_normalized } else { &o.outcome.rho_out_unnormalized };
        let d = rho.dim();
        if len < d * d {
            return Err(fail(PsStatus::BufferTooSmall, &format!("need {} entries, got {len}", d * d)));
        }
        let re = std::slice::from_raw_parts_mut(re, d * d);
        let im = std::slice::from_raw_parts_mut(im, d * d);
        let m = rho.matrix();
        for i in 0..d {
            for j in 0..d {
                re[i * d + j] = m[(i, j)].re;
                im[i * d + j] = m[(i, j)].im;
            }
        }
        Ok(())
    })
}

/// Optimizes the real displacement `α = −β ∈ (0, 1]`; the local operation in
/// `params` is ignored.
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_optimize_displacement(params: *const PsParams, out: *mut PsOptimum) -> PsStatus {
    guarded(|| {
        let params = params.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        let o = optimize_displacement(&params.inner).map_err(lib_err)?;
        *out = PsOptimum {
            alpha_opt: o.alpha_opt,
            e_n_at_opt: o.e_n_at_opt,
            p_succ_at_opt: o.p_succ_at_opt,
            iterations: o.iterations as u32,
            bracket_lo: o.bracket.0,
            bracket_hi: o.bracket.1,
        };
        Ok(())
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
