//! C interface to `safe-explore`.
//!
//! Models are exposed through opaque handles. Every fallible call returns an
//! [`SeStatus`]; on failure a message is kept per thread and can be read with
//! [`se_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safe_explore::acquisition::{self, OptimizerConfig};
use safe_explore::safety::BetaSchedule;
use safe_explore::{BoxDomain, Error, GpState, NoiseModel, RbfKernel, SafetyModel};

/// Result codes shared by all fallible functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    OutOfDomain = 4,
    Numerical = 5,
    EmptySafeSet = 6,
    OutOfRange = 7,
    Panic = 8,
    Internal = 9,
}

/// Gaussian-process constraint model.
pub struct SeGp {
    state: GpState,
}

/// Confidence parameter and safe seed.
pub struct SeSafety {
    model: SafetyModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SeStatus {
    match err {
        Error::DimensionMismatch { .. } => SeStatus::DimensionMismatch,
        Error::OutOfDomain(_) => SeStatus::OutOfDomain,
        Error::InvalidParameter(_) | Error::Config(_) => SeStatus::InvalidArgument,
        Error::NumericalDegeneracy { .. } | Error::DegenerateStatistics(_) => SeStatus::Numerical,
        Error::EmptySafeSet(_) => SeStatus::EmptySafeSet,
        Error::OutOfRange { .. } => SeStatus::OutOfRange,
        _ => SeStatus::Internal,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SeStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SeStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside safe-explore".into());
            SeStatus::Panic
        }
    }
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn mut_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

fn check_dim(gp: &GpState, dim: usize) -> Result<(), Fail> {
    if gp.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: gp.dim(),
            got: dim,
        }
        .into());
    }
    Ok(())
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn se_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates an empty model on the box `[lower, upper]` with an isotropic RBF
/// kernel and homoskedastic noise.
///
/// # Safety
/// `lower` and `upper` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn se_gp_new(
    dim: usize,
    lower: *const f64,
    upper: *const f64,
    lengthscale: f64,
    outputscale: f64,
    noise_variance: f64,
    out: *mut *mut SeGp,
) -> SeStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        *out = ptr::null_mut();
        let lower = slice_arg(lower, dim, "lower")?.to_vec();
        let upper = slice_arg(upper, dim, "upper")?.to_vec();
        let domain = BoxDomain::new(lower, upper)?;
        let kernel = RbfKernel::isotropic(lengthscale, outputscale)?;
        let noise = NoiseModel::homoskedastic(noise_variance)?;
        let state = GpState::new(kernel, noise, domain)?;
        *out = Box::into_raw(Box::new(SeGp { state }));
        Ok(())
    })
}

/// # Safety
/// `gp` must come from [`se_gp_new`] and not be used afterwards. NULL is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn se_gp_free(gp: *mut SeGp) {
    if !gp.is_null() {
        drop(Box::from_raw(gp));
    }
}

/// Number of observations held by the model, 0 for NULL.
///
/// # Safety
/// `gp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn se_gp_len(gp: *const SeGp) -> usize {
    gp.as_ref().map_or(0, |g| g.state.len())
}

/// Adds the observation `y` at `x`. On failure the model is unchanged.
///
/// # Safety
/// `gp` must be a live handle and `x` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn se_gp_condition(gp: *mut SeGp, x: *const f64, dim: usize, y: f64) -> SeStatus {
    guard(|| {
        let gp = mut_arg(gp, "gp")?;
        check_dim(&gp.state, dim)?;
        let x = slice_arg(x, dim, "x")?;
        gp.state = gp.state.condition(x, y)?;
        Ok(())
    })
}

/// Posterior mean and variance at `x`.
///
/// # Safety
/// `gp` must be a live handle, `x` must point to `dim` doubles and the
/// outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn se_gp_posterior(
    gp: *const SeGp,
    x: *const f64,
    dim: usize,
    mean: *mut f64,
    variance: *mut f64,
) -> SeStatus {
    guard(|| {
        let gp = ref_arg(gp, "gp")?;
        check_dim(&gp.state, dim)?;
        let x = slice_arg(x, dim, "x")?;
        let mean = mut_arg(mean, "mean")?;
        let variance = mut_arg(variance, "variance")?;
        (*mean, *variance) = gp.state.posterior(x);
        Ok(())
    })
}

/// Safety model with a constant `beta` and threshold 0.
///
/// # Safety
/// `seed` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn se_safety_new(
    seed: *const f64,
    dim: usize,
    beta: f64,
    out: *mut *mut SeSafety,
) -> SeStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        *out = ptr::null_mut();
        let seed = slice_arg(seed, dim, "seed")?.to_vec();
        let model = SafetyModel::new(seed).with_beta(BetaSchedule::Constant(beta))?;
        *out = Box::into_raw(Box::new(SeSafety { model }));
        Ok(())
    })
}

/// # Safety
/// `safety` must come from [`se_safety_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn se_safety_free(safety: *mut SeSafety) {
    if !safety.is_null() {
        drop(Box::from_raw(safety));
    }
}

/// Whether `x` is classified safe at iteration `n`.
///
/// # Safety
/// Handles must be live, `x` must point to `dim` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn se_is_safe(
    gp: *const SeGp,
    safety: *const SeSafety,
    n: usize,
    x: *const f64,
    dim: usize,
    out: *mut bool,
) -> SeStatus {
    guard(|| {
        let gp = ref_arg(gp, "gp")?;
        let safety = ref_arg(safety, "safety")?;
        check_dim(&gp.state, dim)?;
        let x = slice_arg(x, dim, "x")?;
        *mut_arg(out, "out")? = safety.model.is_safe(&gp.state, n, x);
        Ok(())
    })
}

/// Mutual information between an observation at `x` and the safety of `z`.
///
/// # Safety
/// `gp` must be live, `x` and `z` must point to `dim` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn se_mutual_info(
    gp: *const SeGp,
    x: *const f64,
    z: *const f64,
    dim: usize,
    out: *mut f64,
) -> SeStatus {
    guard(|| {
        let gp = ref_arg(gp, "gp")?;
        check_dim(&gp.state, dim)?;
        let x = slice_arg(x, dim, "x")?;
        let z = slice_arg(z, dim, "z")?;
        *mut_arg(out, "out")? = acquisition::mutual_info(&gp.state, x, z);
        Ok(())
    })
}

/// Next evaluation point with the default optimizer settings. `x_out` and
/// `z_out` receive `dim` doubles each; `value_out` may be NULL.
///
/// # Safety
/// Handles must be live and the output buffers must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn se_select_next(
    gp: *const SeGp,
    safety: *const SeSafety,
    n: usize,
    rng_seed: u64,
    x_out: *mut f64,
    z_out: *mut f64,
    dim: usize,
    value_out: *mut f64,
) -> SeStatus {
    guard(|| {
        let gp = ref_arg(gp, "gp")?;
        let safety = ref_arg(safety, "safety")?;
        check_dim(&gp.state, dim)?;
        if x_out.is_null() {
            return Err(Fail::Null("x_out"));
        }
        if z_out.is_null() {
            return Err(Fail::Null("z_out"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let choice = acquisition::select_next(
            &gp.state,
            &safety.model,
            n,
            gp.state.domain(),
            &OptimizerConfig::default(),
            &mut rng,
        )?;
        slice::from_raw_parts_mut(x_out, dim).copy_from_slice(&choice.x);
        slice::from_raw_parts_mut(z_out, dim).copy_from_slice(&choice.z);
        if let Some(v) = value_out.as_mut() {
            *v = choice.value;
        }
        Ok(())
    })
}

/// Exact binary entropy (nats) of the safety indicator for `mean / std`.
#[no_mangle]
pub extern "C" fn se_entropy_exact(ratio: f64) -> f64 {
    acquisition::entropy_exact_ratio(ratio)
}

/// Gaussian-shaped approximation of [`se_entropy_exact`].
#[no_mangle]
pub extern "C" fn se_entropy_approx(ratio: f64) -> f64 {
    acquisition::entropy_approx_ratio(ratio)
}

/// Information-gain lower bound as a function of the largest safe variance.
#[no_mangle]
pub extern "C" fn se_b(eta: f64, mean_bound: f64, noise: f64) -> f64 {
    acquisition::b_function(eta, mean_bound, noise)
}

/// Inverse of [`se_b`]; `target` must lie in `[0, ln 2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn se_b_inverse(target: f64, mean_bound: f64, noise: f64, out: *mut f64) -> SeStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        *out = acquisition::b_inverse(target, mean_bound, noise)?;
        Ok(())
    })
}
