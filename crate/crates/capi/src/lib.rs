//! C interface to the onduloid library.
//!
//! Conventions: every fallible call returns an `OnduloidStatus` and writes
//! results through out-pointers; profiles and traces are opaque handles with
//! explicit `_free` functions; a thread-local message describes the most
//! recent failure on the calling thread (`onduloid_last_error`). Panics
//! never cross the boundary — they are caught and reported as
//! `ONDULOID_STATUS_INTERNAL`.
//!
//! All computations run at the library's default quadrature tolerances.

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use onduloid::branch::{trace_branch, BranchConfig, BranchTrace};
use onduloid::kernels::{b_alpha_const, h_of_b, ModelParams};
use onduloid::linearized::{eigenvalue, find_mu_star};
use onduloid::nmc;
use onduloid::profile::Profile;
use onduloid::quad::QuadSpec;
use onduloid::workers::Workers;

/// Outcome of a C API call. Matches the CLI exit-code convention where the
/// two overlap (2 input error, 3 non-convergence, 4 continuation failure).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnduloidStatus {
    Ok = 0,
    InvalidInput = 2,
    NonConvergence = 3,
    ContinuationFailure = 4,
    Internal = 5,
}

/// Opaque handle: a positive, even, 2π-periodic radius profile.
pub struct OnduloidProfile(Profile);

/// Opaque handle: a traced branch of constant-curvature profiles.
pub struct OnduloidTrace(BranchTrace);

/// One branch point, by value. `newton_iters` is 0 at the trivial point.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OnduloidBranchPoint {
    pub a: f64,
    pub mu: f64,
    pub lambda: f64,
    pub residual_sup: f64,
    pub newton_iters: u32,
}

/// Branch continuation options; obtain defaults from
/// `onduloid_trace_options_default()` and adjust selectively.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OnduloidTraceOptions {
    /// Highest retained cosine mode (K ≥ 8).
    pub modes: u32,
    /// Collocation intervals on [0, π] (M ≥ 4K).
    pub collocation: u32,
    pub a_step: f64,
    pub a_max: f64,
    pub newton_tol: f64,
    pub newton_max_iters: u32,
    pub fd_step: f64,
    /// Worker threads; any value yields bit-identical results.
    pub threads: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: OnduloidStatus, msg: String) -> OnduloidStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

fn fail_error(e: &onduloid::Error) -> OnduloidStatus {
    let status = match e.exit_code() {
        2 => OnduloidStatus::InvalidInput,
        3 => OnduloidStatus::NonConvergence,
        4 => OnduloidStatus::ContinuationFailure,
        _ => OnduloidStatus::Internal,
    };
    fail(status, e.to_string())
}

/// Run `f` with panics contained; on success clear the error message.
fn guarded<F: FnOnce() -> Result<(), OnduloidStatus>>(f: F) -> OnduloidStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            OnduloidStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(OnduloidStatus::Internal, "internal panic".into()),
    }
}

/// Null-checks `out`, evaluates `f`, and stores the scalar result.
unsafe fn scalar_call<F>(out: *mut f64, f: F) -> OnduloidStatus
where
    F: FnOnce(&QuadSpec) -> onduloid::Result<f64>,
{
    guarded(|| {
        if out.is_null() {
            return Err(fail(OnduloidStatus::InvalidInput, "null output pointer".into()));
        }
        let spec = QuadSpec::default();
        match f(&spec) {
            Ok(v) => {
                unsafe { *out = v };
                Ok(())
            }
            Err(e) => Err(fail_error(&e)),
        }
    })
}

/// Copy the most recent error message on this thread into `buf` (truncated,
/// always NUL-terminated when `cap > 0`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn onduloid_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// The zero-mode constant b_α for dimension `n` and order `alpha`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn onduloid_b_alpha(n: u32, alpha: f64, out: *mut f64) -> OnduloidStatus {
    unsafe { scalar_call(out, |spec| b_alpha_const(&ModelParams::new(n, alpha)?, spec)) }
}

/// The symbol h(b) of the linearized operator.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn onduloid_symbol(
    b: f64,
    n: u32,
    alpha: f64,
    out: *mut f64,
) -> OnduloidStatus {
    unsafe { scalar_call(out, |spec| h_of_b(b, &ModelParams::new(n, alpha)?, spec)) }
}

/// Eigenvalue λ_k(μ) = h(kμ) − b_α of the linearization at radius μ.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn onduloid_eigenvalue(
    k: u32,
    mu: f64,
    n: u32,
    alpha: f64,
    out: *mut f64,
) -> OnduloidStatus {
    unsafe { scalar_call(out, |spec| eigenvalue(k, mu, &ModelParams::new(n, alpha)?, spec)) }
}

/// The bifurcation radius μ*: the unique root of h(μ) = b_α.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn onduloid_mu_star(n: u32, alpha: f64, out: *mut f64) -> OnduloidStatus {
    unsafe { scalar_call(out, |spec| find_mu_star(&ModelParams::new(n, alpha)?, spec)) }
}

/// Curvature of the straight cylinder of radius `kappa` (closed form).
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn onduloid_constant_nmc(
    kappa: f64,
    n: u32,
    alpha: f64,
    out: *mut f64,
) -> OnduloidStatus {
    unsafe {
        scalar_call(out, |spec| {
            nmc::constant_nmc(kappa, &ModelParams::new(n, alpha)?, spec)
        })
    }
}

/// Create a profile u(s) = Σ coeffs[k]·cos(ks) from `len` coefficients.
/// The caller owns the handle and must release it with
/// `onduloid_profile_free()`.
///
/// # Safety
/// `coeffs` must point to `len` readable doubles; `out` must be a valid
/// pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn onduloid_profile_new(
    coeffs: *const f64,
    len: usize,
    out: *mut *mut OnduloidProfile,
) -> OnduloidStatus {
    guarded(|| {
        if coeffs.is_null() || out.is_null() || len == 0 {
            return Err(fail(
                OnduloidStatus::InvalidInput,
                "profile needs a non-empty coefficient array and an output pointer".into(),
            ));
        }
        let slice = unsafe { std::slice::from_raw_parts(coeffs, len) };
        match Profile::new(slice.to_vec()) {
            Ok(p) => {
                unsafe { *out = Box::into_raw(Box::new(OnduloidProfile(p))) };
                Ok(())
            }
            Err(e) => Err(fail_error(&e)),
        }
    })
}

/// Release a profile handle. A null pointer is a no-op.
///
/// # Safety
/// `p` must be null or a handle from `onduloid_profile_new()` that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn onduloid_profile_free(p: *mut OnduloidProfile) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Pointwise nonlocal mean curvature H(u)(s) of a profile.
///
/// # Safety
/// `p` must be a live profile handle; `out` must be a valid pointer to a
/// double.
#[no_mangle]
pub unsafe extern "C" fn onduloid_profile_nmc(
    p: *const OnduloidProfile,
    s: f64,
    n: u32,
    alpha: f64,
    out: *mut f64,
) -> OnduloidStatus {
    if p.is_null() {
        return fail(OnduloidStatus::InvalidInput, "null profile handle".into());
    }
    let profile = unsafe { &(*p).0 };
    unsafe {
        scalar_call(out, |spec| {
            nmc::evaluate(profile, s, &ModelParams::new(n, alpha)?, spec)
        })
    }
}

/// Fill `opts` with the library defaults.
///
/// # Safety
/// `opts` must be a valid pointer to an options struct.
#[no_mangle]
pub unsafe extern "C" fn onduloid_trace_options_default(
    opts: *mut OnduloidTraceOptions,
) -> OnduloidStatus {
    guarded(|| {
        if opts.is_null() {
            return Err(fail(OnduloidStatus::InvalidInput, "null options pointer".into()));
        }
        let d = BranchConfig::default();
        unsafe {
            *opts = OnduloidTraceOptions {
                modes: d.k as u32,
                collocation: d.m as u32,
                a_step: d.a_step,
                a_max: d.a_max,
                newton_tol: d.newton_tol,
                newton_max_iters: d.newton_max_iters as u32,
                fd_step: d.fd_step,
                threads: 8,
            };
        }
        Ok(())
    })
}

/// Trace the bifurcating branch for (n, alpha). `opts` may be null for
/// defaults. On success the caller owns the trace handle and must release
/// it with `onduloid_trace_free()`.
///
/// # Safety
/// `opts` must be null or a valid options pointer; `out` must be a valid
/// pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn onduloid_trace_new(
    n: u32,
    alpha: f64,
    opts: *const OnduloidTraceOptions,
    out: *mut *mut OnduloidTrace,
) -> OnduloidStatus {
    guarded(|| {
        if out.is_null() {
            return Err(fail(OnduloidStatus::InvalidInput, "null output pointer".into()));
        }
        let (config, threads) = if opts.is_null() {
            (BranchConfig::default(), 8)
        } else {
            let o = unsafe { *opts };
            (
                BranchConfig {
                    k: o.modes as usize,
                    m: o.collocation as usize,
                    a_step: o.a_step,
                    a_max: o.a_max,
                    newton_tol: o.newton_tol,
                    newton_max_iters: o.newton_max_iters as usize,
                    fd_step: o.fd_step,
                },
                o.threads.max(1) as usize,
            )
        };
        let par = match ModelParams::new(n, alpha) {
            Ok(p) => p,
            Err(e) => return Err(fail_error(&e)),
        };
        let spec = QuadSpec::default();
        let workers = Workers::new(threads);
        match trace_branch(&config, &par, &spec, &workers) {
            Ok(t) => {
                unsafe { *out = Box::into_raw(Box::new(OnduloidTrace(t))) };
                Ok(())
            }
            Err(e) => Err(fail_error(&e)),
        }
    })
}

/// Release a trace handle. A null pointer is a no-op.
///
/// # Safety
/// `t` must be null or a handle from `onduloid_trace_new()` that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn onduloid_trace_free(t: *mut OnduloidTrace) {
    if !t.is_null() {
        drop(unsafe { Box::from_raw(t) });
    }
}

/// Number of points on the traced branch (0 for a null handle).
///
/// # Safety
/// `t` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn onduloid_trace_len(t: *const OnduloidTrace) -> usize {
    if t.is_null() {
        0
    } else {
        unsafe { &(*t).0 }.points.len()
    }
}

/// The bifurcation radius the trace started from.
///
/// # Safety
/// `t` must be a live trace handle; `out` must be a valid pointer to a
/// double.
#[no_mangle]
pub unsafe extern "C" fn onduloid_trace_mu_star(
    t: *const OnduloidTrace,
    out: *mut f64,
) -> OnduloidStatus {
    if t.is_null() || out.is_null() {
        return fail(OnduloidStatus::InvalidInput, "null pointer".into());
    }
    unsafe { *out = (*t).0.mu_star };
    OnduloidStatus::Ok
}

/// Scalar data of branch point `i` (points are ordered by amplitude).
///
/// # Safety
/// `t` must be a live trace handle; `out` must be a valid pointer to a
/// branch-point struct.
#[no_mangle]
pub unsafe extern "C" fn onduloid_trace_point(
    t: *const OnduloidTrace,
    i: usize,
    out: *mut OnduloidBranchPoint,
) -> OnduloidStatus {
    if t.is_null() || out.is_null() {
        return fail(OnduloidStatus::InvalidInput, "null pointer".into());
    }
    let trace = unsafe { &(*t).0 };
    match trace.points.get(i) {
        Some(p) => {
            unsafe {
                *out = OnduloidBranchPoint {
                    a: p.a,
                    mu: p.mu,
                    lambda: p.lambda,
                    residual_sup: p.residual_sup,
                    newton_iters: p.newton_iters as u32,
                };
            }
            OnduloidStatus::Ok
        }
        None => fail(
            OnduloidStatus::InvalidInput,
            format!("point index {i} out of range ({} points)", trace.points.len()),
        ),
    }
}

/// Number of cosine coefficients in the collocation profile of point `i`.
///
/// # Safety
/// `t` must be a live trace handle; `out` must be a valid pointer to a
/// size slot.
#[no_mangle]
pub unsafe extern "C" fn onduloid_trace_profile_len(
    t: *const OnduloidTrace,
    i: usize,
    out: *mut usize,
) -> OnduloidStatus {
    if t.is_null() || out.is_null() {
        return fail(OnduloidStatus::InvalidInput, "null pointer".into());
    }
    let trace = unsafe { &(*t).0 };
    match trace.points.get(i) {
        Some(p) => {
            unsafe { *out = p.v_coeffs.len().max(2) };
            OnduloidStatus::Ok
        }
        None => fail(
            OnduloidStatus::InvalidInput,
            format!("point index {i} out of range ({} points)", trace.points.len()),
        ),
    }
}

/// Copy the collocation-profile coefficients of point `i` into `buf`
/// (capacity `cap`); writes the coefficient count to `written`. The profile
/// is the 2π-periodic w = μ + a(cos + v) the solver converged on; feed it to
/// `onduloid_profile_new()` / `onduloid_profile_nmc()` to re-evaluate its
/// (constant) curvature.
///
/// # Safety
/// `t` must be a live trace handle; `buf` must point to `cap` writable
/// doubles; `written` must be a valid pointer to a size slot.
#[no_mangle]
pub unsafe extern "C" fn onduloid_trace_profile(
    t: *const OnduloidTrace,
    i: usize,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> OnduloidStatus {
    guarded(|| {
        if t.is_null() || buf.is_null() || written.is_null() {
            return Err(fail(OnduloidStatus::InvalidInput, "null pointer".into()));
        }
        let trace = unsafe { &(*t).0 };
        let p = match trace.points.get(i) {
            Some(p) => p,
            None => {
                return Err(fail(
                    OnduloidStatus::InvalidInput,
                    format!("point index {i} out of range ({} points)", trace.points.len()),
                ))
            }
        };
        let w = match p.collocation_profile() {
            Ok(w) => w,
            Err(e) => return Err(fail_error(&e)),
        };
        if cap < w.coeffs.len() {
            return Err(fail(
                OnduloidStatus::InvalidInput,
                format!("buffer of {cap} too small for {} coefficients", w.coeffs.len()),
            ));
        }
        unsafe {
            std::ptr::copy_nonoverlapping(w.coeffs.as_ptr(), buf, w.coeffs.len());
            *written = w.coeffs.len();
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error_string() -> String {
        unsafe {
            let needed = onduloid_last_error(std::ptr::null_mut(), 0);
            let mut buf = vec![0u8; needed + 1];
            onduloid_last_error(buf.as_mut_ptr().cast(), buf.len());
            String::from_utf8_lossy(&buf[..needed]).into_owned()
        }
    }

    #[test]
    fn scalar_entry_points_match_core() {
        unsafe {
            let mut b = 0.0;
            assert_eq!(onduloid_b_alpha(3, 0.5, &mut b), OnduloidStatus::Ok);
            let spec = QuadSpec::default();
            let par = ModelParams::new(3, 0.5).unwrap();
            assert_eq!(b, b_alpha_const(&par, &spec).unwrap());

            let mut h = 0.0;
            assert_eq!(onduloid_symbol(1.0, 3, 0.5, &mut h), OnduloidStatus::Ok);
            assert_eq!(h, h_of_b(1.0, &par, &spec).unwrap());

            let mut lam = 0.0;
            assert_eq!(onduloid_eigenvalue(2, 1.0, 3, 0.5, &mut lam), OnduloidStatus::Ok);
            assert_eq!(lam, eigenvalue(2, 1.0, &par, &spec).unwrap());
        }
    }

    #[test]
    fn invalid_parameters_are_input_errors() {
        unsafe {
            let mut v = 0.0;
            assert_eq!(onduloid_b_alpha(1, 0.5, &mut v), OnduloidStatus::InvalidInput);
            assert!(last_error_string().contains("N >= 2"));
            assert_eq!(onduloid_b_alpha(3, 1.5, &mut v), OnduloidStatus::InvalidInput);
            assert_eq!(
                onduloid_b_alpha(3, 0.5, std::ptr::null_mut()),
                OnduloidStatus::InvalidInput
            );
        }
    }

    #[test]
    fn profile_round_trip() {
        unsafe {
            let coeffs = [1.0, 0.05];
            let mut handle: *mut OnduloidProfile = std::ptr::null_mut();
            assert_eq!(
                onduloid_profile_new(coeffs.as_ptr(), coeffs.len(), &mut handle),
                OnduloidStatus::Ok
            );
            let mut h = 0.0;
            assert_eq!(onduloid_profile_nmc(handle, 0.7, 3, 0.5, &mut h), OnduloidStatus::Ok);
            let spec = QuadSpec::default();
            let par = ModelParams::new(3, 0.5).unwrap();
            let expect =
                nmc::evaluate(&Profile::new(coeffs.to_vec()).unwrap(), 0.7, &par, &spec).unwrap();
            assert_eq!(h, expect);
            onduloid_profile_free(handle);
        }
    }

    #[test]
    fn nonpositive_profile_is_rejected_at_evaluation() {
        unsafe {
            let coeffs = [0.1, 1.0];
            let mut handle: *mut OnduloidProfile = std::ptr::null_mut();
            assert_eq!(
                onduloid_profile_new(coeffs.as_ptr(), coeffs.len(), &mut handle),
                OnduloidStatus::Ok
            );
            let mut h = 0.0;
            assert_eq!(
                onduloid_profile_nmc(handle, 0.0, 3, 0.5, &mut h),
                OnduloidStatus::InvalidInput
            );
            onduloid_profile_free(handle);
        }
    }

    #[test]
    fn trace_options_defaults_mirror_config() {
        unsafe {
            let mut opts = OnduloidTraceOptions {
                modes: 0,
                collocation: 0,
                a_step: 0.0,
                a_max: 0.0,
                newton_tol: 0.0,
                newton_max_iters: 0,
                fd_step: 0.0,
                threads: 0,
            };
            assert_eq!(onduloid_trace_options_default(&mut opts), OnduloidStatus::Ok);
            let d = BranchConfig::default();
            assert_eq!(opts.modes as usize, d.k);
            assert_eq!(opts.collocation as usize, d.m);
            assert_eq!(opts.a_step, d.a_step);
        }
    }

    #[test]
    fn short_trace_through_the_c_surface() {
        unsafe {
            let mut opts = OnduloidTraceOptions {
                modes: 0,
                collocation: 0,
                a_step: 0.0,
                a_max: 0.0,
                newton_tol: 0.0,
                newton_max_iters: 0,
                fd_step: 0.0,
                threads: 0,
            };
            onduloid_trace_options_default(&mut opts);
            opts.modes = 16;
            opts.collocation = 64;
            opts.a_max = 0.005;
            opts.threads = 1;
            let mut handle: *mut OnduloidTrace = std::ptr::null_mut();
            assert_eq!(
                onduloid_trace_new(2, 0.5, &opts, &mut handle),
                OnduloidStatus::Ok
            );
            assert_eq!(onduloid_trace_len(handle), 3);

            let mut mu_star = 0.0;
            assert_eq!(onduloid_trace_mu_star(handle, &mut mu_star), OnduloidStatus::Ok);
            assert!(mu_star > 0.5 && mu_star < 0.55);

            let mut pt = OnduloidBranchPoint {
                a: 0.0,
                mu: 0.0,
                lambda: 0.0,
                residual_sup: 0.0,
                newton_iters: 0,
            };
            assert_eq!(onduloid_trace_point(handle, 2, &mut pt), OnduloidStatus::Ok);
            assert_eq!(pt.a, 0.005);
            assert!(pt.residual_sup < 1e-10);
            assert_eq!(
                onduloid_trace_point(handle, 3, &mut pt),
                OnduloidStatus::InvalidInput
            );

            let mut len = 0usize;
            assert_eq!(onduloid_trace_profile_len(handle, 2, &mut len), OnduloidStatus::Ok);
            let mut buf = vec![0.0; len];
            let mut written = 0usize;
            assert_eq!(
                onduloid_trace_profile(handle, 2, buf.as_mut_ptr(), buf.len(), &mut written),
                OnduloidStatus::Ok
            );
            assert_eq!(written, len);
            // w = μ + a(cos + v): coefficient 0 is μ plus the solver's mean
            // correction a·v_0 (small but nonzero); coefficient 1 is exactly a.
            assert!((buf[0] - pt.mu).abs() < 0.01 * pt.mu);
            assert!((buf[1] - 0.005).abs() < 1e-15);

            // The exported profile reproduces constant curvature off-grid.
            let mut prof: *mut OnduloidProfile = std::ptr::null_mut();
            assert_eq!(
                onduloid_profile_new(buf.as_ptr(), written, &mut prof),
                OnduloidStatus::Ok
            );
            let mut h1 = 0.0;
            let mut h2 = 0.0;
            assert_eq!(onduloid_profile_nmc(prof, 0.3, 2, 0.5, &mut h1), OnduloidStatus::Ok);
            assert_eq!(onduloid_profile_nmc(prof, 1.9, 2, 0.5, &mut h2), OnduloidStatus::Ok);
            assert!((h1 - h2).abs() < 1e-8, "curvature not constant: {h1} vs {h2}");
            onduloid_profile_free(prof);
            onduloid_trace_free(handle);
        }
    }

    #[test]
    fn error_message_buffer_truncation() {
        unsafe {
            let mut v = 0.0;
            onduloid_b_alpha(1, 0.5, &mut v);
            let mut small = [0i8; 8];
            let needed = onduloid_last_error(small.as_mut_ptr(), small.len());
            assert!(needed > 7);
            assert_eq!(small[7], 0);
        }
    }
}
