//! C ABI for the damped wave laboratory. Every entry point returns a status
//! code; detail text for the last failure on the current thread is available
//! through `dw_last_error`. Pointers returned as handles are opaque and must
//! be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use dwlab::admissibility::{derive_params, validate, Overrides};
use dwlab::error::DwError;
use dwlab::grid::Grid;
use dwlab::solver::{self, InitialKind, Trajectory};
use dwlab::verify;

/// Status codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwStatus {
    DwOk = 0,
    /// Bad argument or hypothesis violation.
    DwInvalid = 1,
    /// Parameter set fails the admissibility system.
    DwInadmissible = 2,
    /// Runtime failure: instability, non-convergence, i/o.
    DwRuntime = 3,
    /// A required pointer was null.
    DwNullPointer = 4,
    /// Internal panic intercepted at the boundary.
    DwPanic = 5,
}

/// Flat mirror of the derived parameter set.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DwParams {
    pub n: u32,
    pub p: f64,
    pub alpha: f64,
    pub beta_alpha: f64,
    pub delta_alpha: f64,
    pub s: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub m: f64,
    pub d: f64,
    /// Predicted L^alpha decay exponent of u_t.
    pub l_alpha_decay: f64,
    /// Predicted homogeneous Sobolev decay exponent of u_t.
    pub hs_decay: f64,
}

/// Kernel symbol values at one (t, |xi|^2) point.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DwKernelValues {
    pub k: f64,
    pub k_dt: f64,
    pub k_dtt: f64,
}

/// One trajectory sample, norms of u_t unless stated.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DwSample {
    pub t: f64,
    pub l_alpha: f64,
    pub l2_v: f64,
    pub hs_dot_v: f64,
    pub l2_u: f64,
    pub linf_v: f64,
}

/// Decay-fit result.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DwDecayFit {
    pub slope: f64,
    pub theoretical: f64,
    pub deviation: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Opaque periodic grid handle.
pub struct DwGrid {
    inner: Arc<Grid>,
}

/// Opaque trajectory handle.
pub struct DwTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &DwError) -> DwStatus {
    match err {
        DwError::Admissibility(_) => DwStatus::DwInadmissible,
        DwError::Instability { .. }
        | DwError::NonConvergence { .. }
        | DwError::CorruptSpectral(_)
        | DwError::Io { .. } => DwStatus::DwRuntime,
        _ => DwStatus::DwInvalid,
    }
}

fn guarded<F: FnOnce() -> DwStatus>(f: F) -> DwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            DwStatus::DwPanic
        }
    }
}

/// Copy the last error message on this thread into `buf` (NUL terminated,
/// truncated to `cap`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn dw_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Derive and validate the parameter set for dimension `n` and exponent `p`.
/// `s_override` may be NaN to accept the default Sobolev order.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dw_params_derive(
    n: u32,
    p: f64,
    s_override: f64,
    out: *mut DwParams,
) -> DwStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return DwStatus::DwNullPointer;
        }
        let overrides = Overrides {
            s: if s_override.is_nan() { None } else { Some(s_override) },
            kappa: None,
            gamma_inv: None,
        };
        match derive_params(n, p, overrides) {
            Ok(params) => {
                if !validate(&params).pass {
                    set_error("derived parameters fail validation");
                    return DwStatus::DwInadmissible;
                }
                *out = DwParams {
                    n: params.n,
                    p: params.p,
                    alpha: params.alpha,
                    beta_alpha: params.beta_alpha,
                    delta_alpha: params.delta_alpha,
                    s: params.s,
                    kappa: params.kappa,
                    gamma: params.gamma,
                    m: params.m,
                    d: params.d,
                    l_alpha_decay: params.l_alpha_decay_exponent(),
                    hs_decay: params.hs_decay_exponent(),
                };
                DwStatus::DwOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Evaluate the kernel symbol and its first two time derivatives.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dw_kernel_eval(t: f64, xi_sq: f64, out: *mut DwKernelValues) -> DwStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return DwStatus::DwNullPointer;
        }
        if !(t >= 0.0) || !(xi_sq >= 0.0) {
            set_error(format!("need t >= 0 and xi_sq >= 0, got t={t}, xi_sq={xi_sq}"));
            return DwStatus::DwInvalid;
        }
        let kv = dwlab::kernel::kernel_values(t, xi_sq);
        *out = DwKernelValues {
            k: kv.k,
            k_dt: kv.k_dt,
            k_dtt: kv.k_dtt,
        };
        DwStatus::DwOk
    })
}

/// Create a periodic grid: `dim` in {1, 2}, `points` a power of two per axis.
///
/// # Safety
/// `out` must be a valid pointer; the handle must be released with
/// `dw_grid_free`.
#[no_mangle]
pub unsafe extern "C" fn dw_grid_new(
    dim: usize,
    points: usize,
    half_length: f64,
    out: *mut *mut DwGrid,
) -> DwStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return DwStatus::DwNullPointer;
        }
        match Grid::new(dim, points, half_length) {
            Ok(grid) => {
                *out = Box::into_raw(Box::new(DwGrid { inner: grid }));
                DwStatus::DwOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Release a grid handle. Null is a no-op.
///
/// # Safety
/// `grid` must come from `dw_grid_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dw_grid_free(grid: *mut DwGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

fn ic_from_name(name: &str, shape: f64) -> Result<InitialKind, String> {
    match name {
        "gaussian" => Ok(InitialKind::Gaussian { width: shape }),
        "bump" => Ok(InitialKind::Bump { radius: shape }),
        "single-mode" => Ok(InitialKind::SingleMode { mode: shape as i64 }),
        other => Err(format!("unknown initial kind {other:?}")),
    }
}

/// Run the nonlinear solver on gaussian/bump/single-mode data and return a
/// sampled trajectory handle.
///
/// # Safety
/// `grid` must be a live handle, `ic_kind` a NUL-terminated string, `out` a
/// valid pointer; the result must be released with `dw_trajectory_free`.
#[no_mangle]
pub unsafe extern "C" fn dw_solve(
    grid: *const DwGrid,
    p: f64,
    eps: f64,
    ic_kind: *const c_char,
    ic_shape: f64,
    t_end: f64,
    dt: f64,
    samples_per_decade: usize,
    out: *mut *mut DwTrajectory,
) -> DwStatus {
    guarded(|| {
        if grid.is_null() || ic_kind.is_null() || out.is_null() {
            set_error("null pointer argument");
            return DwStatus::DwNullPointer;
        }
        let grid = &(*grid).inner;
        let name = match CStr::from_ptr(ic_kind).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("ic_kind is not valid UTF-8");
                return DwStatus::DwInvalid;
            }
        };
        let kind = match ic_from_name(name, ic_shape) {
            Ok(k) => k,
            Err(msg) => {
                set_error(msg);
                return DwStatus::DwInvalid;
            }
        };
        let run = || -> dwlab::Result<Trajectory> {
            let params = derive_params(grid.dim() as u32, p, Overrides::default())?;
            let state0 = solver::make_initial(kind, eps, grid.clone())?;
            let schedule = solver::log_schedule(t_end, samples_per_decade);
            solver::solve(&state0, t_end, dt, params.p, &schedule, &params.space_weights())
        };
        match run() {
            Ok(traj) => {
                *out = Box::into_raw(Box::new(DwTrajectory { inner: traj }));
                DwStatus::DwOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Number of samples in a trajectory; 0 for a null handle.
///
/// # Safety
/// `traj` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dw_trajectory_len(traj: *const DwTrajectory) -> usize {
    if traj.is_null() {
        return 0;
    }
    (*traj).inner.samples.len()
}

/// Fetch sample `index`.
///
/// # Safety
/// `traj` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dw_trajectory_sample(
    traj: *const DwTrajectory,
    index: usize,
    out: *mut DwSample,
) -> DwStatus {
    guarded(|| {
        if traj.is_null() || out.is_null() {
            set_error("null pointer argument");
            return DwStatus::DwNullPointer;
        }
        let samples = &(*traj).inner.samples;
        match samples.get(index) {
            Some(s) => {
                *out = DwSample {
                    t: s.t,
                    l_alpha: s.l_alpha,
                    l2_v: s.l2_v,
                    hs_dot_v: s.hs_dot_v,
                    l2_u: s.l2_u,
                    linf_v: s.linf_v,
                };
                DwStatus::DwOk
            }
            None => {
                set_error(format!("index {index} out of range ({})", samples.len()));
                DwStatus::DwInvalid
            }
        }
    })
}

/// Release a trajectory handle. Null is a no-op.
///
/// # Safety
/// `traj` must come from `dw_solve` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dw_trajectory_free(traj: *mut DwTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Least-squares decay fit of log(value) against log(1+t) over
/// `[t_lo, t_hi]`.
///
/// # Safety
/// `ts` and `values` must point to `len` readable doubles; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dw_fit_decay(
    ts: *const f64,
    values: *const f64,
    len: usize,
    t_lo: f64,
    t_hi: f64,
    theoretical: f64,
    out: *mut DwDecayFit,
) -> DwStatus {
    guarded(|| {
        if ts.is_null() || values.is_null() || out.is_null() {
            set_error("null pointer argument");
            return DwStatus::DwNullPointer;
        }
        let series: Vec<(f64, f64)> = (0..len)
            .map(|i| (*ts.add(i), *values.add(i)))
            .collect();
        match verify::fit_decay(&series, (t_lo, t_hi), theoretical) {
            Ok(fit) => {
                *out = DwDecayFit {
                    slope: fit.slope,
                    theoretical: fit.theoretical,
                    deviation: fit.deviation,
                    r_squared: fit.r_squared,
                    points: fit.points,
                };
                DwStatus::DwOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}
