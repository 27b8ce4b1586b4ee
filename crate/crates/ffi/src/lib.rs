//! C interface to the solver.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every fallible call returns an [`LfStatus`];
//! the message of the most recent failure on the calling thread is
//! available from [`lf_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lerayflow::cli::{build_system, run_verify, setup, RunConfig};
use lerayflow::continuation::{integrate, IntegrationStatus};
use lerayflow::galerkin::{reconstruct_u, GalerkinState, GalerkinSystem};
use lerayflow::spectral::{enstrophy, SpectralField};
use lerayflow::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullArgument = 1,
    /// Malformed or invalid configuration.
    Config = 2,
    InvalidArgument = 3,
    /// The request needs more resolution than configured.
    Resolution = 4,
    /// The run hit the blow-up threshold or the minimum step.
    Terminal = 5,
    Io = 6,
    /// The caller's buffer is too small; the required length was written.
    BufferTooSmall = 7,
    /// Internal failure (a caught panic).
    Internal = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).expect("no interior nul"));
}

fn status_of(e: &Error) -> LfStatus {
    match e {
        Error::Config { .. } | Error::Json(_) | Error::Format(_) => LfStatus::Config,
        Error::Resolution(_) | Error::ModeCap { .. } => LfStatus::Resolution,
        Error::Io(_) | Error::Csv(_) => LfStatus::Io,
        _ => LfStatus::InvalidArgument,
    }
}

/// Run `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (LfStatus, String)>>(f: F) -> LfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LfStatus::Ok,
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            LfStatus::Internal
        }
    }
}

fn lib(e: Error) -> (LfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LfStatus, String) {
    (LfStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (LfStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (LfStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

/// A configured problem and its current state.
pub struct LfSolver {
    cfg: RunConfig,
    sys: GalerkinSystem,
    state: GalerkinState,
}

impl LfSolver {
    fn u(&self) -> lerayflow::Result<SpectralField> {
        reconstruct_u(&self.state, self.sys.basis(), self.sys.lift())
    }
}

/// Version tag of the files and reports the library writes.
#[no_mangle]
pub extern "C" fn lf_format_version() -> u32 {
    lerayflow::FORMAT_VERSION
}

/// Message of the last failure on this thread; empty when none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a solver from a JSON run configuration. On success `*out` holds a
/// handle to release with [`lf_solver_free`].
///
/// # Safety
/// `config_json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_solver_new(config_json: *const c_char, out: *mut *mut LfSolver) -> LfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(config_json, "config_json")?;
        let cfg = RunConfig::from_json_str(text).map_err(lib)?;
        let p = setup(&cfg).map_err(lib)?;
        let sys = build_system(&cfg, &p).map_err(lib)?;
        let state = sys.initial_state();
        *out = Box::into_raw(Box::new(LfSolver { cfg, sys, state }));
        Ok(())
    })
}

/// Release a solver. Null is ignored.
///
/// # Safety
/// `solver` must come from [`lf_solver_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lf_solver_free(solver: *mut LfSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Number of Galerkin coefficients.
///
/// # Safety
/// `solver` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lf_solver_dim(solver: *const LfSolver, out: *mut usize) -> LfStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = s.sys.dim();
        Ok(())
    })
}

/// Current time of the solver state.
///
/// # Safety
/// `solver` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lf_solver_time(solver: *const LfSolver, out: *mut f64) -> LfStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = s.state.t;
        Ok(())
    })
}

/// Integrate from the current time to `t_end` with the configured stepper.
/// Returns [`LfStatus::Terminal`] when the run stops early; the state is
/// then left at the last finite sample.
///
/// # Safety
/// `solver` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_solver_advance(solver: *mut LfSolver, t_end: f64) -> LfStatus {
    guard(|| {
        let s = solver.as_mut().ok_or_else(|| null("solver"))?;
        if t_end.partial_cmp(&s.state.t) != Some(std::cmp::Ordering::Greater) {
            return Err((
                LfStatus::InvalidArgument,
                format!("t_end {t_end} must exceed the current time {}", s.state.t),
            ));
        }
        let threshold = s.cfg.blowup_threshold;
        let sys = &s.sys;
        let mut mon = |_t: f64, g: &[f64]| sys.enstrophy(g) <= threshold;
        let tr = integrate(sys, &s.state, &s.cfg.stepper, &[t_end], Some(&mut mon)).map_err(lib)?;
        let status = tr.status;
        if let Some(last) = tr.samples.iter().rev().find(|x| x.g.iter().all(|v| v.is_finite())) {
            s.state = last.clone();
        }
        match status {
            IntegrationStatus::Completed => Ok(()),
            other => Err((LfStatus::Terminal, format!("run stopped: {other:?}"))),
        }
    })
}

/// Copy the coefficient vector into `buf`. With a short buffer nothing is
/// copied, `*needed` receives the dimension and the call returns
/// [`LfStatus::BufferTooSmall`].
///
/// # Safety
/// `buf` must hold `len` doubles; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn lf_solver_coefficients(
    solver: *const LfSolver,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> LfStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        let n = s.state.g.len();
        if let Some(nd) = needed.as_mut() {
            *nd = n;
        }
        if len < n {
            return Err((LfStatus::BufferTooSmall, format!("buffer holds {len}, need {n}")));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&s.state.g);
        Ok(())
    })
}

/// `‖u‖₂` and `‖∇u‖₂²` of the velocity at the current time.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lf_solver_norms(solver: *const LfSolver, l2: *mut f64, enstrophy_out: *mut f64) -> LfStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        let u = s.u().map_err(lib)?;
        *l2.as_mut().ok_or_else(|| null("l2"))? = u.l2_norm();
        *enstrophy_out.as_mut().ok_or_else(|| null("enstrophy"))? = enstrophy(&u);
        Ok(())
    })
}

/// Velocity at the point `x[0..3]`, written to `out[0..3]`.
///
/// # Safety
/// `x` and `out` must each point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn lf_solver_evaluate(solver: *const LfSolver, x: *const f64, out: *mut f64) -> LfStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        if x.is_null() {
            return Err(null("x"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let p = [*x, *x.add(1), *x.add(2)];
        let v = s.u().map_err(lib)?.evaluate_at(p);
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&v);
        Ok(())
    })
}

/// Run the invariant suite for a JSON configuration. `*report` receives the
/// report as JSON, to release with [`lf_string_free`]; `*all_pass` is 1 when
/// every check passed.
///
/// # Safety
/// `config_json` must be a nul-terminated string; `report` and `all_pass`
/// valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lf_verify(config_json: *const c_char, report: *mut *mut c_char, all_pass: *mut i32) -> LfStatus {
    guard(|| {
        if report.is_null() {
            return Err(null("report"));
        }
        *report = ptr::null_mut();
        let text = read_str(config_json, "config_json")?;
        let cfg = RunConfig::from_json_str(text).map_err(lib)?;
        let rep = run_verify(&cfg).map_err(lib)?;
        let js = serde_json::to_string(&rep).map_err(|e| lib(e.into()))?;
        if let Some(p) = all_pass.as_mut() {
            *p = rep.all_pass() as i32;
        }
        *report = CString::new(js).expect("JSON has no nul").into_raw();
        Ok(())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
