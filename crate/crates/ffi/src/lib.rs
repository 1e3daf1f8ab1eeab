//! C ABI for the ccmax library.
//!
//! Every fallible function returns a [`CcmaxStatus`] and writes results
//! through out-pointers. On failure a description is available from
//! [`ccmax_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ccmax::curves::{self, Cardinality};
use ccmax::gaussian::gamma_checked;
use ccmax::instance::{brute_force_opt, evaluate, Assignment, CCInstance};
use ccmax::rounding::{best_known_assignment, round_best_of};
use ccmax::sdp::{integral_signs, relax, solve, SDPSolution, SolveOptions};
use ccmax::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcmaxStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Parse = 3,
    Guard = 4,
    Invalid = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Problem family for curve queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcmaxCurve {
    Cut = 0,
    Vc = 1,
    TwoSat = 2,
}

/// Opaque parsed instance.
pub struct CcmaxInstance {
    inner: CCInstance,
}

/// Opaque relaxation solution.
pub struct CcmaxSdpSolution {
    inner: SDPSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CcmaxStatus {
    match e {
        Error::Domain { .. } => CcmaxStatus::Domain,
        Error::Parse { .. } => CcmaxStatus::Parse,
        Error::Guard(_) => CcmaxStatus::Guard,
        Error::Invalid(_) => CcmaxStatus::Invalid,
        Error::Io(_) => CcmaxStatus::Io,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guarded(f: impl FnOnce() -> Result<(), CcmaxStatusError>) -> CcmaxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CcmaxStatus::Ok
        }
        Ok(Err(CcmaxStatusError(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CcmaxStatus::Panic
        }
    }
}

struct CcmaxStatusError(CcmaxStatus, String);

impl From<Error> for CcmaxStatusError {
    fn from(e: Error) -> Self {
        CcmaxStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> CcmaxStatusError {
    CcmaxStatusError(CcmaxStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or valid for a write of `T`.
unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), CcmaxStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `p` must be null or point to a live handle.
unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, CcmaxStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `out` must be null or valid for `len` writes.
unsafe fn write_signs(a: &Assignment, out: *mut i8, len: usize) -> Result<(), CcmaxStatusError> {
    if out.is_null() {
        return Err(null("assignment buffer"));
    }
    if len < a.len() {
        return Err(CcmaxStatusError(
            CcmaxStatus::BufferTooSmall,
            format!("assignment buffer holds {len} entries, {} needed", a.len()),
        ));
    }
    ptr::copy_nonoverlapping(a.values().as_ptr(), out, a.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ccmax_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next ccmax call on this thread.
#[no_mangle]
pub extern "C" fn ccmax_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Γ_ρ(x, y) = P[X ≤ Φ⁻¹(x), Y ≤ Φ⁻¹(y)] for ρ-correlated standard normals.
///
/// # Safety
/// `out` must be valid for a write of `double`.
#[no_mangle]
pub unsafe extern "C" fn ccmax_gamma(rho: f64, x: f64, y: f64, out: *mut f64) -> CcmaxStatus {
    guarded(|| write_out(out, gamma_checked(rho, x, y)?, "out"))
}

/// Approximation ratio α_cut(q) of threshold rounding at cardinality q.
///
/// # Safety
/// `out` must be valid for a write of `double`.
#[no_mangle]
pub unsafe extern "C" fn ccmax_alpha_cut(q: f64, out: *mut f64) -> CcmaxStatus {
    guarded(|| write_out(out, curves::alpha_cut(Cardinality::new(q)?), "out"))
}

/// Approximation ratio α_2sat(q) for q < 1/2.
///
/// # Safety
/// `out` must be valid for a write of `double`.
#[no_mangle]
pub unsafe extern "C" fn ccmax_alpha_2sat(q: f64, out: *mut f64) -> CcmaxStatus {
    guarded(|| write_out(out, curves::alpha_2sat(Cardinality::new(q)?)?, "out"))
}

/// Hardness ratio at (q, ρ) for `Cut` or `Vc`; `TwoSat` is rejected.
///
/// # Safety
/// `out` must be valid for a write of `double`.
#[no_mangle]
pub unsafe extern "C" fn ccmax_beta(curve: CcmaxCurve, q: f64, rho: f64, out: *mut f64) -> CcmaxStatus {
    guarded(|| {
        let q = Cardinality::new(q)?;
        let v = match curve {
            CcmaxCurve::Cut => curves::beta_cut(q, rho)?,
            CcmaxCurve::Vc => curves::beta_vc(q, rho)?,
            CcmaxCurve::TwoSat => {
                return Err(CcmaxStatusError(CcmaxStatus::Invalid, "beta is defined for cut and vc only".into()))
            }
        };
        write_out(out, v, "out")
    })
}

/// Unflattened hardness at q: the infimum over admissible ρ and its minimizer.
///
/// # Safety
/// `value` and `rho_star` must be valid for writes of `double`.
#[no_mangle]
pub unsafe extern "C" fn ccmax_hardness(curve: CcmaxCurve, q: f64, value: *mut f64, rho_star: *mut f64) -> CcmaxStatus {
    guarded(|| {
        let problem = match curve {
            CcmaxCurve::Cut => curves::Problem::Cut,
            CcmaxCurve::Vc => curves::Problem::Vc,
            CcmaxCurve::TwoSat => curves::Problem::TwoSat,
        };
        let m = curves::raw_hardness(problem, Cardinality::new(q)?);
        write_out(value, m.value, "value")?;
        write_out(rho_star, m.rho_star, "rho_star")
    })
}

/// Parse an instance from its text form.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ccmax_instance_parse(text: *const c_char, out: *mut *mut CcmaxInstance) -> CcmaxStatus {
    guarded(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| CcmaxStatusError(CcmaxStatus::Parse, "text is not UTF-8".into()))?;
        let inner = CCInstance::parse(s)?;
        out.write(Box::into_raw(Box::new(CcmaxInstance { inner })));
        Ok(())
    })
}

/// Release an instance. Null is ignored.
///
/// # Safety
/// `inst` must be null or a handle from `ccmax_instance_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ccmax_instance_free(inst: *mut CcmaxInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Variable count and cardinality of an instance.
///
/// # Safety
/// `inst` must be a live handle; `n` and `k` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ccmax_instance_dims(inst: *const CcmaxInstance, n: *mut usize, k: *mut usize) -> CcmaxStatus {
    guarded(|| {
        let i = &borrow(inst, "instance")?.inner;
        write_out(n, i.n(), "n")?;
        write_out(k, i.k(), "k")
    })
}

/// Weight of the satisfied constraints under `signs` (+1 true, -1 false).
///
/// # Safety
/// `inst` must be a live handle; `signs` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn ccmax_instance_evaluate(
    inst: *const CcmaxInstance,
    signs: *const i8,
    len: usize,
    out: *mut f64,
) -> CcmaxStatus {
    guarded(|| {
        let i = &borrow(inst, "instance")?.inner;
        if signs.is_null() {
            return Err(null("signs"));
        }
        let a = Assignment::new(std::slice::from_raw_parts(signs, len).to_vec())?;
        write_out(out, evaluate(i, &a)?, "out")
    })
}

/// Exact optimum by enumeration; refused with `Guard` above 28 variables.
///
/// # Safety
/// `inst` must be a live handle; `assignment` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ccmax_instance_brute_force(
    inst: *const CcmaxInstance,
    assignment: *mut i8,
    len: usize,
    value: *mut f64,
) -> CcmaxStatus {
    guarded(|| {
        let i = &borrow(inst, "instance")?.inner;
        let (a, v) = brute_force_opt(i)?;
        write_signs(&a, assignment, len)?;
        write_out(value, v, "value")
    })
}

/// Solve the vector relaxation with `restarts` seeded restarts.
///
/// # Safety
/// `inst` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ccmax_sdp_solve(
    inst: *const CcmaxInstance,
    restarts: usize,
    seed: u64,
    out: *mut *mut CcmaxSdpSolution,
) -> CcmaxStatus {
    guarded(|| {
        let i = &borrow(inst, "instance")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = SolveOptions {
            restarts,
            seed,
            integral_seed: Some(integral_signs(&best_known_assignment(i)?)),
            ..SolveOptions::default()
        };
        let inner = solve(&relax(i), &opts)?;
        out.write(Box::into_raw(Box::new(CcmaxSdpSolution { inner })));
        Ok(())
    })
}

/// Release a solution. Null is ignored.
///
/// # Safety
/// `sol` must be null or a handle from `ccmax_sdp_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ccmax_sdp_free(sol: *mut CcmaxSdpSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Objective value with its worst residual; `converged` reports solver status.
///
/// # Safety
/// `sol` must be a live handle; out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ccmax_sdp_summary(
    sol: *const CcmaxSdpSolution,
    objective: *mut f64,
    max_residual: *mut f64,
    converged: *mut bool,
) -> CcmaxStatus {
    guarded(|| {
        let s = &borrow(sol, "solution")?.inner;
        write_out(objective, s.objective_value, "objective")?;
        write_out(max_residual, s.residuals.max(), "max_residual")?;
        write_out(converged, s.converged, "converged")
    })
}

/// Bias μ_i of variable `i` (0-based).
///
/// # Safety
/// `sol` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ccmax_sdp_mu(sol: *const CcmaxSdpSolution, i: usize, out: *mut f64) -> CcmaxStatus {
    guarded(|| {
        let s = &borrow(sol, "solution")?.inner;
        if i >= s.n() {
            return Err(CcmaxStatusError(CcmaxStatus::Domain, format!("variable {i} outside 0..{}", s.n())));
        }
        write_out(out, s.mu(i), "out")
    })
}

/// Best-of-`rounds` threshold rounding with cardinality repair.
///
/// # Safety
/// Handles must be live; `assignment` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ccmax_round(
    inst: *const CcmaxInstance,
    sol: *const CcmaxSdpSolution,
    rounds: usize,
    seed: u64,
    assignment: *mut i8,
    len: usize,
    value: *mut f64,
) -> CcmaxStatus {
    guarded(|| {
        let i = &borrow(inst, "instance")?.inner;
        let s = &borrow(sol, "solution")?.inner;
        let rep = round_best_of(i, s, rounds, seed)?;
        write_signs(&rep.best_assignment, assignment, len)?;
        write_out(value, rep.best_value, "value")
    })
}
