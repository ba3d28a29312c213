//! C ABI for `acontract`.
//!
//! Systems, shock contexts and shock curves are opaque handles created by
//! `ac_*_new` functions and released with the matching `ac_*_free`. Every
//! fallible function returns an [`AcStatus`]; on failure a message is kept
//! per thread and can be copied out with [`ac_last_error_message`]. Arrays
//! are passed as pointer plus length, and output arrays must hold at least
//! `ac_system_dim` elements.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use acontract::hugoniot::{trace_default, ShockCurve};
use acontract::relent::{rel_entropy, rel_entropy_flux};
use acontract::systems::{entropy_pair, flux, require_admissible, State, SystemRef, SystemSpec};
use acontract::{dissipation, Error, Family, ShockContext};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Degeneracy = 4,
    NotFound = 5,
    Continuation = 6,
    Range = 7,
    Integration = 8,
    InconsistentShock = 9,
    Precondition = 10,
    Truncation = 11,
    BlowUp = 12,
    Config = 13,
    Panic = 99,
}

/// Extremal family of a shock.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcFamily {
    First = 0,
    Last = 1,
}

impl From<AcFamily> for Family {
    fn from(f: AcFamily) -> Self {
        match f {
            AcFamily::First => Family::First,
            AcFamily::Last => Family::Last,
        }
    }
}

/// A hyperbolic system with its entropy pair.
pub struct AcSystem {
    inner: SystemRef,
}

/// A weighted shock `(u_L, u_R, σ)`.
pub struct AcContext {
    inner: ShockContext,
}

/// A traced extremal shock curve.
pub struct AcCurve {
    inner: ShockCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> AcStatus {
    match e {
        Error::Domain(_) => AcStatus::Domain,
        Error::Degeneracy(_) => AcStatus::Degeneracy,
        Error::NotFound(_) => AcStatus::NotFound,
        Error::Continuation { .. } => AcStatus::Continuation,
        Error::Range(_) => AcStatus::Range,
        Error::Integration(_) => AcStatus::Integration,
        Error::InconsistentShock { .. } => AcStatus::InconsistentShock,
        Error::Precondition(_) => AcStatus::Precondition,
        Error::Truncation { .. } => AcStatus::Truncation,
        Error::BlowUp { .. } => AcStatus::BlowUp,
        Error::Config(_) => AcStatus::Config,
    }
}

/// Failure raised inside a wrapper.
enum Fail {
    Null(&'static str),
    Arg(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> AcStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f));
    let (status, msg) = match outcome {
        Ok(Ok(())) => return AcStatus::Ok,
        Ok(Err(Fail::Null(name))) => (AcStatus::NullPointer, format!("null pointer: {name}")),
        Ok(Err(Fail::Arg(m))) => (AcStatus::InvalidArgument, m),
        Ok(Err(Fail::Core(e))) => (status_of(&e), e.to_string()),
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (AcStatus::Panic, format!("panic: {m}"))
        }
    };
    set_error(msg);
    status
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn input(p: *const f64, len: usize, name: &'static str) -> Result<&'static [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, name: &'static str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(p: *mut T, v: T, name: &'static str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    p.write(v);
    Ok(())
}

fn state(u: &[f64], dim: usize, name: &str) -> Result<State, Fail> {
    if u.len() != dim {
        return Err(Fail::Arg(format!("{name} has {} components, expected {dim}", u.len())));
    }
    Ok(State::from_column_slice(u))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes. Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ac_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn new_system(spec: SystemSpec, out: *mut *mut AcSystem) -> AcStatus {
    guard(|| {
        let sys = spec.build()?;
        unsafe { write(out, boxed(AcSystem { inner: sys }), "out") }
    })
}

/// Inviscid Burgers with `η = u²/2`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ac_system_new_burgers(out: *mut *mut AcSystem) -> AcStatus {
    new_system(SystemSpec::Burgers { working_box: None }, out)
}

/// Isentropic Euler in `(ρ, m)` with `p = ρ^γ`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ac_system_new_isentropic_euler(gamma: f64, out: *mut *mut AcSystem) -> AcStatus {
    new_system(SystemSpec::IsentropicEuler { gamma, working_box: None }, out)
}

/// Full Euler in `(ρ, m, E)` with the physical entropy.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ac_system_new_full_euler(gamma: f64, out: *mut *mut AcSystem) -> AcStatus {
    new_system(SystemSpec::FullEuler { gamma, working_box: None }, out)
}

/// Any built-in system from its JSON description, e.g. `{"kind":"burgers"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ac_system_from_json(json: *const c_char, out: *mut *mut AcSystem) -> AcStatus {
    guard(|| {
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| Fail::Arg(format!("json is not UTF-8: {e}")))?;
        let spec: SystemSpec = serde_json::from_str(text).map_err(|e| Fail::Arg(format!("system json: {e}")))?;
        let sys = spec.build()?;
        write(out, boxed(AcSystem { inner: sys }), "out")
    })
}

/// # Safety
/// `sys` must be null or a handle from `ac_system_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ac_system_free(sys: *mut AcSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of conserved components, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ac_system_dim(sys: *const AcSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.dim())
}

/// `f(u)` into `out[0..n]`.
///
/// # Safety
/// `u` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ac_flux(sys: *const AcSystem, u: *const f64, n: usize, out: *mut f64) -> AcStatus {
    guard(|| {
        let s = &handle(sys, "sys")?.inner;
        let u = state(input(u, n, "u")?, s.dim(), "u")?;
        output(out, n, "out")?.copy_from_slice(flux(s.as_ref(), &u)?.as_slice());
        Ok(())
    })
}

/// `(η(u), q(u))`.
///
/// # Safety
/// `u` must point to `n` doubles; `eta` and `q` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ac_entropy(
    sys: *const AcSystem,
    u: *const f64,
    n: usize,
    eta: *mut f64,
    q: *mut f64,
) -> AcStatus {
    guard(|| {
        let s = &handle(sys, "sys")?.inner;
        let u = state(input(u, n, "u")?, s.dim(), "u")?;
        let (e, f) = entropy_pair(s.as_ref(), &u)?;
        write(eta, e, "eta")?;
        write(q, f, "q")
    })
}

/// Eigenvalues of `f'(u)` in increasing order.
///
/// # Safety
/// `u` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ac_eigenvalues(sys: *const AcSystem, u: *const f64, n: usize, out: *mut f64) -> AcStatus {
    guard(|| {
        let s = &handle(sys, "sys")?.inner;
        let u = state(input(u, n, "u")?, s.dim(), "u")?;
        require_admissible(s.as_ref(), &u)?;
        output(out, n, "out")?.copy_from_slice(&s.eigenvalues(u.as_slice()));
        Ok(())
    })
}

/// `η(a|b)` and, when `q` is non-null, `q(a;b)`.
///
/// # Safety
/// `a` and `b` must point to `n` doubles; `eta` must be valid, `q` may be null.
#[no_mangle]
pub unsafe extern "C" fn ac_relative_entropy(
    sys: *const AcSystem,
    a: *const f64,
    b: *const f64,
    n: usize,
    eta: *mut f64,
    q: *mut f64,
) -> AcStatus {
    guard(|| {
        let s = &handle(sys, "sys")?.inner;
        let a = state(input(a, n, "a")?, s.dim(), "a")?;
        let b = state(input(b, n, "b")?, s.dim(), "b")?;
        write(eta, rel_entropy(s.as_ref(), &a, &b)?, "eta")?;
        if !q.is_null() {
            q.write(rel_entropy_flux(s.as_ref(), &a, &b)?);
        }
        Ok(())
    })
}

/// Shock of strength `s0` from `base` (`u_L` for the first family, `u_R` for
/// the last) with weights `a₁/a₂ = 1 + c s0`.
///
/// # Safety
/// `base` must point to `n` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ac_context_new(
    sys: *const AcSystem,
    base: *const f64,
    n: usize,
    family: AcFamily,
    s0: f64,
    c: f64,
    out: *mut *mut AcContext,
) -> AcStatus {
    guard(|| {
        let s = &handle(sys, "sys")?.inner;
        let base = state(input(base, n, "base")?, s.dim(), "base")?;
        let ctx = ShockContext::new(s, &base, family.into(), s0, c)?;
        write(out, boxed(AcContext { inner: ctx }), "out")
    })
}

/// Replaces the weight ratio `a₁/a₂` of a context.
///
/// # Safety
/// `ctx` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ac_context_set_weight_ratio(ctx: *mut AcContext, ratio: f64) -> AcStatus {
    guard(|| {
        let c = ctx.as_mut().ok_or(Fail::Null("ctx"))?;
        c.inner = c.inner.clone().with_weight_ratio(ratio)?;
        Ok(())
    })
}

/// # Safety
/// `ctx` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ac_context_free(ctx: *mut AcContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// The shock as the original system sees it: `u_L`, `u_R` and `σ`.
///
/// # Safety
/// `u_left` and `u_right` must point to `n` doubles, `speed` be valid.
#[no_mangle]
pub unsafe extern "C" fn ac_context_shock(
    ctx: *const AcContext,
    u_left: *mut f64,
    u_right: *mut f64,
    n: usize,
    speed: *mut f64,
) -> AcStatus {
    guard(|| {
        let c = &handle(ctx, "ctx")?.inner;
        if n != c.dim() {
            return Err(Fail::Arg(format!("buffers have {n} components, expected {}", c.dim())));
        }
        let (l, r, sigma) = c.original_shock();
        output(u_left, n, "u_left")?.copy_from_slice(l.as_slice());
        output(u_right, n, "u_right")?.copy_from_slice(r.as_slice());
        write(speed, sigma, "speed")
    })
}

type ContextFn = fn(&ShockContext, &State) -> acontract::Result<f64>;

unsafe fn eval_context(ctx: *const AcContext, u: *const f64, n: usize, out: *mut f64, f: ContextFn) -> AcStatus {
    guard(|| {
        let c = &handle(ctx, "ctx")?.inner;
        let u = state(input(u, n, "u")?, c.dim(), "u")?;
        write(out, f(c, &u)?, "out")
    })
}

/// `η̃(u) = a₁η(u|u_L) − a₂η(u|u_R)` in the context's reduced frame.
///
/// # Safety
/// `u` must point to `n` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn ac_tilde_eta(ctx: *const AcContext, u: *const f64, n: usize, out: *mut f64) -> AcStatus {
    eval_context(ctx, u, n, out, |c, u| c.tilde_eta(u))
}

/// `D_cont(u)`.
///
/// # Safety
/// `u` must point to `n` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn ac_d_cont(ctx: *const AcContext, u: *const f64, n: usize, out: *mut f64) -> AcStatus {
    eval_context(ctx, u, n, out, dissipation::d_cont)
}

/// `D_max(u)`, the dissipation of the maximal 1-shock from `u ∈ Π̄`.
///
/// # Safety
/// `u` must point to `n` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn ac_d_max(ctx: *const AcContext, u: *const f64, n: usize, out: *mut f64) -> AcStatus {
    eval_context(ctx, u, n, out, dissipation::d_max)
}

/// Traces the extremal shock curve from `u0` up to arclength `s_max`.
///
/// # Safety
/// `u0` must point to `n` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ac_curve_trace(
    sys: *const AcSystem,
    u0: *const f64,
    n: usize,
    family: AcFamily,
    s_max: f64,
    out: *mut *mut AcCurve,
) -> AcStatus {
    guard(|| {
        let s = &handle(sys, "sys")?.inner;
        let u0 = state(input(u0, n, "u0")?, s.dim(), "u0")?;
        let curve = trace_default(s, &u0, family.into(), s_max)?;
        write(out, boxed(AcCurve { inner: curve }), "out")
    })
}

/// Arclength reached by the trace (less than `s_max` if it left the working box).
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ac_curve_extent(curve: *const AcCurve) -> f64 {
    curve.as_ref().map_or(f64::NAN, |c| c.inner.extent())
}

/// State `S(s)` and speed `σ(s)` on the curve.
///
/// # Safety
/// `state_out` must point to `n` doubles and `speed` be valid.
#[no_mangle]
pub unsafe extern "C" fn ac_curve_at(
    curve: *const AcCurve,
    s: f64,
    state_out: *mut f64,
    n: usize,
    speed: *mut f64,
) -> AcStatus {
    guard(|| {
        let c = &handle(curve, "curve")?.inner;
        let p = c.at(s)?;
        if n != p.state.len() {
            return Err(Fail::Arg(format!("buffer has {n} components, expected {}", p.state.len())));
        }
        output(state_out, n, "state_out")?.copy_from_slice(p.state.as_slice());
        write(speed, p.speed, "speed")
    })
}

/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ac_curve_free(curve: *mut AcCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}
