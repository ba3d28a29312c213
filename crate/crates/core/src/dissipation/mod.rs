//! Dissipation functionals at the shifted interface and the sweeps that
//! check their sign.
//!
//! All functionals live in the reduced frame of the [`ShockContext`], where
//! the shock is a 1-shock with weights `a₁/a₂ = 1 + C s₀`.

mod sweep;
mod ustar;

use crate::error::{Error, Result};
use crate::hugoniot::{rh_residual, rh_tolerance, ShockCurve};
use crate::numerics::brent_root;
use crate::relent::{rel_entropy_unchecked, rel_pair_unchecked, Family, ShockContext};
use crate::systems::{eigenstructure, require_admissible, State};

pub use sweep::{
    scaling_study, sweep_negativity, NegativityReport, SampleRecord, ScalingCell, ScalingOptions, ScalingTable,
    SlopeFit, SweepOptions,
};
pub use ustar::{find_dcont_max, shock_curve_boundary_point, UStar};

/// `D_cont(u) = −q̃(u) + λ₁(u) η̃(u)` without checks.
pub fn d_cont_slice(ctx: &ShockContext, u: &[f64]) -> f64 {
    let (e, q) = ctx.tilde_pair_slice(u);
    -q + ctx.lambda1(u) * e
}

/// `D_cont(u) = −q̃(u) + λ₁(u) η̃(u)`.
pub fn d_cont(ctx: &ShockContext, u: &State) -> Result<f64> {
    require_admissible(ctx.system().as_ref(), u)?;
    Ok(d_cont_slice(ctx, u.as_slice()))
}

fn d_rh_slice(ctx: &ShockContext, um: &[f64], up: &[f64], sigma: f64) -> f64 {
    let sys = ctx.system().as_ref();
    let (er, qr) = rel_pair_unchecked(sys, up, ctx.u_right().as_slice());
    let (el, ql) = rel_pair_unchecked(sys, um, ctx.u_left().as_slice());
    let left = ql - sigma * el;
    (qr - sigma * er) - left - ctx.excess() * left
}

/// `D_RH(u₋, u₊, σ) = [q(u₊;u_R) − σ η(u₊|u_R)] − (1 + Cs₀)[q(u₋;u_L) − σ η(u₋|u_L)]`.
pub fn d_rh(ctx: &ShockContext, um: &State, up: &State, sigma: f64) -> Result<f64> {
    let sys = ctx.system().as_ref();
    require_admissible(sys, um)?;
    require_admissible(sys, up)?;
    let res = rh_residual(sys, um.as_slice(), up.as_slice(), sigma);
    let tol = rh_tolerance(sys, um.as_slice());
    if res > tol {
        return Err(Error::InconsistentShock { residual: res, tol });
    }
    Ok(d_rh_slice(ctx, um.as_slice(), up.as_slice(), sigma))
}

/// The shock from `u` whose strength satisfies `η(u|u⁺) = −η̃(u)`.
#[derive(Debug, Clone)]
pub struct MaximalShock {
    pub u: State,
    pub u_plus: State,
    pub speed: f64,
    pub s_star: f64,
    /// `|η̃(u) + η(u|u⁺)|`.
    pub g_residual: f64,
    /// The curve `S¹_u` traced past `s*`.
    pub curve: ShockCurve,
}

impl MaximalShock {
    /// `D_RH` along the curve from `u` at arclength `s`.
    pub fn d_rh_at(&self, ctx: &ShockContext, s: f64) -> Result<f64> {
        let p = self.curve.at(s)?;
        Ok(d_rh_slice(ctx, self.u.as_slice(), p.state.as_slice(), p.speed))
    }

    /// Largest `D_RH(u, S(s), σ(s)) − D_max(u)` over `points` equispaced `s ∈ (0, 2s*]`.
    pub fn scan_excess(&self, ctx: &ShockContext, points: usize) -> Result<f64> {
        let dmax = d_rh_slice(ctx, self.u.as_slice(), self.u_plus.as_slice(), self.speed);
        let top = self.curve.extent().min(2.0 * self.s_star);
        let mut worst = f64::NEG_INFINITY;
        for k in 1..=points {
            let s = top * k as f64 / points as f64;
            worst = worst.max(self.d_rh_at(ctx, s)? - dmax);
        }
        Ok(worst)
    }
}

/// `s* > 0` with `g(s*) = η̃(u) + η(u|S¹_u(s*)) = 0`.
pub fn maximal_shock(ctx: &ShockContext, u: &State) -> Result<MaximalShock> {
    let sys = ctx.system();
    require_admissible(sys.as_ref(), u)?;
    let e = ctx.tilde_eta_slice(u.as_slice());
    if !(e < 0.0) {
        return Err(Error::Precondition(format!("maximal shock needs u ∈ Π, η̃(u) = {e:.3e}")));
    }
    let hess = sys.entropy_hessian(u.as_slice());
    let r1 = eigenstructure(sys.as_ref(), u)?.right.swap_remove(0);
    let curvature = 0.5 * r1.dot(&(&hess * &r1));
    let guess = (-e / curvature).sqrt();
    let mut curve = ShockCurve::start(sys, u, Family::First, guess / 16.0)?;

    let g = |curve: &ShockCurve, s: f64| -> Result<f64> {
        let p = curve.at(s)?;
        Ok(e + rel_entropy_unchecked(sys.as_ref(), u.as_slice(), p.state.as_slice()))
    };
    let mut lo = 0.0;
    let mut hi = guess;
    loop {
        curve.extend_to(hi)?;
        if curve.extent() < hi {
            let top = curve.extent();
            if top > lo && g(&curve, top)? >= 0.0 {
                hi = top;
                break;
            }
            return Err(Error::Truncation { exit: top });
        }
        if g(&curve, hi)? >= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    let mut failure = None;
    let mut s_star = brent_root(
        |s| match g(&curve, s) {
            Ok(v) => v,
            Err(err) => {
                failure = Some(err);
                f64::NAN
            }
        },
        lo,
        hi,
        4.0 * f64::EPSILON * hi,
        200,
    )
    .map_err(|err| failure.clone().unwrap_or(err))?;

    // One Newton polish with g'(s) = (S − u)ᵀ ∇²η(S) S'(s).
    let (p, dstate, _) = curve.at_with_tangent(s_star)?;
    let offset = &p.state - u;
    let slope = offset.dot(&(sys.entropy_hessian(p.state.as_slice()) * &dstate));
    let g_here = g(&curve, s_star)?;
    if slope > 0.0 {
        let next = s_star - g_here / slope;
        if next > lo && next <= curve.extent() && g(&curve, next)?.abs() < g_here.abs() {
            s_star = next;
        }
    }
    let p = curve.at(s_star)?;
    let g_residual = g(&curve, s_star)?.abs();
    Ok(MaximalShock { u: u.clone(), u_plus: p.state, speed: p.speed, s_star, g_residual, curve })
}

/// `max_s D_RH(u, S¹_u(s), σ¹_u(s))`, attained at the maximal shock.
pub fn d_max(ctx: &ShockContext, u: &State) -> Result<f64> {
    let ms = maximal_shock(ctx, u)?;
    Ok(d_rh_slice(ctx, u.as_slice(), ms.u_plus.as_slice(), ms.speed))
}

/// `D_max` together with its maximal shock.
pub fn d_max_with_shock(ctx: &ShockContext, u: &State) -> Result<(f64, MaximalShock)> {
    let ms = maximal_shock(ctx, u)?;
    Ok((d_rh_slice(ctx, u.as_slice(), ms.u_plus.as_slice(), ms.speed), ms))
}

/// `∇D_max(u) = [∇η(u⁺) − ∇η(u_R) − (1+Cs₀)(∇η(u) − ∇η(u_L))] (f'(u) − σ± I)`.
pub fn dmax_gradient(ctx: &ShockContext, u: &State) -> Result<State> {
    let ms = maximal_shock(ctx, u)?;
    Ok(gradient_from_shock(ctx, &ms))
}

fn gradient_from_shock(ctx: &ShockContext, ms: &MaximalShock) -> State {
    let sys = ctx.system();
    let n = sys.dim();
    let gp = sys.entropy_grad(ms.u_plus.as_slice());
    let gu = sys.entropy_grad(ms.u.as_slice());
    let (gl, gr) = (ctx.grad_left(), ctx.grad_right());
    let v = State::from_iterator(
        n,
        (0..n).map(|k| {
            let inner = gu[k] - gl[k];
            (gp[k] - gr[k]) - inner - ctx.excess() * inner
        }),
    );
    let shifted = sys.jacobian(ms.u.as_slice()) - crate::systems::Matrix::identity(n, n) * ms.speed;
    shifted.transpose() * v
}

/// Analytic vs central-difference gradient of `D_max`.
#[derive(Debug, Clone)]
pub struct GradientCheck {
    pub analytic: State,
    pub numeric: State,
    pub relative_error: f64,
    pub s_star: f64,
}

/// Compares [`dmax_gradient`] against central differences with step `1e-3 min(s₀, 1/C)`.
pub fn dmax_gradient_check(ctx: &ShockContext, u: &State) -> Result<GradientCheck> {
    let ms = maximal_shock(ctx, u)?;
    let analytic = gradient_from_shock(ctx, &ms);
    let n = u.len();
    let h = 1e-3 * ctx.length_scale();
    let mut numeric = State::zeros(n);
    for k in 0..n {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[k] += h;
        dn[k] -= h;
        numeric[k] = (d_max(ctx, &up)? - d_max(ctx, &dn)?) / (2.0 * h);
    }
    let scale = analytic.norm().max(numeric.norm()).max(f64::MIN_POSITIVE);
    Ok(GradientCheck { relative_error: (&analytic - &numeric).norm() / scale, analytic, numeric, s_star: ms.s_star })
}

/// Central-difference Hessian of `D_max` built from the analytic gradient.
pub fn dmax_hessian(ctx: &ShockContext, u: &State, h: f64) -> Result<crate::systems::Matrix> {
    let n = u.len();
    let mut hess = crate::systems::Matrix::zeros(n, n);
    for k in 0..n {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[k] += h;
        dn[k] -= h;
        let col = (dmax_gradient(ctx, &up)? - dmax_gradient(ctx, &dn)?) / (2.0 * h);
        hess.set_column(k, &col);
    }
    Ok((&hess + hess.transpose()) * 0.5)
}
