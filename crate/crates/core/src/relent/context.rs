use serde::{Deserialize, Serialize};

use super::{rel_entropy_unchecked, rel_pair_unchecked};
use crate::error::{Error, Result};
use crate::hugoniot::{rh_residual, rh_tolerance, trace_shock_curve, ShockCurve};
use crate::systems::{mirror_system, require_admissible, State, SystemRef};

/// Extremal characteristic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "1")]
    First,
    #[serde(rename = "n")]
    Last,
}

/// A small extremal shock with the weights that define `η̃`, `q̃` and `Π`.
///
/// Everything is stored in the reduced frame where the shock is a 1-shock:
/// for a last-family shock this is the mirrored system, whose left state is
/// the original right state. `excess` is `a₁/a₂ − 1` (equal to `C s₀` unless
/// the ratio was overridden), kept separately to avoid cancellation.
#[derive(Debug, Clone)]
pub struct ShockContext {
    original: SystemRef,
    reduced: SystemRef,
    family: Family,
    u_left: State,
    u_right: State,
    speed: f64,
    s0: f64,
    c: f64,
    excess: f64,
    basepoint: State,
    radius: f64,
    grad_left: Vec<f64>,
    grad_right: Vec<f64>,
    eta_lr: f64,
    curve: ShockCurve,
}

impl ShockContext {
    /// Shock of strength `s0` from `base` along `family`, weighted with `a₁/a₂ = 1 + C s₀`.
    ///
    /// For the first family `base` is `u_L`; for the last family it is `u_R`.
    pub fn new(sys: &SystemRef, base: &State, family: Family, s0: f64, c: f64) -> Result<Self> {
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(Error::Precondition(format!("shock strength must be positive, got {s0}")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Precondition(format!("weight coefficient must be nonnegative, got {c}")));
        }
        let curve = trace_shock_curve(sys, base, family, s0, s0 / 400.0)?;
        if curve.extent() < s0 {
            return Err(Error::Truncation { exit: curve.extent() });
        }
        let end = curve.at(s0)?;
        let reduced = match family {
            Family::First => sys.clone(),
            Family::Last => mirror_system(sys),
        };
        let speed = curve.speed_sign() * end.speed;
        Self::assemble(sys.clone(), reduced, family, base.clone(), end.state, speed, s0, c, c * s0, curve)
    }

    /// Context from explicit states, as the original system sees them: `(u_L, u_R, σ)`
    /// is validated for Rankine-Hugoniot and Liu admissibility of `family`.
    pub fn from_states(sys: &SystemRef, u_l: &State, u_r: &State, sigma: f64, family: Family, c: f64) -> Result<Self> {
        require_admissible(sys.as_ref(), u_l)?;
        require_admissible(sys.as_ref(), u_r)?;
        let res = rh_residual(sys.as_ref(), u_l.as_slice(), u_r.as_slice(), sigma);
        let tol = rh_tolerance(sys.as_ref(), u_l.as_slice());
        if res > tol {
            return Err(Error::InconsistentShock { residual: res, tol });
        }
        let (reduced, left, right, speed) = match family {
            Family::First => (sys.clone(), u_l.clone(), u_r.clone(), sigma),
            Family::Last => (mirror_system(sys), u_r.clone(), u_l.clone(), -sigma),
        };
        let lam_l = reduced.lambda_first(left.as_slice());
        let lam_r = reduced.lambda_first(right.as_slice());
        if !(lam_r < speed && speed < lam_l) {
            return Err(Error::Precondition(format!(
                "not Liu admissible: λ(right) = {lam_r:.6e}, σ = {speed:.6e}, λ(left) = {lam_l:.6e}"
            )));
        }
        let s0 = (&right - &left).norm();
        let base = left.clone();
        let curve = trace_shock_curve(sys, &base, family, s0, s0 / 400.0)?;
        Self::assemble(sys.clone(), reduced, family, left, right, speed, s0, c, c * s0, curve)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        original: SystemRef,
        reduced: SystemRef,
        family: Family,
        u_left: State,
        u_right: State,
        speed: f64,
        s0: f64,
        c: f64,
        excess: f64,
        curve: ShockCurve,
    ) -> Result<Self> {
        let n = reduced.dim();
        let mut grad_left = vec![0.0; n];
        let mut grad_right = vec![0.0; n];
        reduced.entropy_grad_into(u_left.as_slice(), &mut grad_left);
        reduced.entropy_grad_into(u_right.as_slice(), &mut grad_right);
        let eta_lr = rel_entropy_unchecked(reduced.as_ref(), u_left.as_slice(), u_right.as_slice());
        Ok(Self {
            original,
            reduced,
            family,
            basepoint: u_left.clone(),
            radius: 5.0 * s0,
            u_left,
            u_right,
            speed,
            s0,
            c,
            excess,
            grad_left,
            grad_right,
            eta_lr,
            curve,
        })
    }

    /// Replace the weight ratio `a₁/a₂` (keeps `C` for geometry scales).
    pub fn with_weight_ratio(mut self, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::Precondition(format!("weight ratio must be positive, got {ratio}")));
        }
        self.excess = ratio - 1.0;
        Ok(self)
    }

    pub fn with_basepoint(mut self, d: State, radius: f64) -> Result<Self> {
        require_admissible(self.reduced.as_ref(), &d)?;
        if !(radius > 0.0) {
            return Err(Error::Precondition("basepoint radius must be positive".into()));
        }
        self.basepoint = d;
        self.radius = radius;
        Ok(self)
    }

    /// `1 + C₁s₀/2 ≤ a₁/a₂ ≤ 1 + 2C₁s₀`.
    pub fn check_window(&self, c1: f64) -> Result<()> {
        let (lo, hi) = (0.5 * c1 * self.s0, 2.0 * c1 * self.s0);
        if self.excess < lo || self.excess > hi {
            return Err(Error::Precondition(format!(
                "weight ratio 1 + {:.4e} outside [1 + {lo:.4e}, 1 + {hi:.4e}]",
                self.excess
            )));
        }
        Ok(())
    }

    /// The system in which this shock is a 1-shock.
    pub fn system(&self) -> &SystemRef {
        &self.reduced
    }

    pub fn original_system(&self) -> &SystemRef {
        &self.original
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn u_left(&self) -> &State {
        &self.u_left
    }

    pub fn u_right(&self) -> &State {
        &self.u_right
    }

    /// Speed in the reduced frame.
    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// `(u_L, u_R, σ)` as seen by the original system.
    pub fn original_shock(&self) -> (State, State, f64) {
        match self.family {
            Family::First => (self.u_left.clone(), self.u_right.clone(), self.speed),
            Family::Last => (self.u_right.clone(), self.u_left.clone(), -self.speed),
        }
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `a₁/a₂ − 1`.
    pub fn excess(&self) -> f64 {
        self.excess
    }

    pub fn weight_ratio(&self) -> f64 {
        1.0 + self.excess
    }

    pub fn basepoint(&self) -> &State {
        &self.basepoint
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `η(u_L | u_R)`, so that `η̃(u_L) = −eta_lr`.
    pub fn eta_lr(&self) -> f64 {
        self.eta_lr
    }

    /// The traced curve `S¹_{u_L}` on `[0, s₀]`.
    pub fn curve(&self) -> &ShockCurve {
        &self.curve
    }

    /// Accepted residual on `∂Π`: `1e-11 s₀²`, since `η̃` itself scales like `s₀²`.
    pub fn tol_boundary(&self) -> f64 {
        1e-11 * self.s0 * self.s0
    }

    /// Natural length scale of `Π`: `min(s₀, 1/C)`.
    pub fn length_scale(&self) -> f64 {
        if self.c > 0.0 {
            self.s0.min(1.0 / self.c)
        } else {
            self.s0
        }
    }

    pub fn tilde_eta_slice(&self, u: &[f64]) -> f64 {
        let sys = self.reduced.as_ref();
        let el = rel_entropy_unchecked(sys, u, self.u_left.as_slice());
        let er = rel_entropy_unchecked(sys, u, self.u_right.as_slice());
        el + self.excess * el - er
    }

    pub fn tilde_pair_slice(&self, u: &[f64]) -> (f64, f64) {
        let sys = self.reduced.as_ref();
        let (el, ql) = rel_pair_unchecked(sys, u, self.u_left.as_slice());
        let (er, qr) = rel_pair_unchecked(sys, u, self.u_right.as_slice());
        (el + self.excess * el - er, ql + self.excess * ql - qr)
    }

    /// `η̃(u) = (1 + Cs₀) η(u|u_L) − η(u|u_R)`.
    pub fn tilde_eta(&self, u: &State) -> Result<f64> {
        require_admissible(self.reduced.as_ref(), u)?;
        Ok(self.tilde_eta_slice(u.as_slice()))
    }

    /// `q̃(u) = (1 + Cs₀) q(u;u_L) − q(u;u_R)`.
    pub fn tilde_q(&self, u: &State) -> Result<f64> {
        require_admissible(self.reduced.as_ref(), u)?;
        Ok(self.tilde_pair_slice(u.as_slice()).1)
    }

    pub fn tilde_pair(&self, u: &State) -> Result<(f64, f64)> {
        require_admissible(self.reduced.as_ref(), u)?;
        Ok(self.tilde_pair_slice(u.as_slice()))
    }

    pub fn in_pi(&self, u: &State) -> bool {
        self.reduced.is_admissible(u.as_slice()) && self.tilde_eta_slice(u.as_slice()) < 0.0
    }

    /// `∇η̃(u) = Cs₀ (∇η(u) − ∇η(u_L)) + (∇η(u_R) − ∇η(u_L))`.
    pub fn grad_tilde_eta(&self, u: &[f64]) -> State {
        let n = self.reduced.dim();
        let mut g = vec![0.0; n];
        self.reduced.entropy_grad_into(u, &mut g);
        State::from_iterator(
            n,
            (0..n).map(|k| self.excess * (g[k] - self.grad_left[k]) + (self.grad_right[k] - self.grad_left[k])),
        )
    }

    pub fn grad_left(&self) -> &[f64] {
        &self.grad_left
    }

    pub fn grad_right(&self) -> &[f64] {
        &self.grad_right
    }

    pub fn lambda1(&self, u: &[f64]) -> f64 {
        self.reduced.lambda_first(u)
    }

    pub fn dim(&self) -> usize {
        self.reduced.dim()
    }
}
