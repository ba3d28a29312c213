//! Extremal Hugoniot curves `s ↦ (S(s), σ(s))` with `|S(s) − u₀| = s`.
//!
//! Points are written `S = u₀ + s·w` with `|w| = 1` and the Rankine-Hugoniot
//! condition divided by `s`:
//!
//! ```text
//! G(w, σ; s) = (f(u₀ + s w) − f(u₀)) / s − σ w = 0,    (|w|² − 1) / 2 = 0.
//! ```
//!
//! This chord form stays regular at `s = 0`, where it reduces to the
//! eigenproblem `f'(u₀) w = σ w`, so continuation starts from `(r₁, λ₁)`
//! without a singular first step. Last-family curves are first-family
//! curves of the mirrored system.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, composite_simpson, gl16, loglog_slope};
use crate::relent::{rel_entropy_unchecked, rel_pair_unchecked, Family};
use crate::systems::{eigenstructure, mirror_system, HyperbolicSystem, Matrix, State, SystemRef};

const NEWTON_MAX_ITER: usize = 25;
const NEWTON_STEP_TOL: f64 = 1e-13;
/// Relative chord length below which the flux quotient is integrated.
const CHORD_QUADRATURE: f64 = 0.02;
const MAX_HALVINGS: u32 = 6;

/// Rankine-Hugoniot tolerance `1e-10 (1 + |f(u₀)|)`.
pub fn rh_tolerance(sys: &dyn HyperbolicSystem, u0: &[f64]) -> f64 {
    1e-10 * (1.0 + sys.flux_vec(u0).norm())
}

/// `|f(b) − f(a) − σ (b − a)|`.
pub fn rh_residual(sys: &dyn HyperbolicSystem, a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let (fa, fb) = (sys.flux_vec(a), sys.flux_vec(b));
    let jump = DVector::from_iterator(a.len(), a.iter().zip(b).map(|(x, y)| y - x));
    (fb - fa - jump * sigma).norm()
}

#[derive(Debug, Clone)]
pub struct ShockPoint {
    pub s: f64,
    pub state: State,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    s: f64,
    sigma: f64,
}

/// How tracing ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveEnd {
    Reached,
    LeftWorkingBox { s: f64 },
}

/// Chord-form Newton solver around a fixed base state.
#[derive(Debug, Clone)]
struct Chord {
    sys: SystemRef,
    base: State,
    f0: State,
}

impl Chord {
    fn new(sys: SystemRef, base: State) -> Self {
        let f0 = sys.flux_vec(base.as_slice());
        Self { sys, base, f0 }
    }

    fn state(&self, s: f64, w: &State) -> State {
        &self.base + w * s
    }

    /// `(f(u₀ + s w) − f(u₀)) / s`, as the averaged Jacobian applied to `w`
    /// for short chords where the difference quotient would cancel.
    fn quotient(&self, s: f64, w: &State, fs: &State) -> State {
        let scale = 1.0 + self.base.norm();
        if s > CHORD_QUADRATURE * scale {
            return (fs - &self.f0) / s;
        }
        let n = self.base.len();
        let (nodes, weights) = gl16();
        let mut avg = Matrix::zeros(n, n);
        for (t, wt) in nodes.iter().zip(weights) {
            let p = &self.base + w * (s * t);
            avg += self.sys.jacobian(p.as_slice()) * *wt;
        }
        avg * w
    }

    /// Newton on `(w, σ)` at fixed `s > 0`.
    fn solve(&self, s: f64, w0: &State, sigma0: f64) -> Option<(State, f64)> {
        let n = self.base.len();
        let mut w = w0.clone();
        let mut sigma = sigma0;
        let mut converged = 0;
        for _ in 0..NEWTON_MAX_ITER {
            let st = self.state(s, &w);
            if !self.sys.is_admissible(st.as_slice()) {
                return None;
            }
            let fs = self.sys.flux_vec(st.as_slice());
            let quotient = self.quotient(s, &w, &fs);
            let jac = self.sys.jacobian(st.as_slice());
            let mut m = Matrix::zeros(n + 1, n + 1);
            let mut rhs = DVector::zeros(n + 1);
            for i in 0..n {
                for k in 0..n {
                    m[(i, k)] = jac[(i, k)];
                }
                m[(i, i)] -= sigma;
                m[(i, n)] = -w[i];
                m[(n, i)] = w[i];
                rhs[i] = -(quotient[i] - sigma * w[i]);
            }
            rhs[n] = -0.5 * (w.norm_squared() - 1.0);
            let delta = m.lu().solve(&rhs)?;
            for i in 0..n {
                w[i] += delta[i];
            }
            sigma += delta[n];
            let size = delta.norm();
            if !size.is_finite() {
                return None;
            }
            if size <= NEWTON_STEP_TOL * (1.0 + sigma.abs()) {
                converged += 1;
                if converged == 2 {
                    return Some((w, sigma));
                }
            }
        }
        if converged > 0 {
            Some((w, sigma))
        } else {
            None
        }
    }

    /// `(w', σ')` from differentiating `G = 0` in `s`.
    fn tangent(&self, s: f64, w: &State, sigma: f64) -> Option<(State, f64)> {
        let n = self.base.len();
        let st = self.state(s, w);
        let jac = self.sys.jacobian(st.as_slice());
        let mut m = Matrix::zeros(n + 1, n + 1);
        let slope = &jac * w - w * sigma;
        let mut rhs = DVector::zeros(n + 1);
        for i in 0..n {
            for k in 0..n {
                m[(i, k)] = jac[(i, k)];
            }
            m[(i, i)] -= sigma;
            m[(i, n)] = -w[i];
            m[(n, i)] = w[i];
            rhs[i] = -slope[i] / s;
        }
        let sol = m.lu().solve(&rhs)?;
        let dw = DVector::from_iterator(n, sol.iter().take(n).copied());
        Some((dw, sol[n]))
    }
}

/// A traced extremal shock curve.
#[derive(Debug, Clone)]
pub struct ShockCurve {
    family: Family,
    chord: Chord,
    speed_sign: f64,
    ds: f64,
    nodes: Vec<Node>,
    dirs: Vec<State>,
    lambda0: f64,
    gnl0: f64,
    end: CurveEnd,
}

impl ShockCurve {
    /// Seed a curve at `s = 0` without stepping.
    pub fn start(sys: &SystemRef, base: &State, family: Family, ds: f64) -> Result<Self> {
        Self::start_oriented(sys, base, family, ds, false)
    }

    /// Seed the opposite branch of the Hugoniot locus, leaving along `−rᵢ`.
    /// It carries no admissible shocks and is only traced to check that.
    pub fn start_reversed(sys: &SystemRef, base: &State, family: Family, ds: f64) -> Result<Self> {
        Self::start_oriented(sys, base, family, ds, true)
    }

    fn start_oriented(sys: &SystemRef, base: &State, family: Family, ds: f64, reversed: bool) -> Result<Self> {
        if !(ds > 0.0 && ds.is_finite()) {
            return Err(Error::Range(format!("step must be positive, got {ds}")));
        }
        let (solver, sign) = match family {
            Family::First => (sys.clone(), 1.0),
            Family::Last => (mirror_system(sys), -1.0),
        };
        let eig = eigenstructure(solver.as_ref(), base)?;
        let flip = if reversed { -1.0 } else { 1.0 };
        let chord = Chord::new(solver, base.clone());
        Ok(Self {
            family,
            chord,
            speed_sign: sign,
            ds,
            nodes: vec![Node { s: 0.0, sigma: eig.lambda[0] }],
            dirs: vec![&eig.right[0] * flip],
            lambda0: eig.lambda[0],
            gnl0: flip * eig.gnl[0],
            end: CurveEnd::Reached,
        })
    }

    pub fn base(&self) -> &State {
        &self.chord.base
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The system in which this is a first-family curve.
    pub fn solver_system(&self) -> &SystemRef {
        &self.chord.sys
    }

    /// Orientation of reported speeds relative to the solver system.
    pub fn speed_sign(&self) -> f64 {
        self.speed_sign
    }

    pub fn extent(&self) -> f64 {
        self.nodes.last().map_or(0.0, |n| n.s)
    }

    pub fn end(&self) -> CurveEnd {
        self.end
    }

    pub fn step(&self) -> f64 {
        self.ds
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, k: usize) -> ShockPoint {
        let nd = self.nodes[k];
        ShockPoint { s: nd.s, state: self.chord.state(nd.s, &self.dirs[k]), speed: self.speed_sign * nd.sigma }
    }

    pub fn nodes(&self) -> impl Iterator<Item = ShockPoint> + '_ {
        (0..self.nodes.len()).map(|k| self.node(k))
    }

    /// Continue the curve up to `s_target` (or until it leaves the working box).
    pub fn extend_to(&mut self, s_target: f64) -> Result<()> {
        if matches!(self.end, CurveEnd::LeftWorkingBox { .. }) {
            return Ok(());
        }
        let mut h = self.ds;
        while self.extent() < s_target {
            let k = self.nodes.len() - 1;
            let s_prev = self.nodes[k].s;
            let s_next = (s_prev + h).min(s_target);
            let (w_guess, sig_guess) = if k == 0 {
                (self.dirs[0].clone(), self.lambda0 + 0.5 * s_next * self.gnl0)
            } else {
                let t = (s_next - s_prev) / (s_prev - self.nodes[k - 1].s);
                let w = &self.dirs[k] + (&self.dirs[k] - &self.dirs[k - 1]) * t;
                let sig = self.nodes[k].sigma + (self.nodes[k].sigma - self.nodes[k - 1].sigma) * t;
                (&w / w.norm(), sig)
            };
            match self.chord.solve(s_next, &w_guess, sig_guess) {
                Some((w, sigma)) => {
                    let st = self.chord.state(s_next, &w);
                    if !self.chord.sys.in_working_box(st.as_slice()) {
                        self.end = CurveEnd::LeftWorkingBox { s: s_prev };
                        return Ok(());
                    }
                    self.nodes.push(Node { s: s_next, sigma });
                    self.dirs.push(w);
                    if h < self.ds {
                        h = (2.0 * h).min(self.ds);
                    }
                }
                None => {
                    h *= 0.5;
                    if h < self.ds / f64::from(1u32 << MAX_HALVINGS) {
                        return Err(Error::Continuation {
                            reached: s_prev,
                            reason: "Newton failed after step halving".into(),
                            partial: Some(Box::new(self.clone())),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn locate(&self, s: f64) -> Result<usize> {
        let end = self.extent();
        if !(s >= 0.0 && s <= end * (1.0 + 1e-14)) {
            return Err(Error::Range(format!("s = {s:.6e} outside [0, {end:.6e}]")));
        }
        let k = self.nodes.partition_point(|n| n.s <= s);
        Ok(k.saturating_sub(1).min(self.nodes.len().saturating_sub(2)))
    }

    /// Cubic interpolation of `(w, σ)` followed by Newton re-projection.
    fn solve_at(&self, s: f64) -> Result<(State, f64)> {
        if let Ok(k) = self.nodes.binary_search_by(|n| n.s.total_cmp(&s)) {
            return Ok((self.dirs[k].clone(), self.nodes[k].sigma));
        }
        let k = self.locate(s)?;
        let m = self.nodes.len();
        let lo = k.saturating_sub(1).min(m.saturating_sub(4));
        let hi = (lo + 4).min(m);
        let idx: Vec<usize> = (lo..hi).collect();
        let mut w = State::zeros(self.chord.base.len());
        let mut sigma = 0.0;
        for &i in &idx {
            let mut basis = 1.0;
            for &j in &idx {
                if i != j {
                    basis *= (s - self.nodes[j].s) / (self.nodes[i].s - self.nodes[j].s);
                }
            }
            w += &self.dirs[i] * basis;
            sigma += basis * self.nodes[i].sigma;
        }
        let w = &w / w.norm();
        self.chord.solve(s, &w, sigma).ok_or_else(|| Error::Continuation {
            reached: s,
            reason: "re-projection onto the Hugoniot locus failed".into(),
            partial: None,
        })
    }

    /// Point at arclength `s`.
    pub fn at(&self, s: f64) -> Result<ShockPoint> {
        let (w, sigma) = self.solve_at(s)?;
        Ok(ShockPoint { s, state: self.chord.state(s, &w), speed: self.speed_sign * sigma })
    }

    /// Point with `dS/ds` and `dσ/ds` from the tangent solve.
    pub fn at_with_tangent(&self, s: f64) -> Result<(ShockPoint, State, f64)> {
        let (w, sigma) = self.solve_at(s)?;
        let point = ShockPoint { s, state: self.chord.state(s, &w), speed: self.speed_sign * sigma };
        if s == 0.0 {
            return Ok((point, w, self.speed_sign * 0.5 * self.gnl0));
        }
        let (dw, dsigma) = self
            .chord
            .tangent(s, &w, sigma)
            .ok_or_else(|| Error::Degeneracy(format!("singular tangent system at s = {s:.6e}")))?;
        Ok((point, w + dw * s, self.speed_sign * dsigma))
    }

    /// `dσ/ds` in the original system.
    pub fn speed_derivative(&self, s: f64) -> Result<f64> {
        self.at_with_tangent(s).map(|(_, _, d)| d)
    }
}

/// Trace the family-`i` curve from `u₀` up to `s_max`.
pub fn trace_shock_curve(sys: &SystemRef, u0: &State, family: Family, s_max: f64, ds: f64) -> Result<ShockCurve> {
    if !(s_max >= 0.0 && s_max.is_finite()) {
        return Err(Error::Range(format!("s_max must be nonnegative, got {s_max}")));
    }
    if !sys.in_working_box(u0.as_slice()) {
        return Err(Error::Domain(format!("base state {:?} outside the working box", u0.as_slice())));
    }
    let mut curve = ShockCurve::start(sys, u0, family, ds)?;
    curve.extend_to(s_max)?;
    Ok(curve)
}

/// `default ds = s_max / 400`.
pub fn trace_default(sys: &SystemRef, u0: &State, family: Family, s_max: f64) -> Result<ShockCurve> {
    trace_shock_curve(sys, u0, family, s_max, s_max / 400.0)
}

pub fn shock_at(curve: &ShockCurve, s: f64) -> Result<ShockPoint> {
    curve.at(s)
}

/// Leading-order asymptotics of a curve near its base.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AsymptoticsReport {
    pub s: Vec<f64>,
    pub speed_gap: Vec<f64>,
    pub state_gap: Vec<f64>,
    pub speed_slope: f64,
    pub state_slope: f64,
    pub speed_vacuous: bool,
    pub state_vacuous: bool,
    pub passed: bool,
}

/// Below this the gap is treated as rounding noise.
const VACUOUS_GAP: f64 = 1e-12;

/// Fits the decay of `|σ − (λ(u₀)+λ(S))/2|` and `|S − u₀ − s r(u₀)|`.
pub fn check_asymptotics(sys: &SystemRef, u0: &State, family: Family) -> Result<AsymptoticsReport> {
    let curve = trace_shock_curve(sys, u0, family, 1e-2, 1e-2 / 400.0)?;
    if curve.extent() < 1e-2 {
        return Err(Error::Range("curve left the working box before s = 1e-2".into()));
    }
    let solver = curve.solver_system().clone();
    let r0 = curve.dirs[0].clone();
    let lam0 = solver.lambda_first(u0.as_slice());
    let s: Vec<f64> = (0..9).map(|k| 10f64.powf(-4.0 + 0.25 * k as f64)).collect();
    let mut speed_gap = Vec::new();
    let mut state_gap = Vec::new();
    for &si in &s {
        let p = curve.at(si)?;
        let sigma = curve.speed_sign * p.speed;
        let lam = solver.lambda_first(p.state.as_slice());
        speed_gap.push((sigma - 0.5 * (lam0 + lam)).abs());
        state_gap.push((&p.state - u0 - &r0 * si).norm());
    }
    let fit = |gaps: &[f64]| -> (f64, bool) {
        if gaps.iter().fold(0.0_f64, |m, g| m.max(*g)) < VACUOUS_GAP {
            (f64::NAN, true)
        } else {
            let floor: Vec<f64> = gaps.iter().map(|g| g.max(f64::MIN_POSITIVE)).collect();
            (loglog_slope(&s, &floor), false)
        }
    };
    let (speed_slope, speed_vacuous) = fit(&speed_gap);
    let (state_slope, state_vacuous) = fit(&state_gap);
    let ok = |slope: f64, vac: bool| vac || slope >= 1.9;
    Ok(AsymptoticsReport {
        passed: ok(speed_slope, speed_vacuous) && ok(state_slope, state_vacuous),
        s,
        speed_gap,
        state_gap,
        speed_slope,
        state_slope,
        speed_vacuous,
        state_vacuous,
    })
}

fn lax_sides(curve: &ShockCurve, v: &State, s: f64) -> Result<(f64, ShockPoint)> {
    let sys = curve.solver_system().as_ref();
    let p = curve.at(s)?;
    let sigma = curve.speed_sign * p.speed;
    let u0 = curve.base();
    let (eta_s, q_s) = rel_pair_unchecked(sys, p.state.as_slice(), v.as_slice());
    let (eta_0, q_0) = rel_pair_unchecked(sys, u0.as_slice(), v.as_slice());
    Ok(((q_s - sigma * eta_s) - (q_0 - sigma * eta_0), p))
}

fn lax_integrand(curve: &ShockCurve, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    match curve.at_with_tangent(t) {
        Ok((p, _, dsigma)) => {
            let sys = curve.solver_system().as_ref();
            curve.speed_sign * dsigma * rel_entropy_unchecked(sys, curve.base().as_slice(), p.state.as_slice())
        }
        Err(_) => f64::NAN,
    }
}

/// Residual of the entropy-loss identity along the curve, adaptive Simpson at `tol`.
pub fn lax_identity_residual_tol(curve: &ShockCurve, v: &State, s: f64, tol: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let (lhs, _) = lax_sides(curve, v, s)?;
    let integral = adaptive_simpson(|t| lax_integrand(curve, t), 0.0, s, tol, 40)?;
    Ok((lhs - integral).abs())
}

/// Residual with the default quadrature tolerance `1e-11`.
pub fn lax_identity_residual(curve: &ShockCurve, v: &State, s: f64) -> Result<f64> {
    lax_identity_residual_tol(curve, v, s, 1e-11)
}

/// Residual with a fixed composite Simpson rule of `panels` subintervals.
pub fn lax_identity_residual_fixed(curve: &ShockCurve, v: &State, s: f64, panels: usize) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let (lhs, _) = lax_sides(curve, v, s)?;
    let integral = composite_simpson(|t| lax_integrand(curve, t), 0.0, s, panels);
    if !integral.is_finite() {
        return Err(Error::Integration("non-finite integrand on the curve".into()));
    }
    Ok((lhs - integral).abs())
}
