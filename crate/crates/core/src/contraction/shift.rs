use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fv::FVField;
use crate::error::{Error, Result};
use crate::relent::{estimate_cstar, random_direction, RelativeTo, ShockContext};
use crate::systems::{HyperbolicSystem, State};

/// Constants of the shift construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ShiftConstants {
    /// Separates `λ₁` from `λ₂` on the working ball.
    pub alpha1: f64,
    /// Bound on all wave speeds.
    pub l: f64,
    pub cstar: f64,
    /// `2 (C* + 3L)`.
    pub lambda_hat: f64,
}

/// What the calibration measured on the working ball `B(d, ε_d)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Calibration {
    pub constants: ShiftConstants,
    pub sup_lambda1: f64,
    /// `inf λ₂` over the ball; `None` for scalar laws.
    pub inf_lambda2: Option<f64>,
    pub cstar_raw: f64,
    pub cstar_empty: bool,
    pub consistent: bool,
}

impl ShiftConstants {
    pub fn new(alpha1: f64, l: f64, cstar: f64) -> Self {
        Self { alpha1, l, cstar, lambda_hat: 2.0 * (cstar + 3.0 * l) }
    }

    /// `α₁` from sampling the ball around the basepoint, `C*` from [`estimate_cstar`].
    ///
    /// For scalar laws there is no `λ₂` and `α₁` is put halfway between
    /// `sup λ₁` and `L`.
    pub fn calibrate<R: Rng + ?Sized>(
        ctx: &ShockContext,
        l: f64,
        ball_samples: usize,
        cstar_samples: usize,
        rng: &mut R,
    ) -> Result<Calibration> {
        let sys = ctx.system().as_ref();
        let n = ctx.dim();
        let d = ctx.basepoint();
        let mut sup1 = f64::NEG_INFINITY;
        let mut inf2 = f64::INFINITY;
        let mut probe = |u: &[f64]| {
            if sys.in_working_box(u) {
                let lam = sys.eigenvalues(u);
                sup1 = sup1.max(lam[0]);
                if n > 1 {
                    inf2 = inf2.min(lam[1]);
                }
            }
        };
        probe(d.as_slice());
        probe(ctx.u_left().as_slice());
        probe(ctx.u_right().as_slice());
        for _ in 0..ball_samples {
            let r = ctx.radius() * rng.gen::<f64>().powf(1.0 / n as f64);
            let u = d + random_direction(n, rng) * r;
            probe(u.as_slice());
        }
        if !sup1.is_finite() {
            return Err(Error::Precondition("working ball has no admissible samples".into()));
        }
        let (alpha1, inf_lambda2) = if n > 1 { (0.5 * (sup1 + inf2), Some(inf2)) } else { (0.5 * (sup1 + l), None) };
        let est = estimate_cstar(ctx, cstar_samples, rng);
        let constants = Self::new(alpha1, l, est.value);
        Ok(Calibration {
            constants,
            sup_lambda1: sup1,
            inf_lambda2,
            cstar_raw: est.raw_max,
            cstar_empty: est.empty,
            consistent: inf_lambda2.is_none_or(|v| sup1 < v) && sup1 < l,
        })
    }
}

/// Precomputed relative quantities for the two shock states.
#[derive(Debug, Clone)]
pub struct Weights {
    pub a1: f64,
    pub a2: f64,
    left: RelativeTo,
    right: RelativeTo,
}

impl Weights {
    /// `a₁ = a₁/a₂` of the context and `a₂ = 1`.
    pub fn new(ctx: &ShockContext) -> Self {
        let sys = ctx.system().as_ref();
        Self {
            a1: ctx.weight_ratio(),
            a2: 1.0,
            left: RelativeTo::new(sys, ctx.u_left().as_slice()),
            right: RelativeTo::new(sys, ctx.u_right().as_slice()),
        }
    }

    /// `(η(u|u_L), η(u|u_R))`.
    pub fn entropies(&self, sys: &dyn HyperbolicSystem, u: &[f64]) -> (f64, f64) {
        (self.left.entropy(sys, u), self.right.entropy(sys, u))
    }

    /// `a₁ η(u|u_L) − a₂ η(u|u_R)`; positive off `Π̄`.
    pub fn indicator_gap(&self, sys: &dyn HyperbolicSystem, u: &[f64]) -> f64 {
        let (el, er) = self.entropies(sys, u);
        self.a1 * el - self.a2 * er
    }

    /// `a₂[q(u₊;u_R) − ḣ η(u₊|u_R)] − a₁[q(u₋;u_L) − ḣ η(u₋|u_L)]`.
    pub fn interface_dissipation(&self, sys: &dyn HyperbolicSystem, um: &[f64], up: &[f64], hdot: f64) -> f64 {
        let n = sys.dim();
        let mut fm = vec![0.0; n];
        let mut fp = vec![0.0; n];
        sys.flux_into(um, &mut fm);
        sys.flux_into(up, &mut fp);
        let right = self.right.flux_with(sys, up, &fp) - hdot * self.right.entropy(sys, up);
        let left = self.left.flux_with(sys, um, &fm) - hdot * self.left.entropy(sys, um);
        self.a2 * right - self.a1 * left
    }
}

/// `V(u) = λ₁(u) − (C* + 2L) 1{a₁η(u|u_L) > a₂η(u|u_R)}`, with `λ₁ = L` off the working box.
pub fn velocity_functional(ctx: &ShockContext, weights: &Weights, constants: &ShiftConstants, u: &[f64]) -> f64 {
    let sys = ctx.system().as_ref();
    let lambda1 = if sys.in_working_box(u) { sys.lambda_first(u) } else { constants.l };
    if weights.indicator_gap(sys, u) > 0.0 {
        lambda1 - (constants.cstar + 2.0 * constants.l)
    } else {
        lambda1
    }
}

/// The four sign patterns of `a₁η(u±|u_L) − a₂η(u±|u_R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// Both traces outside `Π̄`.
    Case1,
    /// `u₋` outside, `u₊` inside.
    Case2,
    /// `u₋` inside, `u₊` outside.
    Case3,
    /// Both inside.
    Case4,
}

impl Case {
    pub fn classify(gap_minus: f64, gap_plus: f64) -> Self {
        match (gap_minus > 0.0, gap_plus > 0.0) {
            (true, true) => Case::Case1,
            (true, false) => Case::Case2,
            (false, true) => Case::Case3,
            (false, false) => Case::Case4,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Case::Case1 => 1,
            Case::Case2 => 2,
            Case::Case3 => 3,
            Case::Case4 => 4,
        }
    }
}

/// One step of the shift.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftStep {
    pub h_next: f64,
    pub hdot: f64,
    pub u_minus: Vec<f64>,
    pub u_plus: Vec<f64>,
    pub v_minus: f64,
    pub v_plus: f64,
    pub gap_minus: f64,
    pub gap_plus: f64,
    pub case: Case,
    /// The attracting branch of the Filippov selection was used.
    pub sliding: bool,
    pub dissipation: f64,
}

/// Trace cells `(k − offset, k + offset)` around `h`.
pub fn trace_cells(field: &FVField, h: f64, offset: usize) -> Result<(usize, usize)> {
    let k = field.locate(h);
    if h <= field.x_min() || h >= field.x_max() || k < offset || k + offset >= field.cells() {
        return Err(Error::Precondition(format!("shift h = {h:.6} too close to the grid boundary")));
    }
    Ok((k - offset, k + offset))
}

/// Zero crossing of `a₁η(·|u_L) − a₂η(·|u_R)` from negative to positive nearest to `h`,
/// interpolated between cell centers within `reach` cells.
fn indicator_crossing(
    sys: &dyn HyperbolicSystem,
    weights: &Weights,
    field: &FVField,
    h: f64,
    reach: usize,
) -> Option<f64> {
    let k = field.locate(h);
    let lo = k.saturating_sub(reach);
    let hi = (k + reach).min(field.cells() - 1);
    let gaps: Vec<f64> = (lo..=hi).map(|j| weights.indicator_gap(sys, field.cell(j))).collect();
    let mut best: Option<f64> = None;
    for i in 0..gaps.len().saturating_sub(1) {
        let (a, b) = (gaps[i], gaps[i + 1]);
        if a <= 0.0 && b > 0.0 {
            let xa = field.center(lo + i);
            let x = xa + (-a) / (b - a) * field.dx();
            if best.is_none_or(|y| (x - h).abs() < (y - h).abs()) {
                best = Some(x);
            }
        }
    }
    best
}

/// Advances the shift by `dt`.
///
/// `before` is the field the traces are read from and `after` the field at
/// the end of the step, used for the sliding selection: when `u₋ ∈ Π̄` and
/// `u₊ ∉ Π̄` the speeds `V(u₋) > V(u₊)` point into the discontinuity of `V`,
/// and the convex combination is chosen so that `h` follows the displaced
/// crossing of the indicator, with `θ = ½` when no crossing is found.
pub fn filippov_step(
    ctx: &ShockContext,
    weights: &Weights,
    constants: &ShiftConstants,
    before: &FVField,
    after: &FVField,
    h: f64,
    dt: f64,
    offset: usize,
) -> Result<ShiftStep> {
    let sys = ctx.system().as_ref();
    let (km, kp) = trace_cells(before, h, offset)?;
    let um = before.cell(km);
    let up = before.cell(kp);
    let v_minus = velocity_functional(ctx, weights, constants, um);
    let v_plus = velocity_functional(ctx, weights, constants, up);
    let gap_minus = weights.indicator_gap(sys, um);
    let gap_plus = weights.indicator_gap(sys, up);
    let case = Case::classify(gap_minus, gap_plus);
    let (lo, hi) = (v_minus.min(v_plus), v_minus.max(v_plus));

    let sliding = case == Case::Case3;
    let hdot = if sliding {
        match indicator_crossing(sys, weights, after, h, 2 * offset + 2) {
            Some(x) => ((x - h) / dt).clamp(lo, hi),
            None => 0.5 * (v_minus + v_plus),
        }
    } else {
        let centre = velocity_functional(ctx, weights, constants, before.cell(before.locate(h)));
        centre.clamp(lo, hi)
    };
    let dissipation = weights.interface_dissipation(sys, um, up, hdot);
    Ok(ShiftStep {
        h_next: h + dt * hdot,
        hdot,
        u_minus: um.to_vec(),
        u_plus: up.to_vec(),
        v_minus,
        v_plus,
        gap_minus,
        gap_plus,
        case,
        sliding,
        dissipation,
    })
}

/// `E = a₁ ∫_{x<h} η(u|u_L) dx + a₂ ∫_{x>h} η(u|u_R) dx`, the cell containing `h` split at `h`.
pub fn pseudo_distance(ctx: &ShockContext, weights: &Weights, field: &FVField, h: f64) -> f64 {
    let sys = ctx.system().as_ref();
    let dx = field.dx();
    let h = h.clamp(field.x_min(), field.x_max());
    let k = field.locate(h);
    let mut left = 0.0;
    let mut right = 0.0;
    for j in 0..field.cells() {
        let (el, er) = weights.entropies(sys, field.cell(j));
        if j < k {
            left += el * dx;
        } else if j > k {
            right += er * dx;
        } else {
            let a = field.x_min() + j as f64 * dx;
            let frac = ((h - a) / dx).clamp(0.0, 1.0);
            left += el * frac * dx;
            right += er * (1.0 - frac) * dx;
        }
    }
    weights.a1 * left + weights.a2 * right
}

/// Convenience for callers holding a [`State`].
pub fn velocity_at(ctx: &ShockContext, constants: &ShiftConstants, u: &State) -> f64 {
    velocity_functional(ctx, &Weights::new(ctx), constants, u.as_slice())
}
