use serde::{Deserialize, Serialize};

use super::fv::{FVField, Rusanov};
use super::shift::{filippov_step, pseudo_distance, Case, ShiftConstants, Weights};
use crate::error::{Error, Result};
use crate::relent::ShockContext;

/// Numerical settings of a contraction run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub t_end: f64,
    pub cfl: f64,
    /// Trace cells sit this many cells from the shift.
    pub trace_offset: usize,
    pub tol_entropy: f64,
    /// Interface dissipation above this counts as positive.
    pub tol_dissipation: f64,
    /// Case 2 steps with both `|gaps|` above this are counted as genuine.
    pub trace_tolerance: f64,
    /// Acceptable drift constant: `E_t − min_{s≤t} E_s ≤ k_tol_max Δx t`.
    pub k_tol_max: f64,
    /// Record the trajectory every this many steps (the summary always uses every step).
    pub record_every: usize,
    /// Times at which the whole field is kept.
    pub snapshot_times: Vec<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            t_end: 0.2,
            cfl: 0.45,
            trace_offset: 1,
            tol_entropy: 1e-12,
            tol_dissipation: 1e-12,
            trace_tolerance: 1e-12,
            k_tol_max: 0.05,
            record_every: 1,
            snapshot_times: Vec::new(),
        }
    }
}

/// Trajectory of the shift, one entry per recorded step.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ShiftPath {
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub hdot: Vec<f64>,
    pub u_minus: Vec<Vec<f64>>,
    pub u_plus: Vec<Vec<f64>>,
    pub case: Vec<Case>,
    pub dissipation: Vec<f64>,
    /// `E_t` at the end of each recorded step.
    pub e: Vec<f64>,
}

/// A kept field.
#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub h: f64,
    pub x: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

/// Aggregate results of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub t_end: f64,
    pub dx: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub e0: f64,
    pub e_end: f64,
    pub e_max: f64,
    /// `max_t (E_t − min_{s≤t} E_s)`.
    pub max_drift: f64,
    /// `max_t (E_t − min_{s≤t} E_s) / (Δx t)`.
    pub k_tol: f64,
    pub k_tol_max: f64,
    pub e_decreased: bool,
    pub case_counts: [usize; 4],
    pub case2_genuine: usize,
    /// Steps whose case differs from the previous step.
    pub case_switches: usize,
    pub hdot_min: f64,
    pub hdot_max: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub window_violations: usize,
    pub containment_violations: usize,
    pub lipschitz_violations: usize,
    pub positive_dissipation_steps: usize,
    pub max_dissipation: f64,
    pub entropy_flagged_steps: usize,
    pub max_cell_entropy_residual: f64,
    pub max_total_entropy_residual: f64,
    pub h_start: f64,
    pub h_end: f64,
    pub terminated: Option<String>,
    pub monotone: bool,
    pub passed: bool,
}

/// A finished run: constants, trajectory, series and summary.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionRun {
    pub system: String,
    pub c: f64,
    pub s0: f64,
    pub weight_ratio: f64,
    pub speed: f64,
    pub constants: ShiftConstants,
    pub options: RunOptions,
    pub summary: RunSummary,
    pub path: ShiftPath,
    pub snapshots: Vec<Snapshot>,
    #[serde(skip)]
    pub final_field: Option<FVField>,
}

fn snapshot(field: &FVField, h: f64) -> Snapshot {
    Snapshot {
        t: field.time(),
        h,
        x: (0..field.cells()).map(|j| field.center(j)).collect(),
        u: (0..field.cells()).map(|j| field.cell(j).to_vec()).collect(),
    }
}

/// Co-evolves the field and the shift from `h0` until `t_end`.
///
/// The time step is `CFL Δx / (max|λ| + ‖V‖∞)` so the shift crosses at most
/// a fraction of a cell per step. A blow-up of the field is an error; the
/// shift reaching the trace stencil at the grid boundary ends the run early
/// with `terminated` set.
pub fn run_contraction(
    ctx: &ShockContext,
    field: FVField,
    h0: f64,
    constants: &ShiftConstants,
    opts: &RunOptions,
) -> Result<ContractionRun> {
    if !(opts.t_end > 0.0 && opts.cfl > 0.0 && opts.cfl <= 1.0) {
        return Err(Error::Config("t_end must be positive and CFL in (0, 1]".into()));
    }
    if opts.trace_offset == 0 {
        return Err(Error::Config("trace offset must be at least one cell".into()));
    }
    let sys = ctx.system().as_ref();
    if field.dim() != sys.dim() {
        return Err(Error::Config("field dimension does not match the system".into()));
    }
    field.validate(sys)?;
    let weights = Weights::new(ctx);
    let v_bound = constants.cstar + 3.0 * constants.l;
    let window_lo = -0.5 * constants.lambda_hat;
    let window_hi = constants.alpha1;
    let dx = field.dx();
    let slack = 1e-12 * (1.0 + v_bound);

    let mut solver = Rusanov::new(&field);
    let mut current = field;
    let mut next = current.clone();
    let mut h = h0;
    let e0 = pseudo_distance(ctx, &weights, &current, h);
    let mut path = ShiftPath::default();
    path.t.push(0.0);
    path.h.push(h);
    path.e.push(e0);
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = opts.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    while pending.last().is_some_and(|&t| t <= 0.0) {
        pending.pop();
        snapshots.push(snapshot(&current, h));
    }

    let mut s = RunSummary {
        steps: 0,
        t_end: 0.0,
        dx,
        dt_min: f64::INFINITY,
        dt_max: 0.0,
        e0,
        e_end: e0,
        e_max: e0,
        max_drift: 0.0,
        k_tol: 0.0,
        k_tol_max: opts.k_tol_max,
        e_decreased: false,
        case_counts: [0; 4],
        case2_genuine: 0,
        case_switches: 0,
        hdot_min: f64::INFINITY,
        hdot_max: f64::NEG_INFINITY,
        window_lo,
        window_hi,
        window_violations: 0,
        containment_violations: 0,
        lipschitz_violations: 0,
        positive_dissipation_steps: 0,
        max_dissipation: f64::NEG_INFINITY,
        entropy_flagged_steps: 0,
        max_cell_entropy_residual: f64::NEG_INFINITY,
        max_total_entropy_residual: f64::NEG_INFINITY,
        h_start: h0,
        h_end: h0,
        terminated: None,
        monotone: true,
        passed: false,
    };
    let mut e_min = e0;
    let mut last_case: Option<Case> = None;

    while current.time() < opts.t_end * (1.0 - 1e-14) {
        let top = solver.prepare(sys, &current);
        let mut dt = opts.cfl * dx / (top + v_bound);
        dt = dt.min(opts.t_end - current.time());
        next.clone_from(&current);
        let entropy = solver.advance(sys, &mut next, dt, opts.tol_entropy)?;
        let step = match filippov_step(ctx, &weights, constants, &current, &next, h, dt, opts.trace_offset) {
            Ok(step) => step,
            Err(e) => {
                s.terminated = Some(format!("t = {:.6}: {e}", current.time()));
                break;
            }
        };
        std::mem::swap(&mut current, &mut next);
        h = step.h_next;
        let t = current.time();
        let e = pseudo_distance(ctx, &weights, &current, h);

        s.steps += 1;
        s.dt_min = s.dt_min.min(dt);
        s.dt_max = s.dt_max.max(dt);
        s.case_counts[step.case.index() - 1] += 1;
        if step.case == Case::Case2 && step.gap_minus > opts.trace_tolerance && -step.gap_plus > opts.trace_tolerance {
            s.case2_genuine += 1;
        }
        if last_case.is_some_and(|c| c != step.case) {
            s.case_switches += 1;
        }
        last_case = Some(step.case);
        s.hdot_min = s.hdot_min.min(step.hdot);
        s.hdot_max = s.hdot_max.max(step.hdot);
        if step.hdot < window_lo - slack || step.hdot > window_hi + slack {
            s.window_violations += 1;
        }
        let (lo, hi) = (step.v_minus.min(step.v_plus), step.v_minus.max(step.v_plus));
        if step.hdot < lo - slack || step.hdot > hi + slack {
            s.containment_violations += 1;
        }
        if step.hdot.abs() > v_bound + slack {
            s.lipschitz_violations += 1;
        }
        if step.dissipation > opts.tol_dissipation {
            s.positive_dissipation_steps += 1;
        }
        s.max_dissipation = s.max_dissipation.max(step.dissipation);
        if entropy.flagged_cells > 0 {
            s.entropy_flagged_steps += 1;
        }
        s.max_cell_entropy_residual = s.max_cell_entropy_residual.max(entropy.max_cell_residual);
        s.max_total_entropy_residual = s.max_total_entropy_residual.max(entropy.total_residual);
        s.e_max = s.e_max.max(e);
        e_min = e_min.min(e);
        let drift = e - e_min;
        s.max_drift = s.max_drift.max(drift);
        if t > 0.0 {
            s.k_tol = s.k_tol.max(drift / (dx * t));
        }

        if s.steps % opts.record_every.max(1) == 0 || current.time() >= opts.t_end * (1.0 - 1e-14) {
            path.t.push(t);
            path.h.push(h);
            path.hdot.push(step.hdot);
            path.u_minus.push(step.u_minus);
            path.u_plus.push(step.u_plus);
            path.case.push(step.case);
            path.dissipation.push(step.dissipation);
            path.e.push(e);
        }
        while pending.last().is_some_and(|&ts| ts <= t) {
            pending.pop();
            snapshots.push(snapshot(&current, h));
        }
        s.e_end = e;
        s.t_end = t;
        s.h_end = h;
    }

    s.e_decreased = s.e_end < s.e0;
    s.monotone = s.k_tol <= opts.k_tol_max;
    s.passed = s.terminated.is_none()
        && s.monotone
        && s.window_violations == 0
        && s.containment_violations == 0
        && s.case2_genuine == 0
        && s.e_end >= 0.0;
    let (_, _, speed) = ctx.original_shock();
    Ok(ContractionRun {
        system: ctx.original_system().name(),
        c: ctx.c(),
        s0: ctx.s0(),
        weight_ratio: ctx.weight_ratio(),
        speed,
        constants: *constants,
        options: opts.clone(),
        summary: s,
        path,
        snapshots,
        final_field: Some(current),
    })
}
