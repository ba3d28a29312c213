use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ustar::{find_dcont_max, shock_curve_boundary_point, UStar};
use super::{d_cont_slice, d_max_with_shock, dmax_hessian};
use crate::numerics::loglog_slope;
use crate::relent::{pi_diagnostics, random_direction, Family, PiSampler, ShockContext};
use crate::systems::{State, SystemRef};

/// Sample sizes and tolerances of [`sweep_negativity`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    /// Rejection samples of `Π` for `D_cont`.
    pub interior: usize,
    /// Ray samples of `∂Π` (only the two roots in one dimension).
    pub boundary: usize,
    /// Points on the segment from `u_L` to `u₀`.
    pub segment: usize,
    /// How many interior samples also get `D_max`.
    pub dmax_samples: usize,
    /// Points in a log-spaced cloud around `u_L` that get `D_max`.
    pub near_left: usize,
    /// How many `D_max` samples are checked against a dense scan in `s`.
    pub scan_samples: usize,
    pub scan_points: usize,
    /// `tol_zero = tol_zero_factor · s₀²`.
    pub tol_zero_factor: f64,
    /// The `D_max` argmax must lie within `argmax_radius · s₀` of `u_L`.
    pub argmax_radius: f64,
    pub scan_tolerance: f64,
    pub locate_ustar: bool,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            interior: 10_000,
            boundary: 1000,
            segment: 50,
            dmax_samples: 2000,
            near_left: 40,
            scan_samples: 20,
            scan_points: 200,
            tol_zero_factor: 1e-12,
            argmax_radius: 1e-3,
            scan_tolerance: 1e-12,
            locate_ustar: true,
            seed: 7,
        }
    }
}

/// One evaluated state.
#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub kind: &'static str,
    pub u: Vec<f64>,
    pub eta_tilde: f64,
    pub d_cont: f64,
    pub d_max: Option<f64>,
    pub s_star: Option<f64>,
}

/// Outcome of a negativity sweep over `Π`.
#[derive(Debug, Clone, Serialize)]
pub struct NegativityReport {
    pub system: String,
    pub family: Family,
    pub c: f64,
    pub s0: f64,
    pub weight_ratio: f64,
    pub samples: usize,
    pub dmax_evaluations: usize,
    pub max_d_cont: f64,
    pub argmax_d_cont: Vec<f64>,
    pub d_cont_violations: usize,
    /// `−max D_cont / s₀³`.
    pub k_fit: f64,
    pub d_cont_u0: f64,
    pub max_d_max: f64,
    pub argmax_d_max: Vec<f64>,
    /// `|argmax D_max − u_L| / s₀`.
    pub argmax_offset: f64,
    pub d_max_left: f64,
    pub d_max_violations: usize,
    pub tol_zero: f64,
    /// Largest `D_RH(u, S(s), σ(s)) − D_max(u)` seen in the dense scans.
    pub max_scan_excess: f64,
    pub errors: usize,
    pub first_error: Option<String>,
    pub ustar: Option<UStar>,
    pub ustar_error: Option<String>,
    pub truncated: bool,
    pub d_cont_negative: bool,
    pub d_max_nonpositive: bool,
    pub d_max_left_zero: bool,
    pub argmax_near_left: bool,
    pub scan_confirms_maximum: bool,
    pub passed: bool,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

impl NegativityReport {
    /// Whether any sampled value has the wrong sign.
    pub fn has_violations(&self) -> bool {
        self.d_cont_violations > 0 || self.d_max_violations > 0
    }
}

fn near_left_cloud<R: Rng + ?Sized>(ctx: &ShockContext, count: usize, rng: &mut R) -> Vec<State> {
    let n = ctx.dim();
    let s0 = ctx.s0();
    (0..count)
        .filter_map(|k| {
            // Radii from 1e-4 s₀ to 1e-1 s₀.
            let t = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.0 };
            let r = s0 * 10f64.powf(-4.0 + 3.0 * t);
            let d = if n == 1 {
                State::from_element(1, if k % 2 == 0 { 1.0 } else { -1.0 })
            } else {
                random_direction(n, rng)
            };
            let u = ctx.u_left() + d * r;
            ctx.in_pi(&u).then_some(u)
        })
        .collect()
}

/// Samples `Π` and checks `D_cont < 0` and `D_max ≤ tol_zero`.
///
/// The sample always includes `u_L`, the curve point `u₀` on `∂Π`, the segment
/// between them and (when located) the maximizer `u*` of `D_cont`.
pub fn sweep_negativity(ctx: &ShockContext, opts: &SweepOptions) -> NegativityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = ctx.dim();
    let s0 = ctx.s0();
    let tol_zero = opts.tol_zero_factor * s0 * s0;
    let mut records: Vec<SampleRecord> = Vec::new();
    let mut errors = 0usize;
    let mut first_error: Option<String> = None;
    let mut note = |e: String, errors: &mut usize| {
        *errors += 1;
        if first_error.is_none() {
            first_error = Some(e);
        }
    };

    let push = |records: &mut Vec<SampleRecord>, kind: &'static str, u: &State| {
        let eta = ctx.tilde_eta_slice(u.as_slice());
        records.push(SampleRecord {
            kind,
            u: u.as_slice().to_vec(),
            eta_tilde: eta,
            d_cont: d_cont_slice(ctx, u.as_slice()),
            d_max: None,
            s_star: None,
        });
    };

    push(&mut records, "left", ctx.u_left());
    let mut truncated = false;
    match PiSampler::new(ctx, 64, &mut rng) {
        Ok(sampler) => {
            truncated = sampler.truncated();
            for _ in 0..opts.interior {
                match sampler.sample_interior(&mut rng) {
                    Ok(u) => push(&mut records, "interior", &u),
                    Err(e) => {
                        note(e.to_string(), &mut errors);
                        break;
                    }
                }
            }
            if n == 1 {
                for p in sampler.seed_boundary() {
                    if ctx.tilde_eta_slice(p.as_slice()).abs() <= ctx.tol_boundary() {
                        push(&mut records, "boundary", p);
                    }
                }
            } else {
                for _ in 0..opts.boundary {
                    match sampler.random_boundary(&mut rng) {
                        Ok(hit) if !hit.truncated => push(&mut records, "boundary", &hit.point),
                        Ok(_) => {}
                        Err(e) => note(e.to_string(), &mut errors),
                    }
                }
            }
        }
        Err(e) => note(e.to_string(), &mut errors),
    }

    let mut d_cont_u0 = f64::NAN;
    match shock_curve_boundary_point(ctx) {
        Ok(p0) => {
            for k in 0..opts.segment {
                let t = k as f64 / opts.segment as f64;
                let u = ctx.u_left() + (&p0.state - ctx.u_left()) * t;
                push(&mut records, "segment", &u);
            }
            push(&mut records, "u0", &p0.state);
            d_cont_u0 = d_cont_slice(ctx, p0.state.as_slice());
        }
        Err(e) => note(format!("u0: {e}"), &mut errors),
    }

    let (ustar, ustar_error) = if opts.locate_ustar {
        match find_dcont_max(ctx) {
            Ok(us) => {
                push(&mut records, "ustar", &State::from_column_slice(&us.point));
                (Some(us), None)
            }
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };

    // D_max on u_L, a cloud around it, the segment and a prefix of the interior samples.
    let cloud = near_left_cloud(ctx, opts.near_left, &mut rng);
    for u in &cloud {
        push(&mut records, "near_left", u);
    }
    let mut interior_budget = opts.dmax_samples;
    let mut scans_left = opts.scan_samples;
    let mut max_scan_excess = f64::NEG_INFINITY;
    let mut dmax_evaluations = 0;
    for rec in records.iter_mut() {
        let wanted = match rec.kind {
            "left" | "near_left" | "segment" => true,
            "interior" if interior_budget > 0 => {
                interior_budget -= 1;
                true
            }
            _ => false,
        };
        if !wanted || !(rec.eta_tilde < 0.0) {
            continue;
        }
        let u = State::from_column_slice(&rec.u);
        match d_max_with_shock(ctx, &u) {
            Ok((d, ms)) => {
                dmax_evaluations += 1;
                rec.d_max = Some(d);
                rec.s_star = Some(ms.s_star);
                if scans_left > 0 && rec.kind != "left" {
                    scans_left -= 1;
                    match ms.scan_excess(ctx, opts.scan_points) {
                        Ok(x) => max_scan_excess = max_scan_excess.max(x / (1.0 + d.abs())),
                        Err(e) => note(format!("scan: {e}"), &mut errors),
                    }
                }
            }
            Err(e) => note(format!("D_max at {:?}: {e}", rec.u), &mut errors),
        }
    }

    let in_pi = |r: &&SampleRecord| r.eta_tilde < 0.0 || r.kind == "boundary" || r.kind == "u0" || r.kind == "ustar";
    let (mut max_d_cont, mut argmax_d_cont) = (f64::NEG_INFINITY, Vec::new());
    let mut d_cont_violations = 0;
    for r in records.iter().filter(in_pi) {
        if r.d_cont >= 0.0 {
            d_cont_violations += 1;
        }
        if r.d_cont > max_d_cont {
            max_d_cont = r.d_cont;
            argmax_d_cont = r.u.clone();
        }
    }
    let (mut max_d_max, mut argmax_d_max) = (f64::NEG_INFINITY, Vec::new());
    let mut d_max_violations = 0;
    let mut d_max_left = f64::NAN;
    for r in &records {
        let Some(d) = r.d_max else { continue };
        if r.kind == "left" {
            d_max_left = d;
        }
        if d > tol_zero {
            d_max_violations += 1;
        }
        if d > max_d_max {
            max_d_max = d;
            argmax_d_max = r.u.clone();
        }
    }
    let argmax_offset = if argmax_d_max.is_empty() {
        f64::INFINITY
    } else {
        (State::from_column_slice(&argmax_d_max) - ctx.u_left()).norm() / s0
    };
    if max_scan_excess == f64::NEG_INFINITY {
        max_scan_excess = 0.0;
    }

    let d_cont_negative = max_d_cont < 0.0 && d_cont_violations == 0;
    let d_max_nonpositive = max_d_max <= tol_zero && d_max_violations == 0;
    let d_max_left_zero = d_max_left.abs() <= tol_zero;
    let argmax_near_left = argmax_offset <= opts.argmax_radius;
    let scan_confirms_maximum = max_scan_excess <= opts.scan_tolerance;
    let passed = d_cont_negative
        && d_max_nonpositive
        && d_max_left_zero
        && argmax_near_left
        && scan_confirms_maximum
        && errors == 0;

    NegativityReport {
        system: ctx.original_system().name(),
        family: ctx.family(),
        c: ctx.c(),
        s0,
        weight_ratio: ctx.weight_ratio(),
        samples: records.len(),
        dmax_evaluations,
        max_d_cont,
        argmax_d_cont,
        d_cont_violations,
        k_fit: -max_d_cont / s0.powi(3),
        d_cont_u0,
        max_d_max,
        argmax_d_max,
        argmax_offset,
        d_max_left,
        d_max_violations,
        tol_zero,
        max_scan_excess,
        errors,
        first_error,
        ustar,
        ustar_error,
        truncated,
        d_cont_negative,
        d_max_nonpositive,
        d_max_left_zero,
        argmax_near_left,
        scan_confirms_maximum,
        passed,
        records,
    }
}

/// Grid and sample sizes of [`scaling_study`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingOptions {
    pub c_list: Vec<f64>,
    pub s0_list: Vec<f64>,
    pub sweep: SweepOptions,
    /// Boundary samples for the geometry diagnostics.
    pub geometry_samples: usize,
    /// Step of the `D_max` Hessian at `u_L`, relative to `min(s₀, 1/C)`.
    pub hessian_step: f64,
    pub slope_window: (f64, f64),
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            c_list: vec![50.0, 100.0, 200.0],
            s0_list: vec![1e-3, 3e-3, 1e-2],
            sweep: SweepOptions { dmax_samples: 100, near_left: 10, scan_samples: 5, ..SweepOptions::default() },
            geometry_samples: 200,
            hessian_step: 0.05,
            slope_window: (2.7, 3.3),
        }
    }
}

/// One `(C, s₀)` cell of the study.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingCell {
    pub c: f64,
    pub s0: f64,
    pub max_d_cont: f64,
    pub k_fit: f64,
    pub max_d_max: f64,
    pub negativity_passed: bool,
    pub diameter: f64,
    pub diameter_times_c: f64,
    pub min_grad_over_s0: f64,
    pub normal_ratio_min: f64,
    pub normal_ratio_max: f64,
    /// `|u* − u₀| · C / s₀`.
    pub ustar_offset_scaled: Option<f64>,
    pub ustar_angle: Option<f64>,
    pub ustar_boundary_residual: Option<f64>,
    pub ustar_outward: Option<bool>,
    pub hessian_eigenvalues: Vec<f64>,
    pub hessian_negative: bool,
    pub error: Option<String>,
}

/// Log-log slope of `−max D_cont` against `s₀` at fixed `C`.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub c: f64,
    pub slope: f64,
    pub in_window: bool,
}

/// Results of a sweep over `(C, s₀)`.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingTable {
    pub system: String,
    pub family: Family,
    pub basepoint: Vec<f64>,
    pub cells: Vec<ScalingCell>,
    pub slopes: Vec<SlopeFit>,
    /// Largest `max/min` of `diam(Π)·C` over `C` at fixed `s₀`.
    pub diameter_spread: f64,
    pub min_grad_over_s0: f64,
    pub normal_ratio_min: f64,
    pub normal_ratio_max: f64,
    /// `max/min` of `|u* − u₀|·C/s₀` over cells where it is nonzero.
    pub ustar_offset_spread: Option<f64>,
    pub ustar_offset_max: Option<f64>,
    pub all_d_cont_negative: bool,
    pub all_hessians_negative: bool,
    pub slopes_in_window: bool,
    pub failed_cells: usize,
    pub passed: bool,
}

fn hessian_eigenvalues(ctx: &ShockContext, step: f64) -> crate::error::Result<Vec<f64>> {
    let h = step * ctx.length_scale();
    let hess = dmax_hessian(ctx, ctx.u_left(), h)?;
    let mut eig: Vec<f64> = hess.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn study_cell(ctx: &ShockContext, opts: &ScalingOptions, seed: u64) -> ScalingCell {
    let sweep = sweep_negativity(ctx, &SweepOptions { seed, ..opts.sweep.clone() });
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut cell = ScalingCell {
        c: ctx.c(),
        s0: ctx.s0(),
        max_d_cont: sweep.max_d_cont,
        k_fit: sweep.k_fit,
        max_d_max: sweep.max_d_max,
        negativity_passed: sweep.passed,
        diameter: f64::NAN,
        diameter_times_c: f64::NAN,
        min_grad_over_s0: f64::NAN,
        normal_ratio_min: f64::NAN,
        normal_ratio_max: f64::NAN,
        ustar_offset_scaled: sweep.ustar.as_ref().map(|u| u.distance_to_u0 * ctx.c() / ctx.s0()),
        ustar_angle: sweep.ustar.as_ref().map(|u| u.normal_angle),
        ustar_boundary_residual: sweep.ustar.as_ref().map(|u| u.boundary_residual),
        ustar_outward: sweep.ustar.as_ref().map(|u| u.r1_dot_normal > 0.0),
        hessian_eigenvalues: Vec::new(),
        hessian_negative: false,
        error: sweep.first_error.clone().or(sweep.ustar_error.clone()),
    };
    match pi_diagnostics(ctx, opts.geometry_samples, &mut rng) {
        Ok(d) => {
            cell.diameter = d.diameter;
            cell.diameter_times_c = d.diameter * ctx.c();
            cell.min_grad_over_s0 = d.min_grad_over_s0;
            cell.normal_ratio_min = d.normal_ratio_min;
            cell.normal_ratio_max = d.normal_ratio_max;
        }
        Err(e) => cell.error = cell.error.take().or(Some(format!("geometry: {e}"))),
    }
    match hessian_eigenvalues(ctx, opts.hessian_step) {
        Ok(eig) => {
            cell.hessian_negative = eig.iter().all(|&v| v < 0.0);
            cell.hessian_eigenvalues = eig;
        }
        Err(e) => cell.error = cell.error.take().or(Some(format!("hessian: {e}"))),
    }
    cell
}

/// Runs the negativity sweep and the geometry diagnostics on every `(C, s₀)`.
///
/// Failing cells are recorded and the study continues.
pub fn scaling_study(sys: &SystemRef, d: &State, family: Family, opts: &ScalingOptions) -> ScalingTable {
    let mut cells = Vec::new();
    let mut failed_cells = 0;
    for (i, &c) in opts.c_list.iter().enumerate() {
        for (j, &s0) in opts.s0_list.iter().enumerate() {
            let seed = opts.sweep.seed.wrapping_add((i * opts.s0_list.len() + j) as u64);
            match ShockContext::new(sys, d, family, s0, c) {
                Ok(ctx) => {
                    let cell = study_cell(&ctx, opts, seed);
                    if cell.error.is_some() {
                        failed_cells += 1;
                    }
                    cells.push(cell);
                }
                Err(e) => {
                    failed_cells += 1;
                    cells.push(ScalingCell {
                        c,
                        s0,
                        max_d_cont: f64::NAN,
                        k_fit: f64::NAN,
                        max_d_max: f64::NAN,
                        negativity_passed: false,
                        diameter: f64::NAN,
                        diameter_times_c: f64::NAN,
                        min_grad_over_s0: f64::NAN,
                        normal_ratio_min: f64::NAN,
                        normal_ratio_max: f64::NAN,
                        ustar_offset_scaled: None,
                        ustar_angle: None,
                        ustar_boundary_residual: None,
                        ustar_outward: None,
                        hessian_eigenvalues: Vec::new(),
                        hessian_negative: false,
                        error: Some(e.to_string()),
                    });
                }
            }
        }
    }

    let mut slopes = Vec::new();
    for &c in &opts.c_list {
        let row: Vec<&ScalingCell> = cells.iter().filter(|x| x.c == c && x.max_d_cont < 0.0).collect();
        if row.len() >= 2 {
            let s: Vec<f64> = row.iter().map(|x| x.s0).collect();
            let v: Vec<f64> = row.iter().map(|x| -x.max_d_cont).collect();
            let slope = loglog_slope(&s, &v);
            let in_window = slope >= opts.slope_window.0 && slope <= opts.slope_window.1;
            slopes.push(SlopeFit { c, slope, in_window });
        }
    }

    let mut diameter_spread: f64 = 1.0;
    for &s0 in &opts.s0_list {
        let vals: Vec<f64> =
            cells.iter().filter(|x| x.s0 == s0 && x.diameter_times_c.is_finite()).map(|x| x.diameter_times_c).collect();
        if vals.len() >= 2 {
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            diameter_spread = diameter_spread.max(hi / lo);
        }
    }
    let fold_min = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
    let min_grad_over_s0 = fold_min(&mut cells.iter().map(|x| x.min_grad_over_s0).filter(|v| v.is_finite()));
    let normal_ratio_min = fold_min(&mut cells.iter().map(|x| x.normal_ratio_min).filter(|v| v.is_finite()));
    let normal_ratio_max = cells.iter().map(|x| x.normal_ratio_max).filter(|v| v.is_finite()).fold(0.0, f64::max);
    let offsets: Vec<f64> = cells.iter().filter_map(|x| x.ustar_offset_scaled).filter(|&v| v > 0.0).collect();
    let (ustar_offset_spread, ustar_offset_max) = if offsets.is_empty() {
        (None, None)
    } else {
        let hi = offsets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = offsets.iter().copied().fold(f64::INFINITY, f64::min);
        (Some(hi / lo), Some(hi))
    };
    let all_d_cont_negative = cells.iter().all(|x| x.max_d_cont < 0.0);
    let all_hessians_negative = cells.iter().all(|x| x.hessian_negative);
    let slopes_in_window = !slopes.is_empty() && slopes.iter().all(|s| s.in_window);
    let passed = all_d_cont_negative && all_hessians_negative && slopes_in_window && failed_cells == 0;
    ScalingTable {
        system: sys.name(),
        family,
        basepoint: d.as_slice().to_vec(),
        cells,
        slopes,
        diameter_spread,
        min_grad_over_s0,
        normal_ratio_min,
        normal_ratio_max,
        ustar_offset_spread,
        ustar_offset_max,
        all_d_cont_negative,
        all_hessians_negative,
        slopes_in_window,
        failed_cells,
        passed,
    }
}
