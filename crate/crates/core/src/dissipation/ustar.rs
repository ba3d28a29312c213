use serde::Serialize;

use super::d_cont_slice;
use crate::error::{Error, Result};
use crate::hugoniot::ShockPoint;
use crate::numerics::{brent_root, nelder_mead, orthonormal_complement, NelderMeadOptions};
use crate::relent::{default_max_radius, normal, ray_crossing, ShockContext};
use crate::systems::{eigenstructure, State};

/// Maximizer of `D_cont` over `Π` with its optimality residuals.
#[derive(Debug, Clone, Serialize)]
pub struct UStar {
    pub point: Vec<f64>,
    pub d_cont: f64,
    /// `|η̃(u*)|`.
    pub boundary_residual: f64,
    /// Angle in radians between `ν(u*)` and the line spanned by `l¹(u*)`.
    pub normal_angle: f64,
    /// `r₁(u*)·ν(u*)`, positive when `r₁` points out of `Π`.
    pub r1_dot_normal: f64,
    /// Intersection `u₀` of the shock curve from `u_L` with `∂Π`.
    pub u0: Vec<f64>,
    pub s_u0: f64,
    pub d_cont_u0: f64,
    /// `|u* − u₀|`.
    pub distance_to_u0: f64,
    pub starts: usize,
    /// Largest distance between multi-start results that tie with the best value.
    pub spread: f64,
    pub diameter_estimate: f64,
    pub non_unique: bool,
}

/// First point `S¹_{u_L}(s)` on `∂Π`, by Brent on `s ↦ η̃(S(s))` over `[0, s₀]`.
pub fn shock_curve_boundary_point(ctx: &ShockContext) -> Result<ShockPoint> {
    let curve = ctx.curve();
    let top = ctx.s0().min(curve.extent());
    let mut failure = None;
    let f = |s: f64| match curve.at(s) {
        Ok(p) => ctx.tilde_eta_slice(p.state.as_slice()),
        Err(e) => {
            failure = Some(e);
            f64::NAN
        }
    };
    let s = brent_root(f, 0.0, top, 2.0 * f64::EPSILON * top, 300).map_err(|e| failure.clone().unwrap_or(e))?;
    curve.at(s)
}

/// Boundary crossing along direction `d` from `u_L`, `None` when the ray is truncated or fails.
fn hit(ctx: &ShockContext, d: &State) -> Option<State> {
    let max_t = default_max_radius(ctx);
    match ray_crossing(ctx, ctx.u_left(), &(d / d.norm()), max_t) {
        Ok(h) if !h.truncated => Some(h.point),
        _ => None,
    }
}

fn scan_directions(n: usize) -> Vec<State> {
    match n {
        2 => (0..256)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 256.0;
                State::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        _ => {
            // Fibonacci lattice on the sphere.
            let m = 1200;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    State::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
    }
}

struct Candidate {
    point: State,
    value: f64,
}

/// Local chart of directions around `center`: `a ↦ normalize(center + Σ aᵢ eᵢ)`.
struct Chart {
    center: State,
    basis: Vec<State>,
}

impl Chart {
    fn new(center: &State) -> Self {
        let c = center / center.norm();
        Self { basis: orthonormal_complement(&c), center: c }
    }

    fn dir(&self, a: &[f64]) -> State {
        let mut d = self.center.clone();
        for (ai, e) in a.iter().zip(&self.basis) {
            d += e * *ai;
        }
        d
    }
}

fn tangential_defect(ctx: &ShockContext, p: &State, frame: &[State]) -> Option<Vec<f64>> {
    let nu = ctx.grad_tilde_eta(p.as_slice());
    let nu = nu.clone() / nu.norm();
    let basis = eigenstructure(ctx.system().as_ref(), p).ok()?;
    let l = &basis.left[0];
    let m = &nu - l * nu.dot(l);
    Some(frame.iter().map(|e| m.dot(e)).collect())
}

/// Newton on `ν − (ν·l¹) l¹ = 0` in the direction chart, from a Nelder-Mead estimate.
fn polish(ctx: &ShockContext, start: &Candidate) -> Candidate {
    let origin = ctx.u_left();
    let chart = Chart::new(&(&start.point - origin));
    let k = chart.basis.len();
    let frame = match eigenstructure(ctx.system().as_ref(), &start.point) {
        Ok(b) => orthonormal_complement(&b.left[0]),
        Err(_) => return Candidate { point: start.point.clone(), value: start.value },
    };
    let eval = |a: &[f64]| -> Option<(State, Vec<f64>)> {
        let p = hit(ctx, &chart.dir(a))?;
        let f = tangential_defect(ctx, &p, &frame)?;
        Some((p, f))
    };
    let mut a = vec![0.0; k];
    let Some((mut p, mut f)) = eval(&a) else {
        return Candidate { point: start.point.clone(), value: start.value };
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..30 {
        if norm(&f) < 1e-14 {
            break;
        }
        let h = 1e-7;
        let mut jac = nalgebra::DMatrix::<f64>::zeros(k, k);
        let mut ok = true;
        for j in 0..k {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[j] += h;
            am[j] -= h;
            match (eval(&ap), eval(&am)) {
                (Some((_, fp)), Some((_, fm))) => {
                    for i in 0..k {
                        jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            break;
        }
        let rhs = nalgebra::DVector::from_vec(f.clone());
        let Some(step) = jac.lu().solve(&rhs) else { break };
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-4 {
            let trial: Vec<f64> = a.iter().zip(step.iter()).map(|(x, d)| x - lambda * d).collect();
            if let Some((pt, ft)) = eval(&trial) {
                if norm(&ft) < norm(&f) {
                    a = trial;
                    p = pt;
                    f = ft;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let value = d_cont_slice(ctx, p.as_slice());
    if value >= start.value - 1e-10 * start.value.abs() {
        Candidate { point: p, value }
    } else {
        Candidate { point: start.point.clone(), value: start.value }
    }
}

fn boundary_maxima(ctx: &ShockContext) -> Result<(Vec<Candidate>, f64)> {
    let n = ctx.dim();
    if n == 1 {
        let mut out = Vec::new();
        for d in [1.0, -1.0] {
            if let Some(p) = hit(ctx, &State::from_element(1, d)) {
                let value = d_cont_slice(ctx, p.as_slice());
                out.push(Candidate { point: p, value });
            }
        }
        let diam = if out.len() == 2 { (&out[0].point - &out[1].point).norm() } else { f64::NAN };
        return Ok((out, diam));
    }

    let dirs = scan_directions(n);
    let mut coarse: Vec<(State, State, f64)> = Vec::new();
    for d in dirs {
        if let Some(p) = hit(ctx, &d) {
            let v = d_cont_slice(ctx, p.as_slice());
            coarse.push((d, p, v));
        }
    }
    if coarse.is_empty() {
        return Err(Error::NotFound("no boundary point of Π reachable from u_L".into()));
    }
    let mut diam: f64 = 0.0;
    for i in 0..coarse.len() {
        for j in i + 1..coarse.len() {
            diam = diam.max((&coarse[i].1 - &coarse[j].1).norm());
        }
    }
    coarse.sort_by(|a, b| b.2.total_cmp(&a.2));

    // Up to 8 starts, separated by at least 0.2 rad in direction.
    let mut starts: Vec<State> = Vec::new();
    for (d, _, _) in &coarse {
        if starts.len() == 8 {
            break;
        }
        if starts.iter().all(|s| s.dot(d).clamp(-1.0, 1.0).acos() > 0.2) {
            starts.push(d.clone());
        }
    }

    let mut out = Vec::new();
    for d in starts {
        let chart = Chart::new(&d);
        let objective = |a: &[f64]| match hit(ctx, &chart.dir(a)) {
            Some(p) => -d_cont_slice(ctx, p.as_slice()),
            None => f64::INFINITY,
        };
        let res = nelder_mead(
            objective,
            &vec![0.0; n - 1],
            NelderMeadOptions { initial_step: 0.05, xtol: 1e-12, ftol: 0.0, max_evals: 3000 },
        );
        if let Some(p) = hit(ctx, &chart.dir(&res.x)) {
            let value = d_cont_slice(ctx, p.as_slice());
            out.push(polish(ctx, &Candidate { point: p, value }));
        }
    }
    Ok((out, diam))
}

/// Maximizes `D_cont` over `Π`.
///
/// Interior critical points are excluded, so the search runs on `∂Π` in the
/// chart of ray directions from `u_L`: a coarse scan, Nelder-Mead from eight
/// separated starts, then a Newton polish of `ν ∥ l¹`.
pub fn find_dcont_max(ctx: &ShockContext) -> Result<UStar> {
    let (cands, diam) = boundary_maxima(ctx)?;
    let best = cands
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or_else(|| Error::NotFound("no boundary candidate for u*".into()))?;
    let tie = 1e-9 * best.value.abs().max(f64::MIN_POSITIVE);
    let spread = cands
        .iter()
        .filter(|c| c.value >= best.value - tie)
        .map(|c| (&c.point - &best.point).norm())
        .fold(0.0, f64::max);

    let u = &best.point;
    let nu = normal(ctx, u)?;
    let basis = eigenstructure(ctx.system().as_ref(), u)?;
    let l = &basis.left[0];
    let sin = (&nu - l * nu.dot(l)).norm();
    let normal_angle = sin.min(1.0).asin();
    let r1_dot_normal = basis.right[0].dot(&nu);

    let u0 = shock_curve_boundary_point(ctx)?;
    let d_cont_u0 = d_cont_slice(ctx, u0.state.as_slice());
    Ok(UStar {
        point: u.as_slice().to_vec(),
        d_cont: best.value,
        boundary_residual: ctx.tilde_eta_slice(u.as_slice()).abs(),
        normal_angle,
        r1_dot_normal,
        distance_to_u0: (u - &u0.state).norm(),
        u0: u0.state.as_slice().to_vec(),
        s_u0: u0.s,
        d_cont_u0,
        starts: cands.len(),
        spread,
        diameter_estimate: diam,
        non_unique: diam.is_finite() && spread > 1e-6 * diam,
    })
}
