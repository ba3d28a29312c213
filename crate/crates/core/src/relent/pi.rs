use rand::Rng;
use serde::Serialize;

use super::ShockContext;
use crate::error::{Error, Result};
use crate::numerics::{bisect, brent_root};
use crate::systems::{sample_state, State};

/// Result of casting a ray against `∂Π`.
#[derive(Debug, Clone)]
pub struct RayHit {
    pub t: f64,
    pub point: State,
    /// The ray reached the search radius without crossing `∂Π` (unbounded `Π`).
    pub truncated: bool,
}

/// Uniformly distributed unit vector.
pub fn random_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> State {
    loop {
        let v = State::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..=1.0)));
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            return v / r;
        }
    }
}

/// Search radius for rays: a generous multiple of the expected diameter `~1/C`.
pub(crate) fn default_max_radius(ctx: &ShockContext) -> f64 {
    if ctx.excess() > 0.0 && ctx.c() > 0.0 {
        20.0 / ctx.c()
    } else {
        20.0 * ctx.s0()
    }
}

/// Root of `η̃` along `origin + t·dir` on `[a, b]`, polished to the boundary tolerance.
fn refine_root(ctx: &ShockContext, origin: &State, dir: &State, a: f64, b: f64) -> Result<(f64, State)> {
    let point = |t: f64| origin + dir * t;
    let f = |t: f64| ctx.tilde_eta_slice(point(t).as_slice());
    let mut t = brent_root(f, a, b, 4.0 * f64::EPSILON * b.abs().max(a.abs()), 200)?;
    for _ in 0..2 {
        let p = point(t);
        let slope = ctx.grad_tilde_eta(p.as_slice()).dot(dir);
        let val = ctx.tilde_eta_slice(p.as_slice());
        if slope == 0.0 || val == 0.0 {
            break;
        }
        let next = t - val / slope;
        if next < a.min(b) || next > a.max(b) {
            break;
        }
        if ctx.tilde_eta_slice(point(next).as_slice()).abs() <= val.abs() {
            t = next;
        }
    }
    if ctx.tilde_eta_slice(point(t).as_slice()).abs() > ctx.tol_boundary() {
        t = bisect(f, a, b, 400);
    }
    let p = point(t);
    let residual = ctx.tilde_eta_slice(p.as_slice()).abs();
    if residual > ctx.tol_boundary() {
        return Err(Error::NotFound(format!(
            "boundary residual {residual:.3e} above tolerance {:.3e}",
            ctx.tol_boundary()
        )));
    }
    Ok((t, p))
}

/// First sign change of `η̃` along `origin + t·dir`, `t ∈ (0, max_t]`.
///
/// Returns a truncated hit at `max_t` when the ray stays on one side but inside
/// the working box, and not-found when it leaves the box first.
pub fn ray_crossing(ctx: &ShockContext, origin: &State, dir: &State, max_t: f64) -> Result<RayHit> {
    let sys = ctx.system();
    let f0 = ctx.tilde_eta_slice(origin.as_slice());
    if f0 == 0.0 {
        return Ok(RayHit { t: 0.0, point: origin.clone(), truncated: false });
    }
    let mut prev = 0.0;
    let mut t = ctx.length_scale() / 8.0;
    loop {
        let capped = t >= max_t;
        if capped {
            t = max_t;
        }
        let p = origin + dir * t;
        if !sys.in_working_box(p.as_slice()) {
            return Err(Error::NotFound(format!("ray left the working box at t = {t:.4e}")));
        }
        let ft = ctx.tilde_eta_slice(p.as_slice());
        if ft == 0.0 || ft.signum() != f0.signum() {
            let (t_root, point) = refine_root(ctx, origin, dir, prev, t)?;
            return Ok(RayHit { t: t_root, point, truncated: false });
        }
        if capped {
            return Ok(RayHit { t, point: p, truncated: true });
        }
        prev = t;
        t *= 2.0;
    }
}

/// How [`boundary_project`] chooses the boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProjectionMode {
    /// First crossing along the given ray.
    Ray,
    /// Iterate the ray direction until `u_in − ū ∥ ν(ū)`.
    Nearest,
}

/// Project `u_in` onto `∂Π` along `direction`.
pub fn boundary_project(ctx: &ShockContext, u_in: &State, direction: &State, mode: ProjectionMode) -> Result<State> {
    if !ctx.system().is_admissible(u_in.as_slice()) {
        return Err(Error::Domain(format!("state {:?} not admissible", u_in.as_slice())));
    }
    let val = ctx.tilde_eta_slice(u_in.as_slice());
    if val.abs() < ctx.tol_boundary() {
        return Ok(u_in.clone());
    }
    let norm = direction.norm();
    if !(norm > 0.0) {
        return Err(Error::Precondition("projection direction must be nonzero".into()));
    }
    let max_t = default_max_radius(ctx);
    let mut hit = ray_crossing(ctx, u_in, &(direction / norm), max_t)?;
    if hit.truncated {
        return Err(Error::NotFound("no sign change of η̃ along the ray".into()));
    }
    if mode == ProjectionMode::Ray {
        return Ok(hit.point);
    }
    let inside = val < 0.0;
    for _ in 0..200 {
        let nu = normal(ctx, &hit.point)?;
        let offset = &hit.point - u_in;
        let dist = offset.norm();
        let cos = offset.dot(&nu) / dist;
        if (1.0 - cos.abs()).max(0.0).sqrt() < 1e-10 * 0.5f64.sqrt() || dist == 0.0 {
            return Ok(hit.point);
        }
        let dir = if inside { nu } else { -nu };
        hit = ray_crossing(ctx, u_in, &dir, max_t)?;
        if hit.truncated {
            return Err(Error::NotFound("nearest-point iteration lost the boundary".into()));
        }
    }
    Err(Error::NotFound("nearest-point iteration did not converge".into()))
}

/// Outward unit normal `∇η̃/|∇η̃|` at a boundary point.
pub fn normal(ctx: &ShockContext, ub: &State) -> Result<State> {
    let val = ctx.tilde_eta_slice(ub.as_slice());
    if val.abs() > 1e3 * ctx.tol_boundary() {
        return Err(Error::Precondition(format!("|η̃| = {val:.3e} is not on the boundary")));
    }
    let g = ctx.grad_tilde_eta(ub.as_slice());
    let gn = g.norm();
    if !(gn > 0.0) {
        return Err(Error::Degeneracy("vanishing gradient of η̃".into()));
    }
    Ok(g / gn)
}

/// Ray caster and rejection sampler for `Π`.
#[derive(Debug, Clone)]
pub struct PiSampler<'a> {
    ctx: &'a ShockContext,
    lo: State,
    hi: State,
    max_radius: f64,
    truncated: bool,
    boundary: Vec<State>,
}

impl<'a> PiSampler<'a> {
    /// Builds a bounding box from `n_rays` boundary hits (plus the axis directions).
    pub fn new<R: Rng + ?Sized>(ctx: &'a ShockContext, n_rays: usize, rng: &mut R) -> Result<Self> {
        Self::with_radius(ctx, n_rays, default_max_radius(ctx), rng)
    }

    pub fn with_radius<R: Rng + ?Sized>(
        ctx: &'a ShockContext,
        n_rays: usize,
        max_radius: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let n = ctx.dim();
        let mut sampler = Self {
            ctx,
            lo: ctx.u_left().clone(),
            hi: ctx.u_left().clone(),
            max_radius,
            truncated: false,
            boundary: Vec::new(),
        };
        let mut dirs = Vec::new();
        for k in 0..n {
            let mut e = State::zeros(n);
            e[k] = 1.0;
            dirs.push(e.clone());
            dirs.push(-e);
        }
        if n > 1 {
            dirs.extend((0..n_rays).map(|_| random_direction(n, rng)));
        }
        for d in dirs {
            let hit = sampler.cast(&d)?;
            sampler.truncated |= hit.truncated;
            for k in 0..n {
                sampler.lo[k] = sampler.lo[k].min(hit.point[k]);
                sampler.hi[k] = sampler.hi[k].max(hit.point[k]);
            }
            sampler.boundary.push(hit.point);
        }
        for k in 0..n {
            let pad = 0.1 * (sampler.hi[k] - sampler.lo[k]);
            sampler.lo[k] -= pad;
            sampler.hi[k] += pad;
        }
        Ok(sampler)
    }

    pub fn context(&self) -> &ShockContext {
        self.ctx
    }

    /// Whether some ray hit the search radius before `∂Π`.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub fn bounding_box(&self) -> (&State, &State) {
        (&self.lo, &self.hi)
    }

    /// Boundary points found while building the box.
    pub fn seed_boundary(&self) -> &[State] {
        &self.boundary
    }

    /// Boundary hit along `dir` from `u_L`.
    pub fn cast(&self, dir: &State) -> Result<RayHit> {
        ray_crossing(self.ctx, self.ctx.u_left(), &(dir / dir.norm()), self.max_radius)
    }

    pub fn random_boundary<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RayHit> {
        let n = self.ctx.dim();
        if n == 1 {
            let d = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            return self.cast(&State::from_element(1, d));
        }
        self.cast(&random_direction(n, rng))
    }

    /// Rejection sample from `Π` (restricted to the search ball when `Π` is unbounded).
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<State> {
        let n = self.ctx.dim();
        let sys = self.ctx.system();
        for _ in 0..100_000 {
            let u = State::from_iterator(n, (0..n).map(|k| rng.gen_range(self.lo[k]..=self.hi[k])));
            if self.truncated && (&u - self.ctx.u_left()).norm() > self.max_radius {
                continue;
            }
            if sys.in_working_box(u.as_slice()) && self.ctx.tilde_eta_slice(u.as_slice()) < 0.0 {
                return Ok(u);
            }
        }
        Err(Error::NotFound("rejection sampling of Π failed".into()))
    }

    /// `min` over ray directions of the distance from `u ∈ Π` to `∂Π`.
    pub fn boundary_distance<R: Rng + ?Sized>(&self, u: &State, n_dirs: usize, rng: &mut R) -> Result<f64> {
        let n = self.ctx.dim();
        let dirs: Vec<State> = if n == 1 {
            vec![State::from_element(1, 1.0), State::from_element(1, -1.0)]
        } else {
            (0..n_dirs).map(|_| random_direction(n, rng)).collect()
        };
        let mut best = f64::INFINITY;
        for d in dirs {
            let hit = ray_crossing(self.ctx, u, &d, self.max_radius)?;
            if !hit.truncated {
                best = best.min(hit.t);
            }
        }
        Ok(best)
    }
}

/// Geometry of `Π` measured by sampling.
#[derive(Debug, Clone, Serialize)]
pub struct PiDiagnostics {
    pub diameter: f64,
    pub min_grad_norm: f64,
    pub min_grad_over_s0: f64,
    pub max_depth_ratio: f64,
    pub normal_ratio_min: f64,
    pub normal_ratio_max: f64,
    pub cstar: f64,
    pub cstar_empty: bool,
    pub boundary_samples: usize,
    pub truncated: bool,
}

pub fn pi_diagnostics<R: Rng + ?Sized>(ctx: &ShockContext, n_samples: usize, rng: &mut R) -> Result<PiDiagnostics> {
    let n = ctx.dim();
    let sampler = PiSampler::new(ctx, n_samples.min(64), rng)?;
    let mut boundary: Vec<State> = sampler.seed_boundary().to_vec();
    if n > 1 {
        for _ in 0..n_samples {
            boundary.push(sampler.random_boundary(rng)?.point);
        }
    }
    boundary.retain(|p| ctx.tilde_eta_slice(p.as_slice()).abs() <= ctx.tol_boundary());

    let mut diameter: f64 = 0.0;
    for i in 0..boundary.len() {
        for j in i + 1..boundary.len() {
            diameter = diameter.max((&boundary[i] - &boundary[j]).norm());
        }
    }
    let grads: Vec<State> = boundary.iter().map(|p| ctx.grad_tilde_eta(p.as_slice())).collect();
    let min_grad_norm = grads.iter().map(|g| g.norm()).fold(f64::INFINITY, f64::min);
    let normals: Vec<State> = grads.iter().map(|g| g / g.norm()).collect();

    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0_f64);
    let scale = if ctx.c() > 0.0 { ctx.c() } else { 1.0 };
    let m = boundary.len();
    // An unbounded Π may leave fewer than two boundary points.
    let pairs = if m < 2 {
        0
    } else if n == 1 {
        1
    } else {
        n_samples.max(1)
    };
    for _ in 0..pairs {
        let (i, j) = if n == 1 { (0, 1) } else { (rng.gen_range(0..m), rng.gen_range(0..m)) };
        let dist = (&boundary[i] - &boundary[j]).norm();
        if i == j || dist < 1e-6 * diameter {
            continue;
        }
        let ratio = (&normals[i] - &normals[j]).norm() / (scale * dist);
        rmin = rmin.min(ratio);
        rmax = rmax.max(ratio);
    }

    let n_depth = (n_samples / 5).clamp(1, 200);
    let dirs = match n {
        1 => 2,
        2 => 64,
        _ => 256,
    };
    let mut max_depth_ratio: f64 = 0.0;
    for _ in 0..n_depth {
        let u = sampler.sample_interior(rng)?;
        let d = sampler.boundary_distance(&u, dirs, rng)?;
        if d.is_finite() && d > 0.0 {
            max_depth_ratio = max_depth_ratio.max(-ctx.tilde_eta_slice(u.as_slice()) / (ctx.s0() * d));
        }
    }
    let cstar = estimate_cstar(ctx, n_samples, rng);
    Ok(PiDiagnostics {
        diameter,
        min_grad_norm,
        min_grad_over_s0: min_grad_norm / ctx.s0(),
        max_depth_ratio,
        normal_ratio_min: rmin,
        normal_ratio_max: rmax,
        cstar: cstar.value,
        cstar_empty: cstar.empty,
        boundary_samples: boundary.len(),
        truncated: sampler.truncated(),
    })
}

/// Sampled stand-in for the constant bounding `|q̃|/η̃` outside `Π` where `q̃ ≤ 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CstarEstimate {
    /// Twice the sampled maximum.
    pub value: f64,
    pub raw_max: f64,
    pub contributing: usize,
    pub empty: bool,
}

pub fn estimate_cstar_from<'s>(ctx: &ShockContext, samples: impl IntoIterator<Item = &'s State>) -> CstarEstimate {
    let mut raw_max: f64 = 0.0;
    let mut contributing = 0;
    for u in samples {
        if !ctx.system().is_admissible(u.as_slice()) {
            continue;
        }
        let (e, q) = ctx.tilde_pair_slice(u.as_slice());
        if e > 0.0 && q <= 0.0 {
            contributing += 1;
            raw_max = raw_max.max(-q / e);
        }
    }
    CstarEstimate { value: 2.0 * raw_max, raw_max, contributing, empty: contributing == 0 }
}

/// Draws `n_samples` over the working box and as many in a shell around `Π`.
pub fn estimate_cstar<R: Rng + ?Sized>(ctx: &ShockContext, n_samples: usize, rng: &mut R) -> CstarEstimate {
    let sys = ctx.system();
    let n = ctx.dim();
    let mut samples: Vec<State> = (0..n_samples).map(|_| sample_state(sys.as_ref(), sys.working_box(), rng)).collect();
    let reach = if ctx.c() > 0.0 { 6.0 / ctx.c() } else { 20.0 * ctx.s0() };
    let center = (ctx.u_left() + ctx.u_right()) * 0.5;
    for _ in 0..n_samples {
        let u = &center + random_direction(n, rng) * (reach * rng.gen::<f64>());
        if sys.in_working_box(u.as_slice()) {
            samples.push(u);
        }
    }
    estimate_cstar_from(ctx, samples.iter())
}
