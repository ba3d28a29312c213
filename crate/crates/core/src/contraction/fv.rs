use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relent::{random_direction, ShockContext};
use crate::systems::{HyperbolicSystem, State};

/// Cell averages on a uniform grid, stored row-major (`cells × dim`).
#[derive(Debug, Clone)]
pub struct FVField {
    x_min: f64,
    dx: f64,
    cells: usize,
    dim: usize,
    data: Vec<f64>,
    time: f64,
}

impl FVField {
    pub fn new(x_min: f64, x_max: f64, cells: usize, dim: usize) -> Result<Self> {
        if !(x_max > x_min) || cells < 4 || dim == 0 {
            return Err(Error::Config(format!("bad grid [{x_min}, {x_max}] with {cells} cells")));
        }
        Ok(Self { x_min, dx: (x_max - x_min) / cells as f64, cells, dim, data: vec![0.0; cells * dim], time: 0.0 })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.dx * self.cells as f64
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn state(&self, j: usize) -> State {
        State::from_column_slice(self.cell(j))
    }

    /// Index of the cell containing `x`, clamped to the grid.
    pub fn locate(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.dx).floor();
        if k < 0.0 {
            0
        } else {
            (k as usize).min(self.cells - 1)
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `∑ η(u_j) Δx`.
    pub fn total_entropy(&self, sys: &dyn HyperbolicSystem) -> f64 {
        (0..self.cells).map(|j| sys.entropy(self.cell(j))).sum::<f64>() * self.dx
    }

    /// Fills every cell with `u`.
    pub fn fill(&mut self, u: &[f64]) {
        for j in 0..self.cells {
            self.cell_mut(j).copy_from_slice(u);
        }
    }

    pub fn validate(&self, sys: &dyn HyperbolicSystem) -> Result<()> {
        for j in 0..self.cells {
            let u = self.cell(j);
            if u.iter().any(|x| !x.is_finite()) || !sys.in_working_box(u) {
                return Err(Error::BlowUp {
                    time: self.time,
                    reason: format!("cell {j} at x = {:.6} left the working box: {u:?}", self.center(j)),
                });
            }
        }
        Ok(())
    }
}

/// Entropy bookkeeping of one step.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StepEntropy {
    /// Largest cell residual `η(uⁿ⁺¹) − η(uⁿ) + Δt/Δx (Q₊ − Q₋)`.
    pub max_cell_residual: f64,
    /// Cells whose residual exceeded the tolerance.
    pub flagged_cells: usize,
    /// `Δ ∑ η Δx + Δt (Q_right − Q_left)` over the whole grid.
    pub total_residual: f64,
}

/// Local Lax-Friedrichs (Rusanov) solver with outflow boundaries.
#[derive(Debug, Clone)]
pub struct Rusanov {
    dim: usize,
    flux: Vec<f64>,
    speed: Vec<f64>,
    eta: Vec<f64>,
    q: Vec<f64>,
    num_flux: Vec<f64>,
    num_q: Vec<f64>,
    next: Vec<f64>,
}

impl Rusanov {
    pub fn new(field: &FVField) -> Self {
        let (m, n) = (field.cells(), field.dim());
        Self {
            dim: n,
            flux: vec![0.0; m * n],
            speed: vec![0.0; m],
            eta: vec![0.0; m],
            q: vec![0.0; m],
            num_flux: vec![0.0; (m + 1) * n],
            num_q: vec![0.0; m + 1],
            next: vec![0.0; m * n],
        }
    }

    /// Evaluates fluxes and speeds of `field`; returns `max |λ|`.
    pub fn prepare(&mut self, sys: &dyn HyperbolicSystem, field: &FVField) -> f64 {
        let n = self.dim;
        let mut top: f64 = 0.0;
        for j in 0..field.cells() {
            let u = field.cell(j);
            sys.flux_into(u, &mut self.flux[j * n..(j + 1) * n]);
            let a = sys.max_speed(u);
            self.speed[j] = a;
            top = top.max(a);
            self.eta[j] = sys.entropy(u);
            self.q[j] = sys.entropy_flux(u);
        }
        top
    }

    /// One forward-Euler step of size `dt` after [`Rusanov::prepare`].
    pub fn advance(
        &mut self,
        sys: &dyn HyperbolicSystem,
        field: &mut FVField,
        dt: f64,
        tol_entropy: f64,
    ) -> Result<StepEntropy> {
        let n = self.dim;
        let m = field.cells();
        let u = field.as_slice();
        // Interface k sits between cells k-1 and k; ghost cells copy the boundary cells.
        for k in 0..=m {
            let l = k.saturating_sub(1);
            let r = k.min(m - 1);
            let a = self.speed[l].max(self.speed[r]);
            for i in 0..n {
                self.num_flux[k * n + i] =
                    0.5 * (self.flux[l * n + i] + self.flux[r * n + i]) - 0.5 * a * (u[r * n + i] - u[l * n + i]);
            }
            self.num_q[k] = 0.5 * (self.q[l] + self.q[r]) - 0.5 * a * (self.eta[r] - self.eta[l]);
        }
        let ratio = dt / field.dx();
        for j in 0..m {
            for i in 0..n {
                self.next[j * n + i] =
                    u[j * n + i] - ratio * (self.num_flux[(j + 1) * n + i] - self.num_flux[j * n + i]);
            }
        }
        let mut stats = StepEntropy::default();
        let mut total_delta = 0.0;
        for j in 0..m {
            let cell = &self.next[j * n..(j + 1) * n];
            if cell.iter().any(|x| !x.is_finite()) || !sys.in_working_box(cell) {
                return Err(Error::BlowUp {
                    time: field.time() + dt,
                    reason: format!("cell {j} at x = {:.6} left the working box: {cell:?}", field.center(j)),
                });
            }
            let eta_new = sys.entropy(cell);
            let residual = eta_new - self.eta[j] + ratio * (self.num_q[j + 1] - self.num_q[j]);
            let scale = tol_entropy * (1.0 + self.eta[j].abs());
            if residual > scale {
                stats.flagged_cells += 1;
            }
            stats.max_cell_residual = stats.max_cell_residual.max(residual);
            total_delta += eta_new - self.eta[j];
        }
        stats.total_residual = total_delta * field.dx() + dt * (self.num_q[m] - self.num_q[0]);
        field.data.copy_from_slice(&self.next);
        field.time += dt;
        Ok(stats)
    }
}

/// One Rusanov step with a freshly prepared solver.
pub fn fv_step(
    sys: &dyn HyperbolicSystem,
    field: &mut FVField,
    cfl: f64,
    tol_entropy: f64,
) -> Result<(f64, StepEntropy)> {
    let mut solver = Rusanov::new(field);
    let top = solver.prepare(sys, field);
    let dt = if top > 0.0 { cfl * field.dx() / top } else { cfl * field.dx() };
    let stats = solver.advance(sys, field, dt, tol_entropy)?;
    Ok((dt, stats))
}

/// Grid of a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { x_min: 0.0, x_max: 1.0, cells: 2000 }
    }
}

/// Initial data, all positions in the reduced (1-shock) frame.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// Constant state; `u_L` when omitted.
    Constant {
        state: Option<Vec<f64>>,
    },
    /// The shock `(u_L, u_R)` at `x0`, optionally relaxed into the scheme's discrete profile.
    ExactShock {
        x0: f64,
        #[serde(default)]
        relax_steps: usize,
    },
    /// The shock plus `amplitude · s₀ · φ(x) e` with a `cos²` bump `φ` of half-width
    /// `width` normalized to unit `L²` norm. `e` is `direction` or a seeded random unit vector.
    PerturbedShock {
        x0: f64,
        amplitude: f64,
        #[serde(default)]
        center: Option<f64>,
        #[serde(default = "default_bump_width")]
        width: f64,
        #[serde(default)]
        direction: Option<Vec<f64>>,
        /// Scheme steps applied to the unperturbed shock before the bump is added.
        #[serde(default)]
        relax_steps: usize,
    },
    Riemann {
        left: Vec<f64>,
        right: Vec<f64>,
        x0: f64,
    },
}

fn default_bump_width() -> f64 {
    0.05
}

/// Fraction of cell `j` lying left of `x0`.
fn left_fraction(field: &FVField, j: usize, x0: f64) -> f64 {
    let a = field.x_min() + j as f64 * field.dx();
    ((x0 - a) / field.dx()).clamp(0.0, 1.0)
}

fn step_profile(field: &mut FVField, left: &[f64], right: &[f64], x0: f64) {
    for j in 0..field.cells() {
        let w = left_fraction(field, j, x0);
        let cell = field.cell_mut(j);
        for i in 0..cell.len() {
            cell[i] = w * left[i] + (1.0 - w) * right[i];
        }
    }
}

/// `cos²(π (x − c) / (2 w))` on `|x − c| < w`, averaged over each cell by 16-point Gauss-Legendre.
fn bump_averages(field: &FVField, c: f64, w: f64) -> Vec<f64> {
    let (nodes, weights) = crate::numerics::gl16();
    (0..field.cells())
        .map(|j| {
            let a = field.x_min() + j as f64 * field.dx();
            nodes
                .iter()
                .zip(weights)
                .map(|(t, wt)| {
                    let x = a + t * field.dx();
                    let z = (x - c) / w;
                    if z.abs() < 1.0 {
                        wt * (0.5 * std::f64::consts::PI * z).cos().powi(2)
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect()
}

/// Initial field and the matching shift position.
#[derive(Debug, Clone)]
pub struct InitialField {
    pub field: FVField,
    /// Shock location: `x0` moved by `σ t` during relaxation.
    pub h0: f64,
}

/// Evolves `field` by `steps` Rusanov steps, then resets its clock; returns the elapsed time.
fn relax(sys: &dyn HyperbolicSystem, field: &mut FVField, steps: usize) -> Result<f64> {
    if steps == 0 {
        return Ok(0.0);
    }
    let mut solver = Rusanov::new(field);
    let mut elapsed = 0.0;
    for _ in 0..steps {
        let top = solver.prepare(sys, field);
        let dt = 0.45 * field.dx() / top.max(f64::MIN_POSITIVE);
        solver.advance(sys, field, dt, f64::INFINITY)?;
        elapsed += dt;
    }
    field.time = 0.0;
    Ok(elapsed)
}

/// Builds initial data on `grid` for the reduced system of `ctx`.
pub fn make_ic(kind: &InitialData, ctx: &ShockContext, grid: &Grid, seed: u64) -> Result<InitialField> {
    let sys = ctx.system().as_ref();
    let n = ctx.dim();
    let mut field = FVField::new(grid.x_min, grid.x_max, grid.cells, n)?;
    let inside = |x: f64| x > grid.x_min && x < grid.x_max;
    let mut h0 = 0.5 * (grid.x_min + grid.x_max);
    match kind {
        InitialData::Constant { state } => {
            let u = state.clone().unwrap_or_else(|| ctx.u_left().as_slice().to_vec());
            if u.len() != n {
                return Err(Error::Config(format!("constant state has {} components, expected {n}", u.len())));
            }
            field.fill(&u);
        }
        InitialData::ExactShock { x0, relax_steps } => {
            if !inside(*x0) {
                return Err(Error::Config(format!("shock position {x0} outside the grid")));
            }
            step_profile(&mut field, ctx.u_left().as_slice(), ctx.u_right().as_slice(), *x0);
            h0 = x0 + ctx.speed() * relax(sys, &mut field, *relax_steps)?;
        }
        InitialData::PerturbedShock { x0, amplitude, center, width, direction, relax_steps } => {
            if !inside(*x0) || !(*width > 0.0) || !amplitude.is_finite() {
                return Err(Error::Config("perturbed shock needs x0 inside the grid, width > 0".into()));
            }
            step_profile(&mut field, ctx.u_left().as_slice(), ctx.u_right().as_slice(), *x0);
            h0 = x0 + ctx.speed() * relax(sys, &mut field, *relax_steps)?;
            let e = match direction {
                Some(d) if d.len() == n => {
                    let v = State::from_column_slice(d);
                    let norm = v.norm();
                    if !(norm > 0.0) {
                        return Err(Error::Config("perturbation direction must be nonzero".into()));
                    }
                    v / norm
                }
                Some(d) => return Err(Error::Config(format!("direction has {} components, expected {n}", d.len()))),
                None => random_direction(n, &mut ChaCha8Rng::seed_from_u64(seed)),
            };
            let phi = bump_averages(&field, center.unwrap_or(*x0), *width);
            let l2 = (phi.iter().map(|p| p * p).sum::<f64>() * field.dx()).sqrt();
            if !(l2 > 0.0) {
                return Err(Error::Config("perturbation bump does not meet the grid".into()));
            }
            let scale = amplitude * ctx.s0() / l2;
            for (j, p) in phi.iter().enumerate() {
                let cell = field.cell_mut(j);
                for i in 0..n {
                    cell[i] += scale * p * e[i];
                }
            }
        }
        InitialData::Riemann { left, right, x0 } => {
            if left.len() != n || right.len() != n || !inside(*x0) {
                return Err(Error::Config("Riemann data must match the system dimension and grid".into()));
            }
            step_profile(&mut field, left, right, *x0);
            h0 = *x0;
        }
    }
    field.validate(sys)?;
    Ok(InitialField { field, h0 })
}

/// `‖u − v‖_{L²}` between two fields on the same grid.
pub fn l2_distance(a: &FVField, b: &FVField) -> f64 {
    let s: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    (s * a.dx()).sqrt()
}
