//! Relative entropy `η(a|b)`, relative flux `q(a;b)`, the weighted pair
//! `(η̃, q̃)` attached to a shock, and the geometry of `Π = {η̃ < 0}`.

mod context;
mod pi;

use crate::error::Result;
use crate::numerics::gl16;
use crate::systems::{require_admissible, HyperbolicSystem, State};

pub use context::{Family, ShockContext};
pub(crate) use pi::default_max_radius;
pub use pi::{
    boundary_project, estimate_cstar, estimate_cstar_from, normal, pi_diagnostics, random_direction, ray_crossing,
    CstarEstimate, PiDiagnostics, PiSampler, ProjectionMode, RayHit,
};

/// Below this relative separation the integral forms are used; the direct
/// formulas lose all digits once `|a − b|²` falls under rounding of `η`.
const QUADRATURE_RADIUS: f64 = 0.25;

fn use_quadrature(a: &[f64], b: &[f64]) -> bool {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let b2: f64 = b.iter().map(|x| x * x).sum();
    d2.sqrt() <= QUADRATURE_RADIUS * (1.0 + b2.sqrt())
}

/// `(η(a|b), q(a;b))` without admissibility checks.
pub fn rel_pair_unchecked(sys: &dyn HyperbolicSystem, a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = sys.dim();
    let mut gb = vec![0.0; n];
    sys.entropy_grad_into(b, &mut gb);
    if !use_quadrature(a, b) {
        let eta = sys.entropy(a) - sys.entropy(b) - (0..n).map(|k| gb[k] * (a[k] - b[k])).sum::<f64>();
        let (mut fa, mut fb) = (vec![0.0; n], vec![0.0; n]);
        sys.flux_into(a, &mut fa);
        sys.flux_into(b, &mut fb);
        let q = sys.entropy_flux(a) - sys.entropy_flux(b) - (0..n).map(|k| gb[k] * (fa[k] - fb[k])).sum::<f64>();
        return (eta, q);
    }
    let (nodes, weights) = gl16();
    let delta: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut point = vec![0.0; n];
    let mut g = vec![0.0; n];
    let (mut eta, mut q) = (0.0, 0.0);
    for (t, w) in nodes.iter().zip(weights) {
        for k in 0..n {
            point[k] = b[k] + t * delta[k];
        }
        sys.entropy_grad_into(&point, &mut g);
        for k in 0..n {
            g[k] -= gb[k];
        }
        let jac = sys.jacobian(&point);
        let mut e = 0.0;
        let mut f = 0.0;
        for i in 0..n {
            e += g[i] * delta[i];
            let jd: f64 = (0..n).map(|k| jac[(i, k)] * delta[k]).sum();
            f += g[i] * jd;
        }
        eta += w * e;
        q += w * f;
    }
    (eta, q)
}

/// `η(a|b)` without admissibility checks.
pub fn rel_entropy_unchecked(sys: &dyn HyperbolicSystem, a: &[f64], b: &[f64]) -> f64 {
    let n = sys.dim();
    let mut gb = vec![0.0; n];
    sys.entropy_grad_into(b, &mut gb);
    if !use_quadrature(a, b) {
        return sys.entropy(a) - sys.entropy(b) - (0..n).map(|k| gb[k] * (a[k] - b[k])).sum::<f64>();
    }
    let (nodes, weights) = gl16();
    let mut point = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut eta = 0.0;
    for (t, w) in nodes.iter().zip(weights) {
        for k in 0..n {
            point[k] = b[k] + t * (a[k] - b[k]);
        }
        sys.entropy_grad_into(&point, &mut g);
        eta += w * (0..n).map(|k| (g[k] - gb[k]) * (a[k] - b[k])).sum::<f64>();
    }
    eta
}

/// `η(a) − η(b) − ∇η(b)·(a − b)`.
pub fn rel_entropy(sys: &dyn HyperbolicSystem, a: &State, b: &State) -> Result<f64> {
    require_admissible(sys, a)?;
    require_admissible(sys, b)?;
    Ok(rel_entropy_unchecked(sys, a.as_slice(), b.as_slice()))
}

/// `q(a) − q(b) − ∇η(b)·(f(a) − f(b))`.
pub fn rel_entropy_flux(sys: &dyn HyperbolicSystem, a: &State, b: &State) -> Result<f64> {
    require_admissible(sys, a)?;
    require_admissible(sys, b)?;
    Ok(rel_pair_unchecked(sys, a.as_slice(), b.as_slice()).1)
}

/// Direct-formula relative entropy and flux against one fixed reference state.
/// Cheap enough for per-cell use in the finite-volume monitor.
#[derive(Debug, Clone)]
pub struct RelativeTo {
    reference: Vec<f64>,
    eta: f64,
    q: f64,
    grad: Vec<f64>,
    flux: Vec<f64>,
}

impl RelativeTo {
    pub fn new(sys: &dyn HyperbolicSystem, b: &[f64]) -> Self {
        let n = sys.dim();
        let mut grad = vec![0.0; n];
        let mut flux = vec![0.0; n];
        sys.entropy_grad_into(b, &mut grad);
        sys.flux_into(b, &mut flux);
        Self { reference: b.to_vec(), eta: sys.entropy(b), q: sys.entropy_flux(b), grad, flux }
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn entropy(&self, sys: &dyn HyperbolicSystem, a: &[f64]) -> f64 {
        let lin: f64 = self.grad.iter().zip(a.iter().zip(&self.reference)).map(|(g, (x, y))| g * (x - y)).sum();
        (sys.entropy(a) - self.eta - lin).max(0.0)
    }

    /// Relative flux given `f(a)` already evaluated by the caller.
    pub fn flux_with(&self, sys: &dyn HyperbolicSystem, a: &[f64], fa: &[f64]) -> f64 {
        let lin: f64 = self.grad.iter().zip(fa.iter().zip(&self.flux)).map(|(g, (x, y))| g * (x - y)).sum();
        sys.entropy_flux(a) - self.q - lin
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Burgers, IsentropicEuler};

    #[test]
    fn quadrature_and_direct_forms_agree_at_the_switch() {
        let sys = IsentropicEuler::new(1.4);
        let b = [1.0, 0.3];
        for scale in [0.0199, 0.0201] {
            let a = [1.0 + scale, 0.3 + 0.5 * scale];
            let (e, q) = rel_pair_unchecked(&sys, &a, &b);
            let gb = sys.entropy_grad(&b);
            let direct_e = sys.entropy(&a) - sys.entropy(&b) - gb[0] * (a[0] - b[0]) - gb[1] * (a[1] - b[1]);
            let (fa, fb) = (sys.flux_vec(&a), sys.flux_vec(&b));
            let direct_q =
                sys.entropy_flux(&a) - sys.entropy_flux(&b) - gb[0] * (fa[0] - fb[0]) - gb[1] * (fa[1] - fb[1]);
            assert!((e - direct_e).abs() < 1e-13 * (1.0 + e.abs()));
            assert!((q - direct_q).abs() < 1e-13 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn burgers_relative_quantities_are_exact_polynomials() {
        let sys = Burgers::default();
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.3, 0.295), (-0.7, 0.2)] {
            let (e, q) = rel_pair_unchecked(&sys, &[a], &[b]);
            let q_exact = 2.0 / 3.0 * a * a * a + b * b * b / 3.0 - a * a * b;
            assert!((e - (a - b) * (a - b)).abs() < 1e-15);
            assert!((q - q_exact).abs() < 1e-15);
        }
    }
}
