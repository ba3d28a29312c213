//! Hyperbolic systems `u_t + f(u)_x = 0` with a convex entropy pair.
//!
//! Trait methods are unchecked kernels working on slices; the free functions
//! of this module validate admissibility and return owned vectors.

mod audit;
mod builtin;
mod eigen;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use audit::{verify_assumptions, AssumptionCheck, AssumptionReport, AuditThresholds};
pub use builtin::{Burgers, FullEuler, IsentropicEuler, LinearSystem, Mirrored};
pub use eigen::{eigenstructure, EigenBasis};

pub type State = DVector<f64>;
pub type Matrix = DMatrix<f64>;
pub type SystemRef = Arc<dyn HyperbolicSystem>;

/// Axis-aligned box in primitive coordinates (see [`HyperbolicSystem::to_primitive`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl WorkingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box bounds must have equal length");
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| *x >= *a && *x <= *b)
    }

    /// Box shrunk toward its center by `frac` of each side on both ends.
    pub fn shrink(&self, frac: f64) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| {
                let d = (b - a) * frac;
                (a + d, b - d)
            })
            .unzip();
        Self { lo, hi }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| rng.gen_range(*a..=*b)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_empty() || self.lo.len() != self.hi.len() {
            return Err(Error::Config("working box bounds must be nonempty and of equal length".into()));
        }
        if self.lo.iter().zip(&self.hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::Config("working box requires finite bounds with lo < hi".into()));
        }
        Ok(())
    }
}

/// A system of conservation laws together with a strictly convex entropy.
///
/// Implementors supply the flux and the entropy pair; every derivative has a
/// finite-difference fallback so only the required methods are mandatory.
pub trait HyperbolicSystem: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }
    fn is_admissible(&self, u: &[f64]) -> bool;
    fn working_box(&self) -> &WorkingBox;
    fn to_primitive(&self, u: &[f64]) -> Vec<f64> {
        u.to_vec()
    }
    #[allow(clippy::wrong_self_convention)]
    fn from_primitive(&self, w: &[f64]) -> Vec<f64> {
        w.to_vec()
    }

    fn flux_into(&self, u: &[f64], out: &mut [f64]);
    fn entropy(&self, u: &[f64]) -> f64;
    fn entropy_flux(&self, u: &[f64]) -> f64;

    fn entropy_grad_into(&self, u: &[f64], out: &mut [f64]) {
        let g = fd_gradient(|v| self.entropy(v), u);
        out.copy_from_slice(g.as_slice());
    }
    fn jacobian(&self, u: &[f64]) -> Matrix {
        fd_jacobian_of(|v, out| self.flux_into(v, out), u)
    }
    fn entropy_hessian(&self, u: &[f64]) -> Matrix {
        let n = self.dim();
        fd_jacobian_of(
            |v, out| {
                let mut g = vec![0.0; n];
                self.entropy_grad_into(v, &mut g);
                out.copy_from_slice(&g);
            },
            u,
        )
    }
    /// Eigenvalues of the flux Jacobian in ascending order.
    fn eigenvalues(&self, u: &[f64]) -> Vec<f64> {
        numeric_eigenvalues(&self.jacobian(u))
    }
    fn lambda_first(&self, u: &[f64]) -> f64 {
        self.eigenvalues(u)[0]
    }
    fn lambda_last(&self, u: &[f64]) -> f64 {
        *self.eigenvalues(u).last().expect("dimension is at least one")
    }
    fn max_speed(&self, u: &[f64]) -> f64 {
        self.lambda_first(u).abs().max(self.lambda_last(u).abs())
    }
    /// The wrapped system when `self` is a mirror; used to keep mirroring an involution.
    fn unmirrored(&self) -> Option<SystemRef> {
        None
    }

    fn flux_vec(&self, u: &[f64]) -> State {
        let mut out = State::zeros(self.dim());
        self.flux_into(u, out.as_mut_slice());
        out
    }
    fn entropy_grad(&self, u: &[f64]) -> State {
        let mut out = State::zeros(self.dim());
        self.entropy_grad_into(u, out.as_mut_slice());
        out
    }
    fn in_working_box(&self, u: &[f64]) -> bool {
        self.is_admissible(u) && self.working_box().contains(&self.to_primitive(u))
    }
}

/// Finite-difference step of the design: `1e-6 (1 + |u_k|)` per component.
pub fn fd_step(x: f64) -> f64 {
    1e-6 * (1.0 + x.abs())
}

pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, u: &[f64]) -> State {
    let mut v = u.to_vec();
    State::from_iterator(
        u.len(),
        (0..u.len()).map(|k| {
            let h = fd_step(u[k]);
            v[k] = u[k] + h;
            let fp = f(&v);
            v[k] = u[k] - h;
            let fm = f(&v);
            v[k] = u[k];
            (fp - fm) / (2.0 * h)
        }),
    )
}

/// Fourth-order central differences with step `1e-6 (1 + |u_k|)`.
pub fn fd_gradient4<F: Fn(&[f64]) -> f64>(f: F, u: &[f64]) -> State {
    let mut v = u.to_vec();
    let mut at = |k: usize, x: f64| {
        v[k] = x;
        let y = f(&v);
        v[k] = u[k];
        y
    };
    State::from_iterator(
        u.len(),
        (0..u.len()).map(|k| {
            let h = 1e-6 * (1.0 + u[k].abs());
            let near = at(k, u[k] + h) - at(k, u[k] - h);
            let far = at(k, u[k] + 2.0 * h) - at(k, u[k] - 2.0 * h);
            (8.0 * near - far) / (12.0 * h)
        }),
    )
}

pub fn fd_jacobian_of<F: Fn(&[f64], &mut [f64])>(f: F, u: &[f64]) -> Matrix {
    let n = u.len();
    let mut jac = Matrix::zeros(n, n);
    let mut v = u.to_vec();
    let (mut fp, mut fm) = (vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let h = fd_step(u[k]);
        v[k] = u[k] + h;
        f(&v, &mut fp);
        v[k] = u[k] - h;
        f(&v, &mut fm);
        v[k] = u[k];
        for i in 0..n {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Central-difference flux Jacobian, independent of any analytic override.
pub fn fd_jacobian(sys: &dyn HyperbolicSystem, u: &State) -> Matrix {
    fd_jacobian_of(|v, out| sys.flux_into(v, out), u.as_slice())
}

/// Real parts of the Jacobian spectrum, ascending. Complex pairs yield NaN.
pub fn numeric_eigenvalues(jac: &Matrix) -> Vec<f64> {
    let scale = jac.amax().max(1e-300);
    let mut vals: Vec<f64> =
        jac.complex_eigenvalues().iter().map(|z| if z.im.abs() > 1e-10 * scale { f64::NAN } else { z.re }).collect();
    vals.sort_by(f64::total_cmp);
    vals
}

fn check_admissible(sys: &dyn HyperbolicSystem, u: &State) -> Result<()> {
    if u.len() != sys.dim() {
        return Err(Error::Domain(format!("{} expects {} components, got {}", sys.name(), sys.dim(), u.len())));
    }
    if !u.iter().all(|x| x.is_finite()) || !sys.is_admissible(u.as_slice()) {
        return Err(Error::Domain(format!("{} rejects state {:?}", sys.name(), u.as_slice())));
    }
    Ok(())
}

pub fn flux(sys: &dyn HyperbolicSystem, u: &State) -> Result<State> {
    check_admissible(sys, u)?;
    Ok(sys.flux_vec(u.as_slice()))
}

pub fn flux_jacobian(sys: &dyn HyperbolicSystem, u: &State) -> Result<Matrix> {
    check_admissible(sys, u)?;
    Ok(sys.jacobian(u.as_slice()))
}

/// `(η(u), q(u))`.
pub fn entropy_pair(sys: &dyn HyperbolicSystem, u: &State) -> Result<(f64, f64)> {
    check_admissible(sys, u)?;
    Ok((sys.entropy(u.as_slice()), sys.entropy_flux(u.as_slice())))
}

pub fn entropy_gradient(sys: &dyn HyperbolicSystem, u: &State) -> Result<State> {
    check_admissible(sys, u)?;
    Ok(sys.entropy_grad(u.as_slice()))
}

pub fn require_admissible(sys: &dyn HyperbolicSystem, u: &State) -> Result<()> {
    check_admissible(sys, u)
}

/// The system `u_t - f(u)_x = 0`. Mirroring a mirror returns the original handle.
pub fn mirror_system(sys: &SystemRef) -> SystemRef {
    match sys.unmirrored() {
        Some(inner) => inner,
        None => Arc::new(Mirrored::new(sys.clone())),
    }
}

/// Relative residual `|∇q − ∇η f'| / (1 + |∇q|)` with a fourth-order finite-difference `∇q`.
pub fn compatibility_residual(sys: &dyn HyperbolicSystem, u: &State) -> f64 {
    let grad_q = fd_gradient4(|v| sys.entropy_flux(v), u.as_slice());
    let grad_eta = sys.entropy_grad(u.as_slice());
    let jac = sys.jacobian(u.as_slice());
    let expected = jac.transpose() * grad_eta;
    (grad_q.clone() - expected).norm() / (1.0 + grad_q.norm())
}

/// Uniform sample from the system's working box (in primitive coordinates).
pub fn sample_state<R: Rng + ?Sized>(sys: &dyn HyperbolicSystem, bx: &WorkingBox, rng: &mut R) -> State {
    State::from_vec(sys.from_primitive(&bx.sample(rng)))
}

/// `1.1 · max |λ|` over `n_samples` uniform states of the working box.
pub fn speed_bound<R: Rng + ?Sized>(sys: &dyn HyperbolicSystem, n_samples: usize, rng: &mut R) -> f64 {
    let bx = sys.working_box().clone();
    let top = (0..n_samples).map(|_| sys.max_speed(sample_state(sys, &bx, rng).as_slice())).fold(0.0, f64::max);
    1.1 * top
}

/// Serializable choice of a built-in system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Burgers {
        #[serde(default)]
        working_box: Option<WorkingBox>,
    },
    IsentropicEuler {
        gamma: f64,
        #[serde(default)]
        working_box: Option<WorkingBox>,
    },
    FullEuler {
        gamma: f64,
        #[serde(default)]
        working_box: Option<WorkingBox>,
    },
    Linear {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        working_box: Option<WorkingBox>,
    },
}

impl SystemSpec {
    pub fn build(&self) -> Result<SystemRef> {
        let check_box = |b: &Option<WorkingBox>, n: usize| -> Result<()> {
            if let Some(b) = b {
                b.validate()?;
                if b.dim() != n {
                    return Err(Error::Config(format!("working box must have {n} components")));
                }
            }
            Ok(())
        };
        let check_gamma = |g: f64| -> Result<()> {
            if !(g.is_finite() && g > 1.0) {
                return Err(Error::Config(format!("gamma must exceed 1, got {g}")));
            }
            Ok(())
        };
        Ok(match self {
            SystemSpec::Burgers { working_box } => {
                check_box(working_box, 1)?;
                let mut s = Burgers::default();
                if let Some(b) = working_box {
                    s.working_box = b.clone();
                }
                Arc::new(s)
            }
            SystemSpec::IsentropicEuler { gamma, working_box } => {
                check_gamma(*gamma)?;
                check_box(working_box, 2)?;
                let mut s = IsentropicEuler::new(*gamma);
                if let Some(b) = working_box {
                    if b.lo[0] <= 0.0 {
                        return Err(Error::Config("density bound must be positive".into()));
                    }
                    s.working_box = b.clone();
                }
                Arc::new(s)
            }
            SystemSpec::FullEuler { gamma, working_box } => {
                check_gamma(*gamma)?;
                check_box(working_box, 3)?;
                let mut s = FullEuler::new(*gamma);
                if let Some(b) = working_box {
                    if b.lo[0] <= 0.0 || b.lo[2] <= 0.0 {
                        return Err(Error::Config("density and pressure bounds must be positive".into()));
                    }
                    s.working_box = b.clone();
                }
                Arc::new(s)
            }
            SystemSpec::Linear { matrix, working_box } => {
                let n = matrix.len();
                if n == 0 || n > 3 || matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::Config("linear flux matrix must be square with 1 to 3 rows".into()));
                }
                check_box(working_box, n)?;
                let a = Matrix::from_fn(n, n, |i, j| matrix[i][j]);
                let mut s = LinearSystem::new(a)?;
                if let Some(b) = working_box {
                    s.working_box = b.clone();
                }
                Arc::new(s)
            }
        })
    }
}
