use super::{check_admissible, HyperbolicSystem, Matrix, State};
use crate::error::{Error, Result};

/// Unit eigenvectors of `f'(u)` for every family.
///
/// Right vectors of the extremal families are oriented so that
/// `∇λ¹·r₁ < 0` and `∇λⁿ·rₙ > 0`; left vectors so that `lⁱ·rᵢ > 0`.
/// The second condition is exactly the first one read on the mirrored system.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub lambda: Vec<f64>,
    pub right: Vec<State>,
    pub left: Vec<State>,
    /// Directional derivatives `∇λᵢ·rᵢ` in the chosen orientation.
    pub gnl: Vec<f64>,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Flip signs to stay continuous with a neighbouring evaluation.
    pub fn align_to(&mut self, prev: &EigenBasis) {
        for i in 0..self.dim() {
            if self.right[i].dot(&prev.right[i]) < 0.0 {
                self.right[i].neg_mut();
                self.left[i].neg_mut();
                self.gnl[i] = -self.gnl[i];
            }
        }
    }

    /// Largest of `|f' rᵢ − λᵢ rᵢ|` and `|lⁱ f' − λᵢ lⁱ|`.
    pub fn residual(&self, jac: &Matrix) -> f64 {
        (0..self.dim())
            .map(|i| {
                let rr = (jac * &self.right[i] - &self.right[i] * self.lambda[i]).norm();
                let lr = (jac.transpose() * &self.left[i] - &self.left[i] * self.lambda[i]).norm();
                rr.max(lr)
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|lⁱ·rⱼ|` over `i ≠ j`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.left[i].dot(&self.right[j]).abs());
                }
            }
        }
        worst
    }
}

fn null_vector(m: &Matrix) -> State {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("matrix is nonempty");
    let v = v_t.row(k).transpose();
    &v / v.norm()
}

fn largest_component_positive(v: &mut State) {
    let k = v.iamax();
    if v[k] < 0.0 {
        v.neg_mut();
    }
}

/// Directional derivative of the i-th eigenvalue along `r`.
fn eigen_derivative(sys: &dyn HyperbolicSystem, u: &State, r: &State, i: usize) -> f64 {
    let h = 1e-6 * (1.0 + u.norm());
    let up = u + r * h;
    let um = u - r * h;
    let lam = |v: &State| sys.eigenvalues(v.as_slice())[i];
    match (sys.is_admissible(up.as_slice()), sys.is_admissible(um.as_slice())) {
        (true, true) => (lam(&up) - lam(&um)) / (2.0 * h),
        (true, false) => (lam(&up) - lam(u)) / h,
        (false, true) => (lam(u) - lam(&um)) / h,
        (false, false) => f64::NAN,
    }
}

/// Normalized eigenbasis of `f'(u)`.
pub fn eigenstructure(sys: &dyn HyperbolicSystem, u: &State) -> Result<EigenBasis> {
    check_admissible(sys, u)?;
    let n = sys.dim();
    let jac = sys.jacobian(u.as_slice());
    let lambda = sys.eigenvalues(u.as_slice());
    if lambda.iter().any(|l| !l.is_finite()) {
        return Err(Error::Degeneracy(format!("flux Jacobian not real-diagonalizable at {:?}", u.as_slice())));
    }
    if n >= 2 {
        let scale = lambda.iter().fold(0.0_f64, |m, l| m.max(l.abs())).max(f64::MIN_POSITIVE);
        let gap = (lambda[1] - lambda[0]).min(lambda[n - 1] - lambda[n - 2]);
        if gap < 1e-8 * scale {
            return Err(Error::Degeneracy(format!("extremal eigenvalue gap {gap:.3e} at {:?}", u.as_slice())));
        }
    }

    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut gnl = Vec::with_capacity(n);
    for (i, &lam) in lambda.iter().enumerate() {
        let (mut r, mut l) = if n == 1 {
            (State::from_element(1, 1.0), State::from_element(1, 1.0))
        } else {
            let shifted = &jac - Matrix::identity(n, n) * lam;
            (null_vector(&shifted), null_vector(&shifted.transpose()))
        };
        let mut d = eigen_derivative(sys, u, &r, i);
        let tiny = 1e-9 * (1.0 + lam.abs());
        let want = if i == 0 {
            -1.0
        } else if i == n - 1 {
            1.0
        } else {
            0.0
        };
        if want != 0.0 && d.is_finite() && d.abs() > tiny {
            if d * want < 0.0 {
                r.neg_mut();
                d = -d;
            }
        } else {
            let before = r[r.iamax()];
            largest_component_positive(&mut r);
            if r[r.iamax()] != before {
                d = -d;
            }
        }
        if l.dot(&r) < 0.0 {
            l.neg_mut();
        }
        right.push(r);
        left.push(l);
        gnl.push(d);
    }
    Ok(EigenBasis { lambda, right, left, gnl })
}
