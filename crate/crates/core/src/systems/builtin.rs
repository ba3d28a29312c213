use std::collections::BTreeMap;

use super::{HyperbolicSystem, Matrix, SystemRef, WorkingBox};
use crate::error::{Error, Result};

/// Inviscid Burgers, `f = u²/2`, with entropy `η = u²`.
#[derive(Debug, Clone)]
pub struct Burgers {
    pub working_box: WorkingBox,
}

impl Default for Burgers {
    fn default() -> Self {
        Self { working_box: WorkingBox::new(vec![-2.0], vec![2.0]) }
    }
}

impl HyperbolicSystem for Burgers {
    fn name(&self) -> String {
        "burgers".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn is_admissible(&self, u: &[f64]) -> bool {
        u[0].is_finite()
    }
    fn working_box(&self) -> &WorkingBox {
        &self.working_box
    }
    fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        out[0] = 0.5 * u[0] * u[0];
    }
    fn entropy(&self, u: &[f64]) -> f64 {
        u[0] * u[0]
    }
    fn entropy_flux(&self, u: &[f64]) -> f64 {
        2.0 / 3.0 * u[0].powi(3)
    }
    fn entropy_grad_into(&self, u: &[f64], out: &mut [f64]) {
        out[0] = 2.0 * u[0];
    }
    fn jacobian(&self, u: &[f64]) -> Matrix {
        Matrix::from_element(1, 1, u[0])
    }
    fn entropy_hessian(&self, _u: &[f64]) -> Matrix {
        Matrix::from_element(1, 1, 2.0)
    }
    fn eigenvalues(&self, u: &[f64]) -> Vec<f64> {
        vec![u[0]]
    }
    fn lambda_first(&self, u: &[f64]) -> f64 {
        u[0]
    }
    fn lambda_last(&self, u: &[f64]) -> f64 {
        u[0]
    }
}

/// Isentropic Euler in conserved variables `(ρ, m)` with pressure `p = ρ^γ`.
#[derive(Debug, Clone)]
pub struct IsentropicEuler {
    pub gamma: f64,
    /// Bounds on `(ρ, v)`.
    pub working_box: WorkingBox,
}

impl IsentropicEuler {
    pub fn new(gamma: f64) -> Self {
        Self { gamma, working_box: WorkingBox::new(vec![0.1, -10.0], vec![10.0, 10.0]) }
    }

    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.gamma * rho.powf(self.gamma - 1.0)).sqrt()
    }
}

impl HyperbolicSystem for IsentropicEuler {
    fn name(&self) -> String {
        "isentropic_euler".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("gamma".to_string(), self.gamma)])
    }
    fn is_admissible(&self, u: &[f64]) -> bool {
        u[0] > 0.0 && u[0].is_finite() && u[1].is_finite()
    }
    fn working_box(&self) -> &WorkingBox {
        &self.working_box
    }
    fn to_primitive(&self, u: &[f64]) -> Vec<f64> {
        vec![u[0], u[1] / u[0]]
    }
    fn from_primitive(&self, w: &[f64]) -> Vec<f64> {
        vec![w[0], w[0] * w[1]]
    }
    fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        let (rho, m) = (u[0], u[1]);
        out[0] = m;
        out[1] = m * m / rho + rho.powf(self.gamma);
    }
    fn entropy(&self, u: &[f64]) -> f64 {
        let (rho, m) = (u[0], u[1]);
        0.5 * m * m / rho + rho.powf(self.gamma) / (self.gamma - 1.0)
    }
    fn entropy_flux(&self, u: &[f64]) -> f64 {
        let (rho, m) = (u[0], u[1]);
        let v = m / rho;
        let g = self.gamma;
        0.5 * rho * v * v * v + g / (g - 1.0) * rho.powf(g) * v
    }
    fn entropy_grad_into(&self, u: &[f64], out: &mut [f64]) {
        let (rho, m) = (u[0], u[1]);
        let v = m / rho;
        let g = self.gamma;
        out[0] = -0.5 * v * v + g / (g - 1.0) * rho.powf(g - 1.0);
        out[1] = v;
    }
    fn jacobian(&self, u: &[f64]) -> Matrix {
        let (rho, m) = (u[0], u[1]);
        let v = m / rho;
        let c2 = self.gamma * rho.powf(self.gamma - 1.0);
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, c2 - v * v, 2.0 * v])
    }
    fn entropy_hessian(&self, u: &[f64]) -> Matrix {
        let (rho, m) = (u[0], u[1]);
        let v = m / rho;
        let g = self.gamma;
        let a = v * v / rho + g * rho.powf(g - 2.0);
        Matrix::from_row_slice(2, 2, &[a, -v / rho, -v / rho, 1.0 / rho])
    }
    fn eigenvalues(&self, u: &[f64]) -> Vec<f64> {
        vec![self.lambda_first(u), self.lambda_last(u)]
    }
    fn lambda_first(&self, u: &[f64]) -> f64 {
        u[1] / u[0] - self.sound_speed(u[0])
    }
    fn lambda_last(&self, u: &[f64]) -> f64 {
        u[1] / u[0] + self.sound_speed(u[0])
    }
}

/// Full (polytropic) Euler in conserved variables `(ρ, ρv, E)`.
#[derive(Debug, Clone)]
pub struct FullEuler {
    pub gamma: f64,
    /// Bounds on `(ρ, v, p)`.
    pub working_box: WorkingBox,
}

impl FullEuler {
    pub fn new(gamma: f64) -> Self {
        Self { gamma, working_box: WorkingBox::new(vec![0.1, -10.0, 0.1], vec![10.0, 10.0, 10.0]) }
    }

    /// Internal energy density `ρe = E − m²/(2ρ)`.
    fn internal(u: &[f64]) -> f64 {
        u[2] - 0.5 * u[1] * u[1] / u[0]
    }

    pub fn pressure(&self, u: &[f64]) -> f64 {
        (self.gamma - 1.0) * Self::internal(u)
    }

    pub fn sound_speed(&self, u: &[f64]) -> f64 {
        (self.gamma * self.pressure(u) / u[0]).sqrt()
    }
}

impl HyperbolicSystem for FullEuler {
    fn name(&self) -> String {
        "full_euler".into()
    }
    fn dim(&self) -> usize {
        3
    }
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("gamma".to_string(), self.gamma)])
    }
    fn is_admissible(&self, u: &[f64]) -> bool {
        u.iter().all(|x| x.is_finite()) && u[0] > 0.0 && Self::internal(u) > 0.0
    }
    fn working_box(&self) -> &WorkingBox {
        &self.working_box
    }
    fn to_primitive(&self, u: &[f64]) -> Vec<f64> {
        vec![u[0], u[1] / u[0], self.pressure(u)]
    }
    fn from_primitive(&self, w: &[f64]) -> Vec<f64> {
        let (rho, v, p) = (w[0], w[1], w[2]);
        vec![rho, rho * v, p / (self.gamma - 1.0) + 0.5 * rho * v * v]
    }
    fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        let v = u[1] / u[0];
        let p = self.pressure(u);
        out[0] = u[1];
        out[1] = u[1] * v + p;
        out[2] = (u[2] + p) * v;
    }
    fn entropy(&self, u: &[f64]) -> f64 {
        let rho = u[0];
        self.gamma * rho * rho.ln() - rho * Self::internal(u).ln()
    }
    fn entropy_flux(&self, u: &[f64]) -> f64 {
        u[1] / u[0] * self.entropy(u)
    }
    fn entropy_grad_into(&self, u: &[f64], out: &mut [f64]) {
        let (rho, m) = (u[0], u[1]);
        let eps = Self::internal(u);
        let a = 0.5 * m * m / rho;
        let g = self.gamma;
        out[0] = g * rho.ln() + g - eps.ln() - a / eps;
        out[1] = m / eps;
        out[2] = -rho / eps;
    }
    fn jacobian(&self, u: &[f64]) -> Matrix {
        let g = self.gamma;
        let v = u[1] / u[0];
        let h = (u[2] + self.pressure(u)) / u[0];
        let k = 0.5 * (g - 1.0) * v * v;
        Matrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, 0.0, k - v * v, (3.0 - g) * v, g - 1.0, v * (k - h), h - (g - 1.0) * v * v, g * v],
        )
    }
    fn entropy_hessian(&self, u: &[f64]) -> Matrix {
        let (rho, m) = (u[0], u[1]);
        let v = m / rho;
        let eps = Self::internal(u);
        let e2 = eps * eps;
        let a = 0.5 * m * m / rho;
        let g = self.gamma;
        let h_rr = g / rho + a * a / (rho * e2);
        let h_rm = -a * v / e2;
        let h_re = -1.0 / eps + a / e2;
        let h_mm = 1.0 / eps + m * v / e2;
        let h_me = -m / e2;
        let h_ee = rho / e2;
        Matrix::from_row_slice(3, 3, &[h_rr, h_rm, h_re, h_rm, h_mm, h_me, h_re, h_me, h_ee])
    }
    fn eigenvalues(&self, u: &[f64]) -> Vec<f64> {
        let v = u[1] / u[0];
        let c = self.sound_speed(u);
        vec![v - c, v, v + c]
    }
    fn lambda_first(&self, u: &[f64]) -> f64 {
        u[1] / u[0] - self.sound_speed(u)
    }
    fn lambda_last(&self, u: &[f64]) -> f64 {
        u[1] / u[0] + self.sound_speed(u)
    }
}

/// Linear flux `f = Au` with symmetric `A` and entropy `|u|²/2`.
/// Linearly degenerate, so it serves as a negative case for the audit.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: Matrix,
    eigen: Vec<f64>,
    pub working_box: WorkingBox,
}

impl LinearSystem {
    pub fn new(a: Matrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || (a.clone() - a.transpose()).amax() > 1e-14 * (1.0 + a.amax()) {
            return Err(Error::Config("linear flux matrix must be symmetric".into()));
        }
        let mut eigen: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        eigen.sort_by(f64::total_cmp);
        Ok(Self { a, eigen, working_box: WorkingBox::new(vec![-1.0; n], vec![1.0; n]) })
    }
}

impl HyperbolicSystem for LinearSystem {
    fn name(&self) -> String {
        "linear".into()
    }
    fn dim(&self) -> usize {
        self.a.nrows()
    }
    fn is_admissible(&self, u: &[f64]) -> bool {
        u.iter().all(|x| x.is_finite())
    }
    fn working_box(&self) -> &WorkingBox {
        &self.working_box
    }
    fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.dim()) {
            *o = (0..u.len()).map(|j| self.a[(i, j)] * u[j]).sum();
        }
    }
    fn entropy(&self, u: &[f64]) -> f64 {
        0.5 * u.iter().map(|x| x * x).sum::<f64>()
    }
    fn entropy_flux(&self, u: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += u[i] * self.a[(i, j)] * u[j];
            }
        }
        0.5 * acc
    }
    fn entropy_grad_into(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(u);
    }
    fn jacobian(&self, _u: &[f64]) -> Matrix {
        self.a.clone()
    }
    fn entropy_hessian(&self, _u: &[f64]) -> Matrix {
        Matrix::identity(self.dim(), self.dim())
    }
    fn eigenvalues(&self, _u: &[f64]) -> Vec<f64> {
        self.eigen.clone()
    }
}

/// `u_t − f(u)_x = 0`: flux and entropy flux negated, spectrum reversed.
#[derive(Debug, Clone)]
pub struct Mirrored {
    inner: SystemRef,
}

impl Mirrored {
    pub fn new(inner: SystemRef) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &SystemRef {
        &self.inner
    }
}

impl HyperbolicSystem for Mirrored {
    fn name(&self) -> String {
        format!("mirror({})", self.inner.name())
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn params(&self) -> BTreeMap<String, f64> {
        self.inner.params()
    }
    fn is_admissible(&self, u: &[f64]) -> bool {
        self.inner.is_admissible(u)
    }
    fn working_box(&self) -> &WorkingBox {
        self.inner.working_box()
    }
    fn to_primitive(&self, u: &[f64]) -> Vec<f64> {
        self.inner.to_primitive(u)
    }
    fn from_primitive(&self, w: &[f64]) -> Vec<f64> {
        self.inner.from_primitive(w)
    }
    fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        self.inner.flux_into(u, out);
        out.iter_mut().for_each(|x| *x = -*x);
    }
    fn entropy(&self, u: &[f64]) -> f64 {
        self.inner.entropy(u)
    }
    fn entropy_flux(&self, u: &[f64]) -> f64 {
        -self.inner.entropy_flux(u)
    }
    fn entropy_grad_into(&self, u: &[f64], out: &mut [f64]) {
        self.inner.entropy_grad_into(u, out)
    }
    fn jacobian(&self, u: &[f64]) -> Matrix {
        -self.inner.jacobian(u)
    }
    fn entropy_hessian(&self, u: &[f64]) -> Matrix {
        self.inner.entropy_hessian(u)
    }
    fn eigenvalues(&self, u: &[f64]) -> Vec<f64> {
        self.inner.eigenvalues(u).iter().rev().map(|l| -l).collect()
    }
    fn lambda_first(&self, u: &[f64]) -> f64 {
        -self.inner.lambda_last(u)
    }
    fn lambda_last(&self, u: &[f64]) -> f64 {
        -self.inner.lambda_first(u)
    }
    fn unmirrored(&self) -> Option<SystemRef> {
        Some(self.inner.clone())
    }
}
