//! Builders and closed-form oracles shared by the integration tests.
//!
//! The Burgers formulas below are written out by hand and do not call into
//! the library, so they serve as independent references.
#![allow(dead_code)]

use acontract::systems::{State, SystemRef, SystemSpec};
use acontract::{Family, ShockContext};

pub fn burgers() -> SystemRef {
    SystemSpec::Burgers { working_box: None }.build().unwrap()
}

pub fn isentropic(gamma: f64) -> SystemRef {
    SystemSpec::IsentropicEuler { gamma, working_box: None }.build().unwrap()
}

pub fn full_euler(gamma: f64) -> SystemRef {
    SystemSpec::FullEuler { gamma, working_box: None }.build().unwrap()
}

pub fn state(v: &[f64]) -> State {
    State::from_column_slice(v)
}

/// `u_L = 1`, `u_R = 0`, `C = 10`, so `a₁/a₂ = 11`.
pub fn burgers_ctx() -> ShockContext {
    ShockContext::new(&burgers(), &state(&[1.0]), Family::First, 1.0, 10.0).unwrap()
}

pub fn isentropic_ctx(gamma: f64, s0: f64, c: f64) -> ShockContext {
    ShockContext::new(&isentropic(gamma), &state(&[1.0, 0.5]), Family::First, s0, c).unwrap()
}

pub fn full_euler_ctx(s0: f64, c: f64) -> ShockContext {
    ShockContext::new(&full_euler(1.4), &state(&[1.0, 0.2, 2.5]), Family::First, s0, c).unwrap()
}

/// Burgers with `η = u²`: `η(a|b) = (a − b)²`.
pub fn b_rel(a: f64, b: f64) -> f64 {
    (a - b) * (a - b)
}

/// `q(a;b) = ⅔a³ + ⅓b³ − a²b`.
pub fn b_relq(a: f64, b: f64) -> f64 {
    2.0 / 3.0 * a * a * a + b * b * b / 3.0 - a * a * b
}

pub const B_WEIGHT: f64 = 11.0;

pub fn b_tilde(u: f64) -> f64 {
    B_WEIGHT * b_rel(u, 1.0) - b_rel(u, 0.0)
}

pub fn b_tilde_q(u: f64) -> f64 {
    B_WEIGHT * b_relq(u, 1.0) - b_relq(u, 0.0)
}

/// Roots of `10u² − 22u + 11`.
pub fn b_roots() -> (f64, f64) {
    let d = 11f64.sqrt() / 10.0;
    (1.1 - d, 1.1 + d)
}

pub fn b_d_cont(u: f64) -> f64 {
    -b_tilde_q(u) + u * b_tilde(u)
}

/// `D_RH` for Burgers with `u_L = 1`, `u_R = 0`.
pub fn b_d_rh(um: f64, up: f64, sigma: f64) -> f64 {
    (b_relq(up, 0.0) - sigma * b_rel(up, 0.0)) - B_WEIGHT * (b_relq(um, 1.0) - sigma * b_rel(um, 1.0))
}

/// Maximum of `D_RH(u, u − s, u − s/2)` over an `n`-point grid in `s ∈ [0, s_max]`.
pub fn b_d_max_scan(u: f64, s_max: f64, n: usize) -> (f64, f64) {
    (0..=n)
        .map(|k| {
            let s = s_max * k as f64 / n as f64;
            (b_d_rh(u, u - s, u - 0.5 * s), s)
        })
        .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a })
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
