//! Numerical a-contraction theory for small extremal shocks of one-dimensional
//! hyperbolic systems.
//!
//! The crate evaluates relative-entropy dissipation functionals for a fixed
//! shock `(u_L, u_R, σ)` with weights `a₁/a₂ = 1 + C s₀`, checks their sign
//! by sampling, and runs a finite-volume solver co-evolved with a
//! discontinuous-speed shift to monitor the weighted pseudo-distance.
//!
//! Modules, bottom-up:
//! - [`systems`]: flux/entropy abstraction, built-in systems, eigenstructure, assumption audit.
//! - [`relent`]: relative entropy and flux, the weighted pair `(η̃, q̃)`, geometry of `Π`.
//! - [`hugoniot`]: extremal shock curves and their asymptotics.
//! - [`dissipation`]: `D_cont`, `D_RH`, the maximal shock, sweeps.
//! - [`contraction`]: finite-volume runs with a Filippov shift.
//! - [`cli`]: configuration, stages and report bundling.

// `!(x > 0.0)` is used on purpose so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod cli;
pub mod contraction;
pub mod dissipation;
pub mod error;
pub mod hugoniot;
pub mod numerics;
pub mod relent;
pub mod systems;

pub use error::{Error, Result};
pub use relent::{Family, ShockContext};
pub use systems::{HyperbolicSystem, State, SystemRef};

/// Crate version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
