//! Finite-volume solutions with a Filippov shift and the weighted
//! pseudo-distance `E_t` between them and the shock.
//!
//! Runs take place in the reduced frame of the [`ShockContext`], so a
//! last-family shock is simulated as a 1-shock of the mirrored system.
//!
//! [`ShockContext`]: crate::relent::ShockContext

mod fv;
mod run;
mod shift;

pub use fv::{fv_step, l2_distance, make_ic, FVField, Grid, InitialData, InitialField, Rusanov, StepEntropy};
pub use run::{run_contraction, ContractionRun, RunOptions, RunSummary, ShiftPath, Snapshot};
pub use shift::{
    filippov_step, pseudo_distance, trace_cells, velocity_at, velocity_functional, Calibration, Case, ShiftConstants,
    ShiftStep, Weights,
};
