//! Run configuration, the four verification stages and report bundling.
//!
//! A run is driven by a JSON [`RunConfig`]; unknown keys are rejected. Each
//! stage returns its report or a [`CliError`], and [`run_stages`] collects
//! everything into a [`ReportBundle`] whose exit code is 0 when every stage
//! passed, 1 when a verification failed and 2 for usage or configuration
//! errors.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contraction::{
    make_ic, run_contraction, Calibration, ContractionRun, Grid, InitialData, RunOptions, RunSummary, ShiftConstants,
};
use crate::dissipation::{
    scaling_study, sweep_negativity, NegativityReport, ScalingOptions, ScalingTable, SweepOptions,
};
use crate::error::Error;
use crate::relent::{pi_diagnostics, Family, PiDiagnostics, ShockContext};
use crate::systems::{
    speed_bound, verify_assumptions, AssumptionReport, AuditThresholds, State, SystemRef, SystemSpec,
};
use crate::VERSION;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A stage that did not produce a passing report.
#[derive(Debug, Clone, thiserror::Error)]
pub enum CliError {
    /// Bad input: malformed config, inconsistent parameters, inadmissible shock.
    #[error("configuration error: {0}")]
    Usage(String),
    /// The computation ran but could not finish, e.g. a solver blow-up.
    #[error("verification failure: {0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Verification stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    VerifyAssumptions,
    VerifyDissipation,
    ScalingStudy,
    Contract,
}

impl Stage {
    pub const ALL: [Stage; 4] =
        [Stage::VerifyAssumptions, Stage::VerifyDissipation, Stage::ScalingStudy, Stage::Contract];

    pub fn name(self) -> &'static str {
        match self {
            Stage::VerifyAssumptions => "verify-assumptions",
            Stage::VerifyDissipation => "verify-dissipation",
            Stage::ScalingStudy => "scaling-study",
            Stage::Contract => "contract",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Weights `a₁/a₂`: `1 + C s₀` unless `ratio` is given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSpec {
    pub c: f64,
    pub ratio: Option<f64>,
    /// When set, the ratio must lie in `[1 + C₁s₀/2, 1 + 2C₁s₀]`.
    pub c1: Option<f64>,
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self { c: 100.0, ratio: None, c1: None }
    }
}

/// Settings of the `contract` stage. The shock is the one of the main
/// config, with its own strength and weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractConfig {
    pub s0: f64,
    pub weights: WeightSpec,
    pub grid: Grid,
    pub initial: InitialData,
    pub run: RunOptions,
    /// Samples of the working box for the speed bound `L`.
    pub speed_samples: usize,
    /// Samples of the ball `B(d, ε_d)` for `α₁`.
    pub ball_samples: usize,
    pub cstar_samples: usize,
    pub alpha1: Option<f64>,
    pub speed_bound: Option<f64>,
    pub cstar: Option<f64>,
}

impl Default for ContractConfig {
    fn default() -> Self {
        Self {
            s0: 0.05,
            weights: WeightSpec { c: 20.0, ratio: None, c1: None },
            grid: Grid::default(),
            initial: InitialData::PerturbedShock {
                x0: 0.4,
                amplitude: 0.1,
                center: None,
                width: 0.05,
                direction: Some(vec![1.0, 0.5]),
                relax_steps: 200,
            },
            run: RunOptions::default(),
            speed_samples: 10_000,
            ball_samples: 2000,
            cstar_samples: 20_000,
            alpha1: None,
            speed_bound: None,
            cstar: None,
        }
    }
}

/// Everything a run needs; every field has a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub family: Family,
    /// `u_L` for a first-family shock, `u_R` for a last-family one (conserved variables).
    pub base: Option<Vec<f64>>,
    /// Explicit shock `(u_L, u_R, σ)` replacing `base` and `s0`.
    pub shock: Option<ExplicitShock>,
    pub s0: f64,
    pub weights: WeightSpec,
    /// Center `d` of the working ball; defaults to `u_L`.
    pub basepoint: Option<Vec<f64>>,
    pub basepoint_radius: Option<f64>,
    /// Samples for the audit and interior samples of each sweep.
    pub samples: usize,
    pub geometry_samples: usize,
    pub audit: AuditThresholds,
    pub sweep: SweepOptions,
    /// Sweep `verify-dissipation` over `c_list × s0_list` instead of the single `(C, s₀)`.
    pub dissipation_grid: bool,
    pub c_list: Vec<f64>,
    pub s0_list: Vec<f64>,
    pub scaling: ScalingOptions,
    pub contract: ContractConfig,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitShock {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub speed: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemSpec::IsentropicEuler { gamma: 1.4, working_box: None },
            family: Family::First,
            base: None,
            shock: None,
            s0: 1e-2,
            weights: WeightSpec::default(),
            basepoint: None,
            basepoint_radius: None,
            samples: 10_000,
            geometry_samples: 200,
            audit: AuditThresholds::default(),
            sweep: SweepOptions::default(),
            dissipation_grid: false,
            c_list: vec![50.0, 100.0, 200.0],
            s0_list: vec![1e-3, 3e-3, 1e-2],
            scaling: ScalingOptions::default(),
            contract: ContractConfig::default(),
            seed: 7,
            stages: Stage::ALL.to_vec(),
            format: OutputFormat::Json,
            out: None,
        }
    }
}

/// Default base state of each built-in system, in conserved variables.
pub fn default_base(spec: &SystemSpec) -> Vec<f64> {
    match spec {
        SystemSpec::Burgers { .. } => vec![1.0],
        SystemSpec::IsentropicEuler { gamma, .. } => vec![1.0, gamma.sqrt()],
        SystemSpec::FullEuler { .. } => vec![1.0, 0.2, 2.5],
        SystemSpec::Linear { matrix, .. } => vec![0.0; matrix.len()],
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Parses JSON; errors carry serde's line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks tolerances, sizes and the weight window.
    pub fn validate(&self) -> Result<(), CliError> {
        positive("s0", self.s0)?;
        positive("contract.s0", self.contract.s0)?;
        for (name, w, s0) in
            [("weights", &self.weights, self.s0), ("contract.weights", &self.contract.weights, self.contract.s0)]
        {
            if !(w.c >= 0.0 && w.c.is_finite()) {
                return Err(CliError::Usage(format!("{name}.c must be nonnegative")));
            }
            if let Some(r) = w.ratio {
                positive(&format!("{name}.ratio"), r)?;
                if let Some(c1) = w.c1 {
                    let (lo, hi) = (1.0 + 0.5 * c1 * s0, 1.0 + 2.0 * c1 * s0);
                    if r < lo || r > hi {
                        return Err(CliError::Usage(format!("{name}.ratio {r} outside [{lo}, {hi}] for C1 = {c1}")));
                    }
                }
            }
        }
        for (name, v) in [
            ("audit.max_compat_residual", self.audit.max_compat_residual),
            ("audit.max_eigen_residual", self.audit.max_eigen_residual),
            ("sweep.tol_zero_factor", self.sweep.tol_zero_factor),
            ("sweep.scan_tolerance", self.sweep.scan_tolerance),
            ("sweep.argmax_radius", self.sweep.argmax_radius),
            ("contract.run.tol_entropy", self.contract.run.tol_entropy),
            ("contract.run.tol_dissipation", self.contract.run.tol_dissipation),
            ("contract.run.trace_tolerance", self.contract.run.trace_tolerance),
            ("contract.run.k_tol_max", self.contract.run.k_tol_max),
            ("contract.run.cfl", self.contract.run.cfl),
            ("contract.run.t_end", self.contract.run.t_end),
        ] {
            positive(name, v)?;
        }
        if self.samples == 0 || self.contract.grid.cells < 8 {
            return Err(CliError::Usage("samples must be positive and the grid needs at least 8 cells".into()));
        }
        if self.c_list.is_empty() || self.s0_list.is_empty() {
            return Err(CliError::Usage("c_list and s0_list must be nonempty".into()));
        }
        for &v in self.c_list.iter().chain(&self.s0_list) {
            positive("grid entry", v)?;
        }
        if self.stages.is_empty() {
            return Err(CliError::Usage("no stages selected".into()));
        }
        Ok(())
    }

    /// Overwrites every nested seed with ones derived from `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.audit.seed = seed;
        self.sweep.seed = seed.wrapping_add(1);
        self.scaling.sweep.seed = seed.wrapping_add(2);
        self
    }

    /// SHA-256 of the canonical JSON of the effective config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn build_system(&self) -> Result<SystemRef, CliError> {
        self.system.build().map_err(usage)
    }

    fn base_state(&self, sys: &SystemRef) -> Result<State, CliError> {
        let base = self.base.clone().unwrap_or_else(|| default_base(&self.system));
        if base.len() != sys.dim() {
            return Err(CliError::Usage(format!("base has {} components, system has {}", base.len(), sys.dim())));
        }
        Ok(State::from_vec(base))
    }

    /// Shock context for `(C, s₀)` with this config's weight and basepoint overrides.
    pub fn context(&self, sys: &SystemRef, s0: f64, weights: &WeightSpec) -> Result<ShockContext, CliError> {
        let mut ctx = match &self.shock {
            Some(sh) => {
                let n = sys.dim();
                if sh.left.len() != n || sh.right.len() != n {
                    return Err(CliError::Usage("explicit shock states must match the system dimension".into()));
                }
                ShockContext::from_states(
                    sys,
                    &State::from_vec(sh.left.clone()),
                    &State::from_vec(sh.right.clone()),
                    sh.speed,
                    self.family,
                    weights.c,
                )
                .map_err(usage)?
            }
            None => ShockContext::new(sys, &self.base_state(sys)?, self.family, s0, weights.c).map_err(usage)?,
        };
        if let Some(r) = weights.ratio {
            ctx = ctx.with_weight_ratio(r).map_err(usage)?;
        }
        if let Some(c1) = weights.c1 {
            ctx.check_window(c1).map_err(usage)?;
        }
        if let Some(d) = &self.basepoint {
            if d.len() != sys.dim() {
                return Err(CliError::Usage("basepoint must match the system dimension".into()));
            }
            let radius = self.basepoint_radius.unwrap_or(ctx.radius());
            ctx = ctx.with_basepoint(State::from_vec(d.clone()), radius).map_err(usage)?;
        } else if let Some(radius) = self.basepoint_radius {
            let d = ctx.basepoint().clone();
            ctx = ctx.with_basepoint(d, radius).map_err(usage)?;
        }
        Ok(ctx)
    }
}

pub fn cmd_verify_assumptions(cfg: &RunConfig) -> Result<AssumptionReport, CliError> {
    let sys = cfg.build_system()?;
    Ok(verify_assumptions(&sys, sys.working_box(), cfg.samples, &cfg.audit))
}

/// Negativity sweeps together with the geometry of `Π` for the main `(C, s₀)`.
#[derive(Debug, Clone, Serialize)]
pub struct DissipationReport {
    pub geometry: PiDiagnostics,
    pub sweeps: Vec<NegativityReport>,
    pub passed: bool,
}

pub fn cmd_verify_dissipation(cfg: &RunConfig) -> Result<DissipationReport, CliError> {
    let sys = cfg.build_system()?;
    let opts = SweepOptions { interior: cfg.samples, ..cfg.sweep.clone() };
    let pairs: Vec<(f64, f64)> = if cfg.dissipation_grid {
        cfg.c_list.iter().flat_map(|&c| cfg.s0_list.iter().map(move |&s0| (c, s0))).collect()
    } else {
        vec![(cfg.weights.c, cfg.s0)]
    };
    let main = cfg.context(&sys, cfg.s0, &cfg.weights)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let geometry =
        pi_diagnostics(&main, cfg.geometry_samples, &mut rng).map_err(|e| CliError::Failure(e.to_string()))?;
    let mut sweeps = Vec::with_capacity(pairs.len());
    for (k, (c, s0)) in pairs.into_iter().enumerate() {
        let weights = WeightSpec { c, ..cfg.weights.clone() };
        let ctx = cfg.context(&sys, s0, &weights)?;
        sweeps.push(sweep_negativity(&ctx, &SweepOptions { seed: opts.seed.wrapping_add(k as u64), ..opts.clone() }));
    }
    let passed = sweeps.iter().all(|s| s.passed);
    Ok(DissipationReport { geometry, sweeps, passed })
}

pub fn cmd_scaling_study(cfg: &RunConfig) -> Result<ScalingTable, CliError> {
    let sys = cfg.build_system()?;
    let base = cfg.base_state(&sys)?;
    let mut opts = cfg.scaling.clone();
    opts.c_list = cfg.c_list.clone();
    opts.s0_list = cfg.s0_list.clone();
    opts.sweep.interior = cfg.samples;
    opts.geometry_samples = cfg.geometry_samples;
    Ok(scaling_study(&sys, &base, cfg.family, &opts))
}

/// A contraction run without its per-step trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ContractReport {
    pub system: String,
    pub c: f64,
    pub s0: f64,
    pub weight_ratio: f64,
    pub speed: f64,
    pub calibration: Calibration,
    pub constants: ShiftConstants,
    pub h0: f64,
    pub options: RunOptions,
    pub summary: RunSummary,
    pub passed: bool,
}

/// Builds the context, calibrates the shift constants and runs the solver.
///
/// Returns the full run as well, for callers that want the trajectory.
pub fn cmd_contract(cfg: &RunConfig) -> Result<(ContractReport, ContractionRun), CliError> {
    let sys = cfg.build_system()?;
    let cc = &cfg.contract;
    let ctx = cfg.context(&sys, cc.s0, &cc.weights)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
    let l = cc.speed_bound.unwrap_or_else(|| speed_bound(sys.as_ref(), cc.speed_samples, &mut rng));
    let mut calibration =
        ShiftConstants::calibrate(&ctx, l, cc.ball_samples, cc.cstar_samples, &mut rng).map_err(usage)?;
    let base = calibration.constants;
    calibration.constants =
        ShiftConstants::new(cc.alpha1.unwrap_or(base.alpha1), base.l, cc.cstar.unwrap_or(base.cstar));
    let failure = |e: Error| match e {
        Error::Config(_) | Error::Precondition(_) | Error::Range(_) => CliError::Usage(e.to_string()),
        e => CliError::Failure(e.to_string()),
    };
    let init = make_ic(&cc.initial, &ctx, &cc.grid, cfg.seed).map_err(failure)?;
    let run = run_contraction(&ctx, init.field, init.h0, &calibration.constants, &cc.run).map_err(failure)?;
    let report = ContractReport {
        system: run.system.clone(),
        c: run.c,
        s0: run.s0,
        weight_ratio: run.weight_ratio,
        speed: run.speed,
        calibration,
        constants: run.constants,
        h0: init.h0,
        options: run.options.clone(),
        summary: run.summary.clone(),
        passed: run.summary.passed && run.summary.e_decreased,
    };
    Ok((report, run))
}

#[derive(Debug, Clone, Serialize)]
pub struct StageError {
    pub stage: Stage,
    pub exit_code: i32,
    pub message: String,
}

/// All reports of a run. `passed` holds iff every enabled stage passed.
#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub assumptions: Option<AssumptionReport>,
    pub dissipation: Option<DissipationReport>,
    pub scaling: Option<ScalingTable>,
    pub contraction: Option<ContractReport>,
    pub errors: Vec<StageError>,
    pub passed: bool,
    #[serde(skip)]
    pub run: Option<ContractionRun>,
}

impl ReportBundle {
    pub fn exit_code(&self) -> i32 {
        if self.errors.iter().any(|e| e.exit_code == EXIT_USAGE) {
            EXIT_USAGE
        } else if self.passed {
            EXIT_PASS
        } else {
            EXIT_FAILURE
        }
    }
}

/// Runs `cfg.stages` in order.
pub fn run_stages(cfg: &RunConfig) -> ReportBundle {
    let mut stages = cfg.stages.clone();
    stages.sort();
    stages.dedup();
    let mut b = ReportBundle {
        version: VERSION.to_string(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        stages: stages.clone(),
        assumptions: None,
        dissipation: None,
        scaling: None,
        contraction: None,
        errors: Vec::new(),
        passed: true,
        run: None,
    };
    for stage in stages {
        let outcome = match stage {
            Stage::VerifyAssumptions => cmd_verify_assumptions(cfg).map(|r| {
                let ok = r.passed;
                b.assumptions = Some(r);
                ok
            }),
            Stage::VerifyDissipation => cmd_verify_dissipation(cfg).map(|r| {
                let ok = r.passed;
                b.dissipation = Some(r);
                ok
            }),
            Stage::ScalingStudy => cmd_scaling_study(cfg).map(|r| {
                let ok = r.passed;
                b.scaling = Some(r);
                ok
            }),
            Stage::Contract => cmd_contract(cfg).map(|(r, run)| {
                let ok = r.passed;
                b.contraction = Some(r);
                b.run = Some(run);
                ok
            }),
        };
        match outcome {
            Ok(ok) => b.passed &= ok,
            Err(e) => {
                b.passed = false;
                b.errors.push(StageError { stage, exit_code: e.exit_code(), message: e.to_string() });
            }
        }
    }
    b
}

#[derive(Serialize)]
struct AssumptionRow<'a> {
    id: &'a str,
    passed: bool,
    margin: Option<f64>,
    threshold: f64,
}

#[derive(Serialize)]
struct SweepRow {
    c: f64,
    s0: f64,
    weight_ratio: f64,
    samples: usize,
    max_d_cont: f64,
    k_fit: f64,
    max_d_max: f64,
    d_max_left: f64,
    argmax_offset: f64,
    d_cont_violations: usize,
    d_max_violations: usize,
    passed: bool,
}

#[derive(Serialize)]
struct ScalingRow {
    c: f64,
    s0: f64,
    max_d_cont: f64,
    k_fit: f64,
    max_d_max: f64,
    diameter_times_c: f64,
    min_grad_over_s0: f64,
    normal_ratio_min: f64,
    normal_ratio_max: f64,
    ustar_offset_scaled: Option<f64>,
    passed: bool,
}

#[derive(Serialize)]
struct PathRow {
    t: f64,
    h: f64,
    hdot: f64,
    e: f64,
    case: usize,
    dissipation: f64,
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Writes `report.json` and, for CSV output, one table per stage. Returns the written paths.
pub fn write_bundle(bundle: &ReportBundle, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    let path = dir.join("report.json");
    let json = serde_json::to_string_pretty(bundle).map_err(|e| io(&path, e))?;
    let mut f = fs::File::create(&path).map_err(|e| io(&path, e))?;
    f.write_all(json.as_bytes()).and_then(|_| f.write_all(b"\n")).map_err(|e| io(&path, e))?;
    written.push(path);
    if format == OutputFormat::Json {
        return Ok(written);
    }
    if let Some(a) = &bundle.assumptions {
        let path = dir.join("assumptions.csv");
        write_csv(
            &path,
            a.checks.iter().map(|c| AssumptionRow {
                id: &c.id,
                passed: c.passed,
                margin: c.margin,
                threshold: c.threshold,
            }),
        )?;
        written.push(path);
    }
    if let Some(d) = &bundle.dissipation {
        let path = dir.join("dissipation.csv");
        write_csv(
            &path,
            d.sweeps.iter().map(|s| SweepRow {
                c: s.c,
                s0: s.s0,
                weight_ratio: s.weight_ratio,
                samples: s.samples,
                max_d_cont: s.max_d_cont,
                k_fit: s.k_fit,
                max_d_max: s.max_d_max,
                d_max_left: s.d_max_left,
                argmax_offset: s.argmax_offset,
                d_cont_violations: s.d_cont_violations,
                d_max_violations: s.d_max_violations,
                passed: s.passed,
            }),
        )?;
        written.push(path);
    }
    if let Some(t) = &bundle.scaling {
        let path = dir.join("scaling.csv");
        write_csv(
            &path,
            t.cells.iter().map(|c| ScalingRow {
                c: c.c,
                s0: c.s0,
                max_d_cont: c.max_d_cont,
                k_fit: c.k_fit,
                max_d_max: c.max_d_max,
                diameter_times_c: c.diameter_times_c,
                min_grad_over_s0: c.min_grad_over_s0,
                normal_ratio_min: c.normal_ratio_min,
                normal_ratio_max: c.normal_ratio_max,
                ustar_offset_scaled: c.ustar_offset_scaled,
                passed: c.negativity_passed && c.error.is_none(),
            }),
        )?;
        written.push(path);
    }
    if let Some(run) = &bundle.run {
        let path = dir.join("contraction.csv");
        let p = &run.path;
        // The first entry is the initial state and has no step data.
        write_csv(
            &path,
            (1..p.t.len()).map(|k| PathRow {
                t: p.t[k],
                h: p.h[k],
                hdot: p.hdot[k - 1],
                e: p.e[k],
                case: p.case[k - 1].index(),
                dissipation: p.dissipation[k - 1],
            }),
        )?;
        written.push(path);
    }
    Ok(written)
}

/// Command-line arguments.
#[derive(Debug, clap::Parser)]
#[command(name = "acontract", version, about = "Verify relative-entropy a-contraction for small extremal shocks")]
pub struct Args {
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: the config's `out`, else `acontract-out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides every seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run only this stage (repeatable).
    #[arg(long, value_enum)]
    pub stage: Vec<Stage>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args(args: Args) -> i32 {
    let mut cfg = match &args.config {
        Some(p) => match RunConfig::from_path(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return e.exit_code();
            }
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    if !args.stage.is_empty() {
        cfg.stages = args.stage.clone();
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    let out = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("acontract-out"));
    cfg.out = None;
    let bundle = run_stages(&cfg);
    for e in &bundle.errors {
        eprintln!("{}: {}", e.stage.name(), e.message);
    }
    let code = match write_bundle(&bundle, &out, cfg.format) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            bundle.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_USAGE
        }
    };
    println!("{}", if bundle.passed { "PASS" } else { "FAIL" });
    code
}
