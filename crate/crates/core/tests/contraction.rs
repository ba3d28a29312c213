mod common;

use acontract::contraction::*;
use acontract::dissipation::d_cont;
use acontract::numerics::loglog_slope;
use acontract::relent::rel_entropy;
use acontract::systems::speed_bound;
use acontract::ShockContext;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn euler_ctx() -> ShockContext {
    ShockContext::new(&isentropic(1.4), &state(&[1.0, 1.4f64.sqrt()]), acontract::Family::First, 0.05, 20.0).unwrap()
}

fn constants(ctx: &ShockContext) -> ShiftConstants {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let l = speed_bound(ctx.system().as_ref(), 5000, &mut rng);
    ShiftConstants::calibrate(ctx, l, 1000, 10_000, &mut rng).unwrap().constants
}

fn grid(cells: usize) -> Grid {
    Grid { x_min: 0.0, x_max: 1.0, cells }
}

#[test]
fn constant_field_is_a_fixed_point() {
    let sys = isentropic(1.4);
    let mut f = FVField::new(0.0, 1.0, 100, 2).unwrap();
    f.fill(&[1.3, 0.4]);
    let before = f.clone();
    let (dt, stats) = fv_step(sys.as_ref(), &mut f, 0.45, 1e-12).unwrap();
    assert!(dt > 0.0 && (f.time() - dt).abs() < 1e-300);
    assert!(l2_distance(&f, &before) < 1e-15);
    assert!(stats.max_cell_residual <= 1e-12);
}

/// Position of the level set halfway between `a` and `b` in component 0.
fn level_set(f: &FVField, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    for j in 0..f.cells() - 1 {
        let (u, v) = (f.cell(j)[0], f.cell(j + 1)[0]);
        if (u - mid) * (v - mid) <= 0.0 && u != v {
            return f.center(j) + (mid - u) / (v - u) * f.dx();
        }
    }
    f64::NAN
}

#[test]
fn shocks_travel_at_the_rankine_hugoniot_speed() {
    for ctx in [burgers_ctx(), euler_ctx()] {
        let sys = ctx.system().clone();
        let init = make_ic(&InitialData::ExactShock { x0: 0.3, relax_steps: 0 }, &ctx, &grid(400), 0).unwrap();
        let mut f = init.field;
        while f.time() < 0.3 {
            fv_step(sys.as_ref(), &mut f, 0.45, f64::INFINITY).unwrap();
        }
        let x = level_set(&f, ctx.u_left()[0], ctx.u_right()[0]);
        let expected = 0.3 + ctx.speed() * f.time();
        assert!((x - expected).abs() < 3.0 * f.dx(), "{}: {x} vs {expected}", sys.name());
    }
}

#[test]
fn smooth_solutions_converge_at_first_order() {
    let sys = burgers();
    let u0 = |x: f64| 1.0 + 0.2 * (-(x - 0.4f64).powi(2) / 0.01).exp();
    let t_end = 0.1;
    // Exact solution by characteristics, u = u0(x − u t), before breaking.
    let exact = |x: f64| {
        let mut u = u0(x);
        for _ in 0..100 {
            u = u0(x - u * t_end);
        }
        u
    };
    let mut errors = Vec::new();
    let sizes = [100usize, 200, 400, 800];
    for &n in &sizes {
        let mut f = FVField::new(0.0, 1.0, n, 1).unwrap();
        for j in 0..n {
            f.cell_mut(j)[0] = u0(f.center(j));
        }
        let mut solver = Rusanov::new(&f);
        while f.time() < t_end * (1.0 - 1e-14) {
            let top = solver.prepare(sys.as_ref(), &f);
            let dt = (0.45 * f.dx() / top).min(t_end - f.time());
            solver.advance(sys.as_ref(), &mut f, dt, f64::INFINITY).unwrap();
        }
        errors.push((0..n).map(|j| (f.cell(j)[0] - exact(f.center(j))).abs() * f.dx()).sum::<f64>());
    }
    let h: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();
    let order = loglog_slope(&h, &errors);
    assert!(order >= 0.8, "L1 order {order} from {errors:?}");
}

#[test]
fn initial_data_construction() {
    let ctx = euler_ctx();
    let g = grid(200);
    let c = make_ic(&InitialData::Constant { state: None }, &ctx, &g, 0).unwrap().field;
    assert!((0..200).all(|j| c.cell(j) == ctx.u_left().as_slice()));

    // x0 = 0.3025 puts a quarter of cell 60 on the left.
    let e = make_ic(&InitialData::ExactShock { x0: 0.3025, relax_steps: 0 }, &ctx, &g, 0).unwrap();
    assert_eq!(e.h0, 0.3025);
    let (l, r) = (ctx.u_left(), ctx.u_right());
    assert!((0..60).all(|j| e.field.cell(j) == l.as_slice()));
    assert!((61..200).all(|j| e.field.cell(j) == r.as_slice()));
    let mixed = l * 0.5 + r * 0.5;
    assert!((e.field.state(60) - mixed).norm() < 1e-15);

    for direction in [Some(vec![1.0, 0.5]), None] {
        let p = InitialData::PerturbedShock {
            x0: 0.3025,
            amplitude: 0.1,
            center: Some(0.6),
            width: 0.05,
            direction,
            relax_steps: 0,
        };
        let pf = make_ic(&p, &ctx, &g, 3).unwrap().field;
        let norm = l2_distance(&pf, &e.field);
        assert!(rel_close(norm, 0.1 * ctx.s0(), 1e-2), "{norm}");
    }
    assert!(make_ic(&InitialData::ExactShock { x0: 1.5, relax_steps: 0 }, &ctx, &g, 0).is_err());
}

#[test]
fn relaxation_moves_the_shift_with_the_shock() {
    let ctx = euler_ctx();
    let init = make_ic(&InitialData::ExactShock { x0: 0.4, relax_steps: 50 }, &ctx, &grid(400), 0).unwrap();
    assert_eq!(init.field.time(), 0.0);
    assert!(init.h0 < 0.4 && init.h0 > 0.4 - 0.01);
}

#[test]
fn velocity_functional_switches_at_the_boundary_of_pi() {
    let ctx = burgers_ctx();
    let w = Weights::new(&ctx);
    let k = ShiftConstants::new(0.5, 2.2, 3.0);
    assert_eq!(velocity_functional(&ctx, &w, &k, &[1.0]), 1.0);
    let v = velocity_functional(&ctx, &w, &k, &[0.0]);
    assert_eq!(v, 0.0 - (3.0 + 4.4));
    assert!(v < -k.l);
    let (lo, hi) = b_roots();
    let eps = 1e-9;
    for r in [lo, hi] {
        let inside = if r == lo { r + eps } else { r - eps };
        let outside = if r == lo { r - eps } else { r + eps };
        assert!((velocity_functional(&ctx, &w, &k, &[inside]) - inside).abs() < 1e-15);
        assert!(velocity_functional(&ctx, &w, &k, &[outside]) < -k.l);
    }
    assert_eq!(velocity_at(&ctx, &k, &state(&[1.0])), 1.0);
}

#[test]
fn filippov_step_on_reference_fields() {
    let ctx = euler_ctx();
    let k = constants(&ctx);
    let w = Weights::new(&ctx);
    let sys = ctx.system().clone();
    let g = grid(400);

    // Traces on either side of a sharp jump.
    let sharp = make_ic(&InitialData::ExactShock { x0: 0.4, relax_steps: 0 }, &ctx, &g, 0).unwrap().field;
    let mut after = sharp.clone();
    let top = Rusanov::new(&sharp).prepare(sys.as_ref(), &sharp);
    let dt = 0.45 * sharp.dx() / (top + k.cstar + 3.0 * k.l);
    Rusanov::new(&sharp).advance(sys.as_ref(), &mut after, dt, f64::INFINITY).unwrap();
    let step = filippov_step(&ctx, &w, &k, &sharp, &after, 0.4, dt, 1).unwrap();
    assert_eq!(step.case, Case::Case3);
    assert!(step.dissipation.abs() <= 1e-12, "{}", step.dissipation);
    assert!(step.hdot >= step.v_plus && step.hdot <= step.v_minus);

    // On the travelling discrete profile the shift moves with the shock.
    let init = make_ic(&InitialData::ExactShock { x0: 0.4, relax_steps: 200 }, &ctx, &g, 0).unwrap();
    let mut field = init.field;
    let mut h = init.h0;
    let mut solver = Rusanov::new(&field);
    let (t_mid, t_end) = (0.05, 0.1);
    let mut h_mid = None;
    while field.time() < t_end {
        if field.time() >= t_mid && h_mid.is_none() {
            h_mid = Some((h, field.time()));
        }
        let top = solver.prepare(sys.as_ref(), &field);
        let dt = 0.45 * field.dx() / (top + k.cstar + 3.0 * k.l);
        let mut after = field.clone();
        solver.advance(sys.as_ref(), &mut after, dt, f64::INFINITY).unwrap();
        let step = filippov_step(&ctx, &w, &k, &field, &after, h, dt, 1).unwrap();
        assert!(step.case != Case::Case2 || step.gap_minus <= 1e-12 || -step.gap_plus <= 1e-12);
        assert!(step.hdot >= -0.5 * k.lambda_hat - 1e-12 && step.hdot <= k.alpha1 + 1e-12);
        h = step.h_next;
        field = after;
    }
    // The first steps move h onto the crossing inside the smeared profile.
    let (h1, t1) = h_mid.unwrap();
    let mean = (h - h1) / (field.time() - t1);
    assert!((mean - ctx.speed()).abs() < 0.05, "mean ḣ = {mean} vs σ = {}", ctx.speed());

    let mut c = FVField::new(0.0, 1.0, 100, 2).unwrap();
    c.fill(ctx.u_left().as_slice());
    let step = filippov_step(&ctx, &w, &k, &c, &c, 0.5, 1e-4, 1).unwrap();
    assert_eq!(step.case, Case::Case4);
    let lam = ctx.lambda1(ctx.u_left().as_slice());
    assert!((step.hdot - lam).abs() < 1e-15);
    let dc = d_cont(&ctx, ctx.u_left()).unwrap();
    assert!(dc < 0.0 && (step.dissipation - dc).abs() < 1e-12 * dc.abs().max(1e-300) + 1e-18);
}

#[test]
fn pseudo_distance_reference_values() {
    let ctx = euler_ctx();
    let w = Weights::new(&ctx);
    let g = grid(200);
    let e = make_ic(&InitialData::ExactShock { x0: 0.4, relax_steps: 0 }, &ctx, &g, 0).unwrap().field;
    assert!(pseudo_distance(&ctx, &w, &e, 0.4).abs() < 1e-15);
    let mut c = FVField::new(0.0, 2.0, 50, 2).unwrap();
    c.fill(ctx.u_left().as_slice());
    assert_eq!(pseudo_distance(&ctx, &w, &c, 2.0), 0.0);
    let eta_lr = rel_entropy(ctx.system().as_ref(), ctx.u_left(), ctx.u_right()).unwrap();
    assert!(rel_close(pseudo_distance(&ctx, &w, &c, 0.0), w.a2 * eta_lr * 2.0, 1e-12));
}

fn short_options() -> RunOptions {
    RunOptions { t_end: 0.05, record_every: 10, ..RunOptions::default() }
}

#[test]
fn exact_shock_stays_close_to_zero_distance() {
    let ctx = euler_ctx();
    let k = constants(&ctx);
    let g = grid(400);
    let init = make_ic(&InitialData::ExactShock { x0: 0.4, relax_steps: 0 }, &ctx, &g, 0).unwrap();
    let run = run_contraction(&ctx, init.field, init.h0, &k, &short_options()).unwrap();
    assert!(run.summary.e0.abs() < 1e-15);
    // Smearing the jump over a few cells costs O(Δx) once.
    let w = Weights::new(&ctx);
    let eta_lr = rel_entropy(ctx.system().as_ref(), ctx.u_left(), ctx.u_right()).unwrap();
    let tol = 10.0 * w.a2 * eta_lr / g.cells as f64;
    assert!(run.summary.e_max <= run.summary.e0 + tol, "{} > {tol}", run.summary.e_max);
    assert_eq!(run.summary.case2_genuine, 0);
    assert_eq!(run.summary.window_violations, 0);
}

#[test]
fn perturbed_shock_contracts() {
    let ctx = euler_ctx();
    let k = constants(&ctx);
    let ic = InitialData::PerturbedShock {
        x0: 0.4,
        amplitude: 0.1,
        center: None,
        width: 0.05,
        direction: Some(vec![1.0, 0.5]),
        relax_steps: 100,
    };
    let init = make_ic(&ic, &ctx, &grid(500), 0).unwrap();
    let run = run_contraction(&ctx, init.field, init.h0, &k, &RunOptions { t_end: 0.1, ..short_options() }).unwrap();
    let s = &run.summary;
    assert!(s.passed, "{s:?}");
    assert!(s.e_end < s.e0);
    assert_eq!(s.case2_genuine, 0);
    assert!(s.hdot_min >= s.window_lo - 1e-9 && s.hdot_max <= s.window_hi + 1e-9);
    assert_eq!(run.path.t.len(), run.path.e.len());
}

#[test]
fn run_rejects_bad_options() {
    let ctx = euler_ctx();
    let k = constants(&ctx);
    let init = make_ic(&InitialData::ExactShock { x0: 0.4, relax_steps: 0 }, &ctx, &grid(100), 0).unwrap();
    let bad = RunOptions { cfl: 1.5, ..RunOptions::default() };
    assert!(run_contraction(&ctx, init.field.clone(), init.h0, &k, &bad).is_err());
    let bad = RunOptions { trace_offset: 0, ..RunOptions::default() };
    assert!(run_contraction(&ctx, init.field, init.h0, &k, &bad).is_err());
}

#[test]
fn leaving_the_working_box_is_a_blow_up() {
    let ctx = euler_ctx();
    let ic = InitialData::PerturbedShock {
        x0: 0.4,
        amplitude: 1e4,
        center: None,
        width: 0.05,
        direction: Some(vec![-1.0, 0.0]),
        relax_steps: 0,
    };
    assert!(matches!(make_ic(&ic, &ctx, &grid(200), 0), Err(acontract::Error::BlowUp { .. })));
}
