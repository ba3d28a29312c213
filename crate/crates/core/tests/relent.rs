mod common;

use acontract::relent::*;
use acontract::systems::{fd_gradient, sample_state};
use acontract::Error;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn relative_entropy_examples() {
    let b = burgers();
    assert_eq!(rel_entropy(b.as_ref(), &state(&[1.0]), &state(&[0.0])).unwrap(), 1.0);
    assert!((rel_entropy_flux(b.as_ref(), &state(&[1.0]), &state(&[0.0])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!((rel_entropy_flux(b.as_ref(), &state(&[0.0]), &state(&[1.0])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let e = isentropic(2.0);
    let v = rel_entropy(e.as_ref(), &state(&[1.0, 0.0]), &state(&[1.0, 1.0])).unwrap();
    assert!((v - 0.5).abs() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for sys in [b, e, full_euler(1.4)] {
        let u = sample_state(sys.as_ref(), sys.working_box(), &mut rng);
        assert_eq!(rel_entropy(sys.as_ref(), &u, &u).unwrap(), 0.0);
        assert_eq!(rel_entropy_flux(sys.as_ref(), &u, &u).unwrap(), 0.0);
    }
}

#[test]
fn relative_entropy_is_quadratic_in_the_separation() {
    let sys = full_euler(1.4);
    let b = state(&[1.0, 0.2, 2.5]);
    let d = state(&[0.3, -0.2, 0.5]);
    let ratios: Vec<f64> =
        [1e-2, 1e-6, 1e-8].iter().map(|&t| rel_entropy(sys.as_ref(), &(&b + &d * t), &b).unwrap() / (t * t)).collect();
    // The cubic term is O(t); without cancellation the quadratic coefficient
    // survives down to tiny separations.
    assert!(rel_close(ratios[0], ratios[2], 1e-2));
    assert!(rel_close(ratios[1], ratios[2], 1e-6), "{ratios:?}");
}

#[test]
fn tilde_pair_in_the_burgers_context() {
    let ctx = burgers_ctx();
    assert!((ctx.tilde_eta(&state(&[1.0])).unwrap() + 1.0).abs() < 1e-14);
    assert!((ctx.tilde_q(&state(&[1.0])).unwrap() + 2.0 / 3.0).abs() < 1e-14);
    let e_r = ctx.tilde_eta(&state(&[0.0])).unwrap();
    assert!((e_r - 11.0).abs() < 1e-13 && e_r > 0.0);
    for u in [-0.5, 0.3, 0.9, 1.2, 1.6] {
        assert!((ctx.tilde_eta(&state(&[u])).unwrap() - b_tilde(u)).abs() < 1e-13);
        assert!((ctx.tilde_q(&state(&[u])).unwrap() - b_tilde_q(u)).abs() < 1e-13);
    }
    assert!(ctx.in_pi(&state(&[1.0])));
    assert!(!ctx.in_pi(&state(&[0.0])));
    // η̃(0.5) = 11·0.25 − 0.25 = 2.5.
    assert!((ctx.tilde_eta(&state(&[0.5])).unwrap() - 2.5).abs() < 1e-14);
    assert!(!ctx.in_pi(&state(&[0.5])));
}

#[test]
fn left_and_right_states_of_a_system_context() {
    let ctx = isentropic_ctx(1.4, 1e-2, 100.0);
    let sys = ctx.system();
    let (l, r) = (ctx.u_left().clone(), ctx.u_right().clone());
    let e_l = ctx.tilde_eta(&l).unwrap();
    assert!((e_l + rel_entropy(sys.as_ref(), &l, &r).unwrap()).abs() < 1e-15);
    let e_r = ctx.tilde_eta(&r).unwrap();
    let expected = (1.0 + 100.0 * 1e-2) * rel_entropy(sys.as_ref(), &r, &l).unwrap();
    assert!(rel_close(e_r, expected, 1e-12) && e_r > 0.0);
}

#[test]
fn boundary_projection_in_one_dimension() {
    let ctx = burgers_ctx();
    let (lo, hi) = b_roots();
    // r₁ = −1 for Burgers, so projecting along −r₁ reaches the larger root.
    let p = boundary_project(&ctx, ctx.u_left(), &state(&[1.0]), ProjectionMode::Ray).unwrap();
    assert!((p[0] - hi).abs() < 1e-12);
    let p = boundary_project(&ctx, ctx.u_left(), &state(&[-1.0]), ProjectionMode::Ray).unwrap();
    assert!((p[0] - lo).abs() < 1e-12);
    let on = state(&[hi]);
    assert_eq!(boundary_project(&ctx, &on, &state(&[1.0]), ProjectionMode::Ray).unwrap(), on);
    let outside = state(&[1.8]);
    assert!(matches!(boundary_project(&ctx, &outside, &state(&[1.0]), ProjectionMode::Ray), Err(Error::NotFound(_))));
    assert_eq!(normal(&ctx, &state(&[hi])).unwrap()[0], 1.0);
    assert_eq!(normal(&ctx, &state(&[lo])).unwrap()[0], -1.0);
}

#[test]
fn gradient_and_hessian_of_tilde_eta() {
    let ctx = isentropic_ctx(1.4, 1e-2, 100.0);
    let sys = ctx.system().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sampler = PiSampler::new(&ctx, 64, &mut rng).unwrap();
    let cs0 = 100.0 * 1e-2;
    for _ in 0..100 {
        let u = sampler.random_boundary(&mut rng).unwrap().point;
        let g = ctx.grad_tilde_eta(u.as_slice());
        let n = fd_gradient(|v| ctx.tilde_eta_slice(v), u.as_slice());
        assert!((&g - &n).norm() / g.norm() < 1e-6);
        // ∇²η̃ = Cs₀ ∇²η: differentiate the analytic gradient.
        let h = 1e-5;
        for k in 0..2 {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[k] += h;
            dn[k] -= h;
            let col = (ctx.grad_tilde_eta(up.as_slice()) - ctx.grad_tilde_eta(dn.as_slice())) / (2.0 * h);
            let expected = sys.entropy_hessian(u.as_slice()).column(k) * cs0;
            assert!((&col - &expected).norm() < 1e-6 * expected.norm());
        }
    }
}

#[test]
fn pi_geometry_in_one_dimension_and_scaling() {
    let ctx = burgers_ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = pi_diagnostics(&ctx, 100, &mut rng).unwrap();
    let (lo, hi) = b_roots();
    assert!((d.diameter - (hi - lo)).abs() < 1e-12);
    assert!(d.min_grad_over_s0 > 0.0);

    let diam = |c: f64| {
        let ctx = isentropic_ctx(1.4, 1e-2, c);
        pi_diagnostics(&ctx, 300, &mut ChaCha8Rng::seed_from_u64(4)).unwrap().diameter
    };
    let ratio = diam(100.0) / diam(200.0);
    assert!((1.5..=2.5).contains(&ratio), "diameter ratio {ratio}");
}

#[test]
fn cstar_matches_a_dense_scan_for_burgers() {
    let ctx = burgers_ctx();
    let bx = ctx.system().working_box().clone();
    let scan = (0..=100_000)
        .map(|k| bx.lo[0] + (bx.hi[0] - bx.lo[0]) * k as f64 / 100_000.0)
        .filter(|&u| b_tilde(u) > 0.0 && b_tilde_q(u) <= 0.0)
        .map(|u| -b_tilde_q(u) / b_tilde(u))
        .fold(0.0, f64::max);
    let est = estimate_cstar(&ctx, 20_000, &mut ChaCha8Rng::seed_from_u64(8));
    assert!(!est.empty);
    assert!(est.raw_max <= scan * (1.0 + 1e-9) + 1e-12, "{} > {scan}", est.raw_max);
    assert!(est.raw_max >= 0.99 * scan, "{} vs {scan}", est.raw_max);
    assert_eq!(est.value, 2.0 * est.raw_max);
}

#[test]
fn cstar_is_monotone_in_nested_samples() {
    let ctx = isentropic_ctx(1.4, 1e-2, 100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sys = ctx.system().clone();
    let samples: Vec<_> = (0..4000).map(|_| sample_state(sys.as_ref(), sys.working_box(), &mut rng)).collect();
    let mut last = 0.0;
    for n in [100, 500, 1000, 4000] {
        let e = estimate_cstar_from(&ctx, samples[..n].iter());
        assert!(e.raw_max >= last);
        last = e.raw_max;
    }
    // States with q̃ > 0 never contribute.
    let positive: Vec<_> = samples.into_iter().filter(|u| ctx.tilde_pair_slice(u.as_slice()).1 > 0.0).collect();
    assert_eq!(estimate_cstar_from(&ctx, positive.iter()).contributing, 0);
}

#[test]
fn diagnostics_survive_an_unbounded_pi() {
    let ctx = burgers_ctx().with_weight_ratio(0.9).unwrap();
    for seed in 0..8 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match pi_diagnostics(&ctx, 100, &mut rng) {
            Ok(d) => assert!(d.boundary_samples <= 1),
            Err(e) => assert!(matches!(e, Error::NotFound(_)), "{e}"),
        }
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn relative_entropy_is_nonnegative(r1 in 0.2f64..3.0, m1 in -2.0f64..2.0, r2 in 0.2f64..3.0, m2 in -2.0f64..2.0) {
            let e = isentropic(1.4);
            let v = rel_entropy(e.as_ref(), &state(&[r1, m1]), &state(&[r2, m2])).unwrap();
            prop_assert!(v >= -1e-13);
        }

        #[test]
        fn burgers_matches_closed_form(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let s = burgers();
            let v = rel_entropy(s.as_ref(), &state(&[a]), &state(&[b])).unwrap();
            let q = rel_entropy_flux(s.as_ref(), &state(&[a]), &state(&[b])).unwrap();
            prop_assert!((v - b_rel(a, b)).abs() <= 1e-12 * (1.0 + v.abs()));
            prop_assert!((q - b_relq(a, b)).abs() <= 1e-11 * (1.0 + q.abs()));
        }
    }
}
