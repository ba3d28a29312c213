mod common;

use acontract::systems::*;
use acontract::Error;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn burgers_flux_jacobian_and_entropy() {
    let sys = burgers();
    assert_eq!(flux(sys.as_ref(), &state(&[2.0])).unwrap()[0], 2.0);
    assert_eq!(flux_jacobian(sys.as_ref(), &state(&[3.0])).unwrap()[(0, 0)], 3.0);
    let (eta, q) = entropy_pair(sys.as_ref(), &state(&[2.0])).unwrap();
    assert_eq!(eta, 4.0);
    assert!((q - 16.0 / 3.0).abs() < 1e-14);
    let basis = eigenstructure(sys.as_ref(), &state(&[5.0])).unwrap();
    assert_eq!(basis.lambda, vec![5.0]);
    assert_eq!(basis.right[0][0].abs(), 1.0);
    assert!(basis.left[0].dot(&basis.right[0]) > 0.0);
}

#[test]
fn isentropic_gamma_two_by_hand() {
    let sys = isentropic(2.0);
    let u = state(&[1.0, 0.0]);
    assert_eq!(flux(sys.as_ref(), &u).unwrap().as_slice(), &[0.0, 1.0]);
    let jac = flux_jacobian(sys.as_ref(), &u).unwrap();
    let expected = [[0.0, 1.0], [2.0, 0.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((jac[(i, j)] - expected[i][j]).abs() < 1e-14);
        }
    }
    let lam = eigenstructure(sys.as_ref(), &u).unwrap().lambda;
    assert!((lam[0] + 2f64.sqrt()).abs() < 1e-14 && (lam[1] - 2f64.sqrt()).abs() < 1e-14);
    let numeric = numeric_eigenvalues(&fd_jacobian(sys.as_ref(), &u));
    assert!((numeric[0] - lam[0]).abs() < 1e-6 && (numeric[1] - lam[1]).abs() < 1e-6);
    // η = m²/(2ρ) + ρ² and q = m³/(2ρ²) + 2ρm, from symbolic integration of q' = η'f'.
    let (eta, q) = entropy_pair(sys.as_ref(), &state(&[1.0, 1.0])).unwrap();
    assert!((eta - 1.5).abs() < 1e-14);
    assert!((q - 2.5).abs() < 1e-14);
}

#[test]
fn full_euler_reference_state() {
    let sys = full_euler(1.4);
    let u = state(&[1.0, 0.0, 2.5]);
    let lam = eigenstructure(sys.as_ref(), &u).unwrap().lambda;
    assert!((lam[0] + 1.4f64.sqrt()).abs() < 1e-12);
    assert!((lam[0] + 1.1832).abs() < 1e-4);
    let (eta, q) = entropy_pair(sys.as_ref(), &u).unwrap();
    assert!((eta + 2.5f64.ln()).abs() < 1e-14);
    assert!((eta + 0.916290731874155).abs() < 1e-12);
    assert!(q.abs() < 1e-14);
}

#[test]
fn inadmissible_states_are_domain_errors() {
    for sys in [isentropic(1.4), full_euler(1.4)] {
        let mut u = vec![0.0; sys.dim()];
        u[sys.dim() - 1] = 1.0;
        assert!(matches!(flux(sys.as_ref(), &state(&u)), Err(Error::Domain(_))));
        assert!(matches!(entropy_pair(sys.as_ref(), &state(&u)), Err(Error::Domain(_))));
    }
}

#[test]
fn analytic_and_finite_difference_jacobians_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for sys in [burgers(), isentropic(1.4), isentropic(3.0), full_euler(1.4)] {
        for _ in 0..100 {
            let u = sample_state(sys.as_ref(), &sys.working_box().shrink(0.1), &mut rng);
            let a = flux_jacobian(sys.as_ref(), &u).unwrap();
            let n = fd_jacobian(sys.as_ref(), &u);
            let err = (&a - &n).norm() / a.norm().max(1e-300);
            assert!(err < 1e-6, "{}: {err:e} at {:?}", sys.name(), u.as_slice());
        }
    }
}

#[test]
fn entropy_compatibility_holds_at_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for sys in [burgers(), isentropic(1.4), isentropic(2.0), isentropic(3.0), full_euler(1.4)] {
        let worst = (0..1000)
            .map(|_| compatibility_residual(sys.as_ref(), &sample_state(sys.as_ref(), sys.working_box(), &mut rng)))
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{}: {worst:e}", sys.name());
    }
}

#[test]
fn mirror_flips_flux_and_reverses_eigenvalues() {
    let sys = burgers();
    let m = mirror_system(&sys);
    assert_eq!(flux(m.as_ref(), &state(&[2.0])).unwrap()[0], -2.0);
    let mm = mirror_system(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let e = isentropic(1.4);
    let ee = mirror_system(&mirror_system(&e));
    for _ in 0..20 {
        let u = sample_state(e.as_ref(), e.working_box(), &mut rng);
        assert_eq!(flux(e.as_ref(), &u).unwrap(), flux(ee.as_ref(), &u).unwrap());
    }
    assert_eq!(flux(mm.as_ref(), &state(&[0.7])).unwrap()[0], flux(sys.as_ref(), &state(&[0.7])).unwrap()[0]);
    let e2 = isentropic(2.0);
    let lam = mirror_system(&e2).lambda_first(&[1.0, 0.0]);
    assert!((lam + 2f64.sqrt()).abs() < 1e-14);
    assert!((lam + e2.lambda_last(&[1.0, 0.0])).abs() < 1e-14);
}

#[test]
fn audit_passes_for_genuinely_nonlinear_systems() {
    let bx = WorkingBox::new(vec![-1.0], vec![1.0]);
    let r = verify_assumptions(&burgers(), &bx, 1000, &AuditThresholds::default());
    assert!(r.passed, "{:?}", r.failures);
    let e = isentropic(1.4);
    let r = verify_assumptions(&e, e.working_box(), 2000, &AuditThresholds::default());
    assert!(r.passed, "{:?}", r.failures);
    for c in &r.checks {
        assert!(c.margin.is_none_or(|m| m > 0.0), "{} margin {:?}", c.id, c.margin);
    }
}

#[test]
fn audit_flags_linear_degeneracy() {
    let sys = SystemSpec::Linear { matrix: vec![vec![1.0, 0.0], vec![0.0, 2.0]], working_box: None }.build().unwrap();
    let r = verify_assumptions(&sys, sys.working_box(), 500, &AuditThresholds::default());
    assert!(!r.passed);
    assert!(!r.check("b").unwrap().passed);
}

#[test]
fn system_specs_reject_bad_parameters() {
    assert!(SystemSpec::IsentropicEuler { gamma: 1.0, working_box: None }.build().is_err());
    let bad_box = WorkingBox::new(vec![-0.5, -1.0], vec![1.0, 1.0]);
    assert!(SystemSpec::IsentropicEuler { gamma: 1.4, working_box: Some(bad_box) }.build().is_err());
    let json = r#"{"kind":"full_euler","gamma":1.4,"extra":1}"#;
    assert!(serde_json::from_str::<SystemSpec>(json).is_err());
}
