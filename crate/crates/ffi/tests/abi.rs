use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use acontract_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe {
        ac_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn system(json: &str) -> *mut AcSystem {
    let text = CString::new(json).unwrap();
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { ac_system_from_json(text.as_ptr(), &mut sys) }, AcStatus::Ok, "{}", last_error());
    sys
}

#[test]
fn isentropic_flux_entropy_and_eigenvalues() {
    let mut sys = ptr::null_mut();
    unsafe {
        assert_eq!(ac_system_new_isentropic_euler(2.0, &mut sys), AcStatus::Ok);
        assert_eq!(ac_system_dim(sys), 2);
        let u = [1.0, 0.0];
        let mut f = [0.0; 2];
        assert_eq!(ac_flux(sys, u.as_ptr(), 2, f.as_mut_ptr()), AcStatus::Ok);
        assert_eq!(f, [0.0, 1.0]);
        let (mut eta, mut q) = (0.0, 0.0);
        assert_eq!(ac_entropy(sys, u.as_ptr(), 2, &mut eta, &mut q), AcStatus::Ok);
        assert!((eta - 1.0).abs() < 1e-15 && q.abs() < 1e-15);
        let mut lam = [0.0; 2];
        assert_eq!(ac_eigenvalues(sys, u.as_ptr(), 2, lam.as_mut_ptr()), AcStatus::Ok);
        // c = sqrt(γ ρ^{γ-1}) = sqrt(2).
        assert!((lam[0] + 2f64.sqrt()).abs() < 1e-14 && (lam[1] - 2f64.sqrt()).abs() < 1e-14);
        let b = [2.0, 0.0];
        let mut rel = 0.0;
        assert_eq!(ac_relative_entropy(sys, u.as_ptr(), b.as_ptr(), 2, &mut rel, ptr::null_mut()), AcStatus::Ok);
        // η = ρ² for γ = 2, so η(1|2) = 1 − 4 − 4·(1 − 2) = 1.
        assert!((rel - 1.0).abs() < 1e-14);
        ac_system_free(sys);
    }
}

#[test]
fn burgers_context_matches_closed_forms() {
    let sys = system(r#"{"kind":"burgers"}"#);
    let mut ctx = ptr::null_mut();
    unsafe {
        let ul = [1.0];
        assert_eq!(
            ac_context_new(sys, ul.as_ptr(), 1, AcFamily::First, 1.0, 0.0, &mut ctx),
            AcStatus::Ok,
            "{}",
            last_error()
        );
        let (mut l, mut r, mut sigma) = ([0.0], [0.0], 0.0);
        assert_eq!(ac_context_shock(ctx, l.as_mut_ptr(), r.as_mut_ptr(), 1, &mut sigma), AcStatus::Ok);
        assert!((r[0] - 0.0).abs() < 1e-12 && (sigma - 0.5).abs() < 1e-12);
        // With η = u² and unit weights η̃(u) = (u − 1)² − u² = 1 − 2u.
        let mut v = 0.0;
        assert_eq!(ac_tilde_eta(ctx, [0.25].as_ptr(), 1, &mut v), AcStatus::Ok);
        assert!((v - 0.5).abs() < 1e-12);
        let mut d = 0.0;
        assert_eq!(ac_d_cont(ctx, [0.5].as_ptr(), 1, &mut d), AcStatus::Ok);
        assert!(d.is_finite());
        assert_eq!(ac_context_set_weight_ratio(ctx, 1.5), AcStatus::Ok);
        assert_eq!(ac_context_set_weight_ratio(ctx, -1.0), AcStatus::Precondition);
        ac_context_free(ctx);
        ac_system_free(sys);
    }
}

#[test]
fn burgers_curve_is_linear() {
    let sys = system(r#"{"kind":"burgers"}"#);
    let mut curve = ptr::null_mut();
    unsafe {
        assert_eq!(ac_curve_trace(sys, [1.0].as_ptr(), 1, AcFamily::First, 0.5, &mut curve), AcStatus::Ok);
        assert!(ac_curve_extent(curve) >= 0.5);
        let (mut u, mut sigma) = ([0.0], 0.0);
        assert_eq!(ac_curve_at(curve, 0.3, u.as_mut_ptr(), 1, &mut sigma), AcStatus::Ok);
        assert!((u[0] - 0.7).abs() < 1e-10 && (sigma - 0.85).abs() < 1e-10);
        assert_eq!(ac_curve_at(curve, 0.9, u.as_mut_ptr(), 1, &mut sigma), AcStatus::Range);
        ac_curve_free(curve);
        ac_system_free(sys);
    }
}

#[test]
fn errors_are_reported_with_messages() {
    unsafe {
        let mut out = [0.0; 2];
        assert_eq!(ac_flux(ptr::null(), [1.0, 0.0].as_ptr(), 2, out.as_mut_ptr()), AcStatus::NullPointer);
        assert!(last_error().contains("sys"));

        let sys = system(r#"{"kind":"isentropic_euler","gamma":1.4}"#);
        assert_eq!(ac_flux(sys, [-1.0, 0.0].as_ptr(), 2, out.as_mut_ptr()), AcStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(ac_flux(sys, [1.0].as_ptr(), 1, out.as_mut_ptr()), AcStatus::InvalidArgument);

        let bad = CString::new(r#"{"kind":"burgers","typo":1}"#).unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(ac_system_from_json(bad.as_ptr(), &mut other), AcStatus::InvalidArgument);
        assert!(other.is_null());
        ac_system_free(sys);
        ac_system_free(ptr::null_mut());
    }
    assert!(unsafe { CStr::from_ptr(ac_version()) }.to_str().unwrap().starts_with("0."));
}

#[test]
fn short_buffers_truncate_the_message() {
    unsafe {
        let mut out = [0.0];
        ac_flux(ptr::null(), out.as_ptr(), 1, out.as_mut_ptr());
        let full = ac_last_error_message(ptr::null_mut(), 0);
        let mut buf = [1 as c_char; 4];
        assert_eq!(ac_last_error_message(buf.as_mut_ptr(), buf.len()), full);
        assert_eq!(buf[3], 0);
    }
}

/// Compiles a C program against the generated header and links it to the static library.
#[test]
fn c_program_links_against_the_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("acontract.h").exists(), "header not generated");
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libacontract_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let out_dir = std::env::temp_dir().join(format!("acontract-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&out_dir).unwrap();
    let src = manifest.join("tests/c/smoke.c");
    let obj = out_dir.join("smoke.o");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-c"])
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg("-o")
        .arg(&obj)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile as C99");
    if !lib.exists() {
        eprintln!("{} not built; header checked only", lib.display());
        return;
    }
    let bin = out_dir.join("smoke");
    let status =
        Command::new("cc").arg(&obj).arg(&lib).args(["-lpthread", "-ldl", "-lm"]).arg("-o").arg(&bin).status().unwrap();
    assert!(status.success(), "link failed");
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = String::from_utf8(run.stdout).unwrap();
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(fields[1].parse::<f64>().unwrap(), 1.0);
    let sys = acontract::systems::SystemSpec::IsentropicEuler { gamma: 2.0, working_box: None }.build().unwrap();
    let ul = acontract::State::from_vec(vec![1.0, 2f64.sqrt()]);
    let ctx = acontract::ShockContext::new(&sys, &ul, acontract::Family::First, 1e-2, 100.0).unwrap();
    let expected = acontract::dissipation::d_cont(&ctx, &ul).unwrap();
    let got = fields[2].parse::<f64>().unwrap();
    assert!(expected < 0.0 && (got - expected).abs() <= 1e-15 * expected.abs(), "{got} vs {expected}");
    assert_eq!(fields[3], (AcStatus::Domain as i32).to_string());
    let _ = std::fs::remove_dir_all(&out_dir);
}
