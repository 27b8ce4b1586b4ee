use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use lerayflow_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(lf_last_error()) }.to_string_lossy().into_owned()
}

fn solver(json: &str) -> *mut LfSolver {
    let cfg = CString::new(json).unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { lf_solver_new(cfg.as_ptr(), &mut s) };
    assert_eq!(st, LfStatus::Ok, "{}", last_error());
    assert!(!s.is_null());
    s
}

#[test]
fn taylor_green_decays_through_the_c_interface() {
    let s = solver(r#"{"basis_radius": 2, "nu": 0.1}"#);
    unsafe {
        let mut n = 0usize;
        assert_eq!(lf_solver_dim(s, &mut n), LfStatus::Ok);
        assert!(n > 0);
        let (mut l0, mut e0) = (0.0, 0.0);
        assert_eq!(lf_solver_norms(s, &mut l0, &mut e0), LfStatus::Ok);
        assert_eq!(lf_solver_advance(s, 1.0), LfStatus::Ok);
        let mut t = 0.0;
        assert_eq!(lf_solver_time(s, &mut t), LfStatus::Ok);
        assert_eq!(t, 1.0);
        let (mut l1, mut e1) = (0.0, 0.0);
        assert_eq!(lf_solver_norms(s, &mut l1, &mut e1), LfStatus::Ok);
        assert!(((l1 / l0) - (-0.2f64).exp()).abs() < 1e-8);
        assert!(((e1 / e0) - (-0.4f64).exp()).abs() < 1e-8);

        // u = e^{-0.2} (sin x cos y, -cos x sin y, 0) at (π/2, 0, 0).
        let x = [std::f64::consts::FRAC_PI_2, 0.0, 0.0];
        let mut v = [0.0; 3];
        assert_eq!(lf_solver_evaluate(s, x.as_ptr(), v.as_mut_ptr()), LfStatus::Ok);
        assert!((v[0] - (-0.2f64).exp()).abs() < 1e-8, "{v:?}");
        assert!(v[1].abs() < 1e-12 && v[2].abs() < 1e-12);
        lf_solver_free(s);
    }
}

#[test]
fn coefficient_buffer_protocol() {
    let s = solver(r#"{"basis_radius": 1, "data": {"preset": "single-mode"}}"#);
    unsafe {
        let mut needed = 0usize;
        let st = lf_solver_coefficients(s, ptr::null_mut(), 0, &mut needed);
        assert_eq!(st, LfStatus::BufferTooSmall);
        assert!(needed > 0);
        let mut buf = vec![0.0; needed];
        assert_eq!(lf_solver_coefficients(s, buf.as_mut_ptr(), buf.len(), ptr::null_mut()), LfStatus::Ok);
        assert!(buf.iter().any(|&x| x != 0.0));
        lf_solver_free(s);
    }
}

#[test]
fn errors_are_codes_with_messages() {
    unsafe {
        let mut s = ptr::null_mut();
        let bad = CString::new(r#"{"nu": -1}"#).unwrap();
        assert_eq!(lf_solver_new(bad.as_ptr(), &mut s), LfStatus::Config);
        assert!(s.is_null());
        assert!(last_error().contains("nu"), "{}", last_error());

        let unknown = CString::new(r#"{"viscosity": 1}"#).unwrap();
        assert_eq!(lf_solver_new(unknown.as_ptr(), &mut s), LfStatus::Config);
        assert_eq!(lf_solver_new(ptr::null(), &mut s), LfStatus::NullArgument);
        assert_eq!(lf_solver_dim(ptr::null(), ptr::null_mut()), LfStatus::NullArgument);

        let s = solver("{}");
        assert_eq!(lf_solver_advance(s, 0.0), LfStatus::InvalidArgument);
        lf_solver_free(s);
        lf_solver_free(ptr::null_mut());
        lf_string_free(ptr::null_mut());
    }
}

#[test]
fn blow_up_threshold_is_terminal() {
    let s = solver(r#"{"data": {"preset": "stress-large"}, "blowup_threshold": 1.0}"#);
    unsafe {
        assert_eq!(lf_solver_advance(s, 0.5), LfStatus::Terminal);
        let mut t = 1.0;
        lf_solver_time(s, &mut t);
        assert!(t < 0.5);
        lf_solver_free(s);
    }
}

#[test]
fn verify_report_round_trips() {
    let cfg = CString::new(r#"{"basis_radius": 2, "verify": {"gn_samples": 10, "oracle_modes": 4}}"#).unwrap();
    unsafe {
        let mut rep = ptr::null_mut();
        let mut pass = -1;
        assert_eq!(lf_verify(cfg.as_ptr(), &mut rep, &mut pass), LfStatus::Ok, "{}", last_error());
        let js = CStr::from_ptr(rep).to_str().unwrap().to_owned();
        lf_string_free(rep);
        let v: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(pass, 1, "{js}");
        assert_eq!(v["checks"].as_array().unwrap().len(), 9);
    }
    assert_eq!(lf_format_version(), lerayflow::FORMAT_VERSION);
}

#[test]
fn header_is_valid_c() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/lerayflow.h");
    let text = std::fs::read_to_string(&header).expect("header generated by the build script");
    for f in ["lf_solver_new", "lf_solver_free", "lf_last_error", "lf_verify", "LF_STATUS_TERMINAL"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    // Compile a translation unit against the header when a C compiler exists.
    let src = "#include \"lerayflow.h\"\nint main(void) { LfSolver *s = 0; size_t n; \
               return lf_solver_dim(s, &n) == LF_STATUS_NULL_ARGUMENT ? 0 : 1; }\n";
    let tmp = tempfile::tempdir().unwrap();
    let c = tmp.path().join("probe.c");
    std::fs::write(&c, src).unwrap();
    match Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&c)
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler; syntax check skipped"),
    }
}
