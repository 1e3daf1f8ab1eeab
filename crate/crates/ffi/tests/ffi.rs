use std::ffi::{CStr, CString};
use std::ptr;

use ccmax_ffi::*;

const FOUR_CYCLE: &str = "ccmax v1\nproblem cut\nvars 4\ncard 2\nc 1 2 1 x-\nc 2 3 1 x-\nc 3 4 1 x-\nc 4 1 1 x-\n";

fn last_error() -> String {
    unsafe { CStr::from_ptr(ccmax_last_error_message()) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut CcmaxInstance {
    let c = CString::new(text).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { ccmax_instance_parse(c.as_ptr(), &mut inst) }, CcmaxStatus::Ok);
    assert!(!inst.is_null());
    inst
}

#[test]
fn gamma_matches_closed_form_at_zero_correlation() {
    let mut v = f64::NAN;
    assert_eq!(unsafe { ccmax_gamma(0.0, 0.3, 0.7, &mut v) }, CcmaxStatus::Ok);
    assert!((v - 0.21).abs() < 1e-12);
    assert_eq!(last_error(), "");
}

#[test]
fn domain_errors_set_status_and_message() {
    let mut v = 0.0;
    assert_eq!(unsafe { ccmax_gamma(1.5, 0.3, 0.3, &mut v) }, CcmaxStatus::Domain);
    assert!(last_error().contains("rho"), "{}", last_error());
    assert_eq!(unsafe { ccmax_alpha_2sat(0.6, &mut v) }, CcmaxStatus::Domain);
}

#[test]
fn null_out_pointer_is_reported() {
    assert_eq!(unsafe { ccmax_gamma(0.0, 0.5, 0.5, ptr::null_mut()) }, CcmaxStatus::NullPointer);
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { ccmax_instance_parse(ptr::null(), &mut inst) }, CcmaxStatus::NullPointer);
}

#[test]
fn curve_values_agree_with_library() {
    let (mut a, mut b, mut v, mut r) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(ccmax_alpha_cut(0.4, &mut a), CcmaxStatus::Ok);
        assert_eq!(ccmax_beta(CcmaxCurve::Cut, 0.4, -0.4 / 0.6, &mut b), CcmaxStatus::Ok);
        assert_eq!(ccmax_hardness(CcmaxCurve::Cut, 0.5, &mut v, &mut r), CcmaxStatus::Ok);
        assert_eq!(ccmax_beta(CcmaxCurve::TwoSat, 0.4, -0.5, &mut b), CcmaxStatus::Invalid);
    }
    assert!((a - 0.860599).abs() < 1e-5);
    assert!((v - 0.878567).abs() < 1e-5);
    assert!((r + 0.68916).abs() < 1e-3);
}

#[test]
fn parse_errors_report_line() {
    let c = CString::new("ccmax v1\nproblem cut\nvars 2\ncard 9\n").unwrap();
    let mut inst = ptr::null_mut();
    let st = unsafe { ccmax_instance_parse(c.as_ptr(), &mut inst) };
    assert_ne!(st, CcmaxStatus::Ok);
    assert!(inst.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn full_pipeline_on_four_cycle() {
    let inst = parse(FOUR_CYCLE);
    let (mut n, mut k) = (0, 0);
    let mut buf = [0i8; 4];
    let mut opt = 0.0;
    let mut sol = ptr::null_mut();
    let (mut obj, mut res, mut conv) = (0.0, 1.0, false);
    let mut rounded = 0.0;
    let mut again = 0.0;
    unsafe {
        assert_eq!(ccmax_instance_dims(inst, &mut n, &mut k), CcmaxStatus::Ok);
        assert_eq!((n, k), (4, 2));
        assert_eq!(ccmax_instance_brute_force(inst, buf.as_mut_ptr(), 4, &mut opt), CcmaxStatus::Ok);
        assert_eq!(opt, 4.0);
        assert_eq!(buf.iter().filter(|&&s| s == 1).count(), 2);
        assert_eq!(ccmax_instance_evaluate(inst, buf.as_ptr(), 4, &mut again), CcmaxStatus::Ok);
        assert_eq!(again, 4.0);
        assert_eq!(ccmax_instance_brute_force(inst, buf.as_mut_ptr(), 3, &mut opt), CcmaxStatus::BufferTooSmall);

        assert_eq!(ccmax_sdp_solve(inst, 2, 11, &mut sol), CcmaxStatus::Ok);
        assert_eq!(ccmax_sdp_summary(sol, &mut obj, &mut res, &mut conv), CcmaxStatus::Ok);
        assert!((obj - 4.0).abs() < 1e-6 && res < 1e-6 && conv);
        let mut mu = 0.0;
        assert_eq!(ccmax_sdp_mu(sol, 0, &mut mu), CcmaxStatus::Ok);
        assert!(mu.abs() <= 1.0 + 1e-9);
        assert_eq!(ccmax_sdp_mu(sol, 4, &mut mu), CcmaxStatus::Domain);

        assert_eq!(ccmax_round(inst, sol, 50, 3, buf.as_mut_ptr(), 4, &mut rounded), CcmaxStatus::Ok);
        assert_eq!(rounded, 4.0);
        ccmax_sdp_free(sol);
        ccmax_instance_free(inst);
        ccmax_sdp_free(ptr::null_mut());
        ccmax_instance_free(ptr::null_mut());
    }
}

#[test]
fn version_is_cargo_version() {
    let v = unsafe { CStr::from_ptr(ccmax_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ccmax.h")).unwrap();
    for sym in [
        "ccmax_version",
        "ccmax_last_error_message",
        "ccmax_gamma",
        "ccmax_alpha_cut",
        "ccmax_alpha_2sat",
        "ccmax_beta",
        "ccmax_hardness",
        "ccmax_instance_parse",
        "ccmax_instance_free",
        "ccmax_instance_dims",
        "ccmax_instance_evaluate",
        "ccmax_instance_brute_force",
        "ccmax_sdp_solve",
        "ccmax_sdp_free",
        "ccmax_sdp_summary",
        "ccmax_sdp_mu",
        "ccmax_round",
    ] {
        assert!(header.contains(&format!("{sym}(")), "{sym} missing from header");
    }
    assert!(header.contains("typedef struct CcmaxInstance CcmaxInstance;"));
}

/// Compile and run a C program against the generated header and the
/// static library when a C compiler is present.
#[test]
fn c_program_links_against_static_library() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libccmax_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if std::process::Command::new(&cc).arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let out = std::env::temp_dir().join(format!("ccmax_smoke_{}", std::process::id()));
    let status = std::process::Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = std::process::Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "C smoke program exited with {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
