use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bergman_ffi::*;

fn domain(json: &str) -> *mut BgDomain {
    let s = CString::new(json).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { bg_domain_from_json(s.as_ptr(), &mut d) }, BgStatus::Ok);
    assert!(!d.is_null());
    d
}

fn c(re: f64, im: f64) -> BgComplex {
    BgComplex { re, im }
}

fn last_error() -> String {
    let p = bg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn disc_closed_forms() {
    let d = domain(r#"{"type":"disc","center":[0,0],"radius":1}"#);
    unsafe {
        assert_eq!(bg_domain_dim(d), 1);
        let z = [c(0.5, 0.0)];
        let x = [c(1.0, 0.0)];
        let mut k = 0.0;
        assert_eq!(bg_kernel_closed(d, z.as_ptr(), 1, &mut k), BgStatus::Ok);
        // 1 / (pi (1 - r^2)^2)
        let want = 1.0 / (std::f64::consts::PI * 0.75f64.powi(2));
        assert!((k - want).abs() < 1e-14 * want);

        let mut m = BgMetric::default();
        assert_eq!(bg_metric_closed(d, z.as_ptr(), x.as_ptr(), 1, &mut m), BgStatus::Ok);
        assert!((m.b - 2f64.sqrt() / 0.75).abs() < 1e-13);
        assert_eq!(m.degree, -1);

        let mut dist = 0.0;
        assert_eq!(bg_domain_boundary_distance(d, z.as_ptr(), 1, &mut dist), BgStatus::Ok);
        assert!((dist - 0.5).abs() < 1e-15);
        let mut r = 0.0;
        assert_eq!(
            bg_domain_directional_radius(d, z.as_ptr(), x.as_ptr(), 1, &mut r),
            BgStatus::Ok
        );
        assert!((r - 0.5).abs() < 1e-12);
        bg_domain_free(d);
    }
}

#[test]
fn estimator_matches_closed_form() {
    let d = domain(r#"{"type":"polydisc","centers":[[0,0],[0,0]],"radii":[1,1]}"#);
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(bg_estimator_new(d, BgBackend::Numeric, 10, 0, 0, &mut e), BgStatus::Ok);
        // the estimator owns its own copy
        bg_domain_free(d);
        let z = [c(0.2, 0.1), c(-0.1, 0.0)];
        let x = [c(1.0, 0.0), c(0.0, 1.0)];
        let mut m = BgMetric::default();
        assert_eq!(bg_estimator_metric(e, z.as_ptr(), x.as_ptr(), 2, &mut m), BgStatus::Ok);
        assert_eq!(m.degree, 10);
        assert_eq!(m.converged, 1);
        // B^2 adds over factors: 2 |X_j|^2 / (1 - |z_j|^2)^2
        let b2: f64 = [0.05f64, 0.01].iter().map(|s| 2.0 / (1.0 - s).powi(2)).sum();
        assert!((m.b - b2.sqrt()).abs() < 1e-6 * b2.sqrt(), "{m:?}");
        bg_estimator_free(e);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut d = ptr::null_mut();
        let bad = CString::new(r#"{"type":"disc","center":[0,0],"radius":-1}"#).unwrap();
        assert_eq!(bg_domain_from_json(bad.as_ptr(), &mut d), BgStatus::InvalidDomain);
        assert!(d.is_null());
        assert!(last_error().contains("invalid domain"));

        assert_eq!(bg_domain_from_json(ptr::null(), &mut d), BgStatus::NullPointer);

        let d = domain(r#"{"type":"disc","center":[0,0],"radius":1}"#);
        let mut k = 0.0;
        let outside = [c(2.0, 0.0)];
        assert_eq!(bg_kernel_closed(d, outside.as_ptr(), 1, &mut k), BgStatus::NotInterior);
        let two = [c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(bg_kernel_closed(d, two.as_ptr(), 2, &mut k), BgStatus::InvalidArgument);
        assert_eq!(bg_kernel_closed(d, ptr::null(), 1, &mut k), BgStatus::NullPointer);
        let z = [c(0.0, 0.0)];
        let zero = [c(0.0, 0.0)];
        let mut r = 0.0;
        assert_eq!(
            bg_domain_directional_radius(d, z.as_ptr(), zero.as_ptr(), 1, &mut r),
            BgStatus::InvalidArgument
        );
        assert_eq!(bg_domain_dim(ptr::null()), 0);
        bg_domain_free(d);
        bg_domain_free(ptr::null_mut());
        bg_estimator_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(bg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/bergman.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct BgDomain BgDomain;",
        "typedef struct BgEstimator BgEstimator;",
        "BG_STATUS_OK = 0",
        "BG_STATUS_PANIC = 7",
        "bg_last_error_message",
        "bg_version",
        "bg_domain_from_json",
        "bg_domain_free",
        "bg_domain_dim",
        "bg_domain_boundary_distance",
        "bg_domain_directional_radius",
        "bg_kernel_closed",
        "bg_metric_closed",
        "bg_estimator_new",
        "bg_estimator_metric",
        "bg_estimator_free",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let out = Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(header())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<String, ()> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().map(|_| cc).map_err(|_| ())
}
