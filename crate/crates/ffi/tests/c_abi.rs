use std::ffi::{CStr, CString};
use std::ptr;

use gauss_semigroup_ffi::*;

fn last_error() -> String {
    let p = gs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn hermite_and_density() {
    let mut v = 0.0;
    let st = unsafe { gs_hermite_eval([2u32].as_ptr(), [0.5].as_ptr(), 1, &mut v) };
    assert_eq!(st, GsStatus::Ok);
    // h_2 = (4x^2 - 2) / sqrt(8)
    assert!((v - (4.0 * 0.25 - 2.0) / 8f64.sqrt()).abs() < 1e-15);
    let g = unsafe { gs_gaussian_density([0.0, 0.0].as_ptr(), 2) };
    assert!((g - 1.0 / std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn series_routes_agree() {
    let cfg = gs_config_new();
    let mut f = ptr::null_mut();
    let betas = [1u32, 0, 2, 1];
    let coeffs = [0.5, -1.5];
    unsafe {
        assert_eq!(gs_function_series(2, betas.as_ptr(), coeffs.as_ptr(), 2, &mut f), GsStatus::Ok);
        let x = [0.3, -1.2];
        let mut spec = 0.0;
        let mut kern = 0.0;
        assert_eq!(gs_ou_apply(f, cfg, x.as_ptr(), 2, 0.7, GsOuRoute::Spectral as i32, &mut spec), GsStatus::Ok);
        assert_eq!(gs_ou_apply(f, cfg, x.as_ptr(), 2, 0.7, GsOuRoute::Kernel as i32, &mut kern), GsStatus::Ok);
        assert!((spec - kern).abs() < 1e-10);
        let mut p_spec = 0.0;
        let mut p_sub = 0.0;
        assert_eq!(
            gs_poisson_apply(f, cfg, x.as_ptr(), 2, 0.7, GsPoissonRoute::Spectral as i32, &mut p_spec),
            GsStatus::Ok
        );
        assert_eq!(
            gs_poisson_apply(f, cfg, x.as_ptr(), 2, 0.7, GsPoissonRoute::Subordination as i32, &mut p_sub),
            GsStatus::Ok
        );
        assert!((p_spec - p_sub).abs() < 1e-8);
        gs_function_free(f);
        gs_config_free(cfg);
    }
}

#[test]
fn catalog_handles() {
    let cfg = gs_config_new();
    let name = CString::new("ball-indicator").unwrap();
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(gs_function_catalog(1, name.as_ptr(), cfg, &mut f), GsStatus::Ok);
        let mut v = 0.0;
        assert_eq!(gs_function_eval(f, [1.0].as_ptr(), 1, &mut v), GsStatus::Ok);
        assert_eq!(v, 1.0);
        // spectral needs a series
        assert_eq!(
            gs_ou_apply(f, cfg, [0.0].as_ptr(), 1, 1.0, GsOuRoute::Spectral as i32, &mut v),
            GsStatus::InvalidArgument
        );
        gs_function_free(f);
        let missing = CString::new("nope").unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(gs_function_catalog(1, missing.as_ptr(), cfg, &mut g), GsStatus::Config);
        assert!(g.is_null());
        assert!(last_error().contains("nope"));
        gs_config_free(cfg);
    }
}

#[test]
fn error_codes() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(gs_hermite_eval(ptr::null(), [0.0].as_ptr(), 1, &mut v), GsStatus::NullPointer);
        assert!(last_error().contains("beta"));
        let cfg = gs_config_new();
        assert_eq!(gs_config_set_gh_nodes(cfg, 0), GsStatus::Config);
        let mut f = ptr::null_mut();
        gs_function_series(1, [1u32].as_ptr(), [1.0].as_ptr(), 1, &mut f);
        assert_eq!(gs_ou_apply(f, cfg, [0.0].as_ptr(), 1, 1.0, 9, &mut v), GsStatus::InvalidArgument);
        assert_eq!(gs_ou_apply(f, cfg, [0.0].as_ptr(), 1, -1.0, 1, &mut v), GsStatus::InvalidArgument);
        gs_function_free(f);
        gs_config_free(cfg);
        gs_config_free(ptr::null_mut());
    }
    let version = unsafe { CStr::from_ptr(gs_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn cones() {
    let mut inside = false;
    unsafe {
        let st = gs_cone_contains(
            GsConeKind::TruncatedParabolic as i32,
            [0.0].as_ptr(),
            [0.1].as_ptr(),
            1,
            0.04,
            &mut inside,
        );
        assert_eq!(st, GsStatus::Ok);
        assert!(inside);
        assert_eq!(gs_cone_contains(7, [0.0].as_ptr(), [0.1].as_ptr(), 1, 0.04, &mut inside), GsStatus::InvalidArgument);
    }
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gauss_semigroup.h")).unwrap();
    for sym in ["gs_ou_apply", "gs_poisson_apply", "typedef struct GsFunction GsFunction", "GS_STATUS_NULL_POINTER"] {
        assert!(h.contains(sym), "{sym}");
    }
}
