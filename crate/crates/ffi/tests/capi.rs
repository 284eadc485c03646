use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use mathieu_floquet_ffi::*;

fn params(m: f64, epsilon: f64) -> *mut MfParams {
    let mut handle = ptr::null_mut();
    let status = unsafe { mf_params_new(m, 1.0, epsilon, 1.0, &mut handle) };
    assert_eq!(status, MfStatus::Ok);
    handle
}

fn last_error() -> String {
    let msg = mf_last_error_message();
    assert!(!msg.is_null());
    unsafe { CStr::from_ptr(msg) }.to_string_lossy().into_owned()
}

#[test]
fn invalid_mass_is_reported() {
    let mut handle = ptr::null_mut();
    let status = unsafe { mf_params_new(-0.1, 1.0, 1.0, 1.0, &mut handle) };
    assert_eq!(status, MfStatus::InvalidParams);
    assert!(handle.is_null());
    assert!(last_error().contains("m > 0"));
}

#[test]
fn null_out_pointer_is_rejected() {
    let status = unsafe { mf_params_new(0.1, 1.0, 1.0, 1.0, ptr::null_mut()) };
    assert_eq!(status, MfStatus::NullPointer);
}

#[test]
fn three_methods_agree() {
    let p = params(0.1, 1.0);
    unsafe {
        assert!(mf_params_wkb_valid(p));
        let mut f = ptr::null_mut();
        assert_eq!(mf_floquet_compute(p, 0.0, false, &mut f), MfStatus::Ok);
        let (mut max, mut min) = (0.0, 0.0);
        assert_eq!(mf_floquet_exponents(f, &mut max, &mut min), MfStatus::Ok);
        let (mut hmax, mut hmin) = (0.0, 0.0);
        assert_eq!(mf_hill_exponents(p, 0.0, &mut hmax, &mut hmin), MfStatus::Ok);
        assert!((max / hmax - 1.0).abs() < 1e-6);
        let (mut wmax, mut wmin) = (0.0, 0.0);
        assert_eq!(mf_wkb_exponents(p, &mut wmax, &mut wmin), MfStatus::Ok);
        assert!((wmax + 0.05).abs() < 1e-15 && (wmin + 10.0).abs() < 1e-12);
        assert!((max + 0.05).abs() < 0.02);

        let mut mono = [0.0; 4];
        assert_eq!(mf_floquet_monodromy(f, mono.as_mut_ptr()), MfStatus::Ok);
        let mut rho = [0.0; 2];
        assert_eq!(mf_floquet_multipliers(f, rho.as_mut_ptr()), MfStatus::Ok);
        assert!(((rho[0] + rho[1]) / (mono[0] + mono[3]) - 1.0).abs() < 1e-12);
        let (mut log_det, mut residual) = (0.0, 0.0);
        assert_eq!(mf_floquet_abel(f, &mut log_det, &mut residual), MfStatus::Ok);
        assert!(residual < 1e-9);
        assert!((log_det + 20.0 * std::f64::consts::PI).abs() < 1e-8);
        mf_floquet_free(f);
        mf_params_free(p);
    }
}

#[test]
fn periodic_part_round_trip() {
    let p = params(0.05, 1.0);
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(mf_floquet_compute(p, 0.0, false, &mut f), MfStatus::Ok);
        let mut part = ptr::null_mut();
        assert_eq!(mf_periodic_part(p, f, MfBranch::Max as u32, 128, false, &mut part), MfStatus::Ok);
        let len = mf_periodic_len(part);
        assert_eq!(len, 128);
        let mut grid = vec![0.0; len];
        let mut values = vec![0.0; len];
        let mut norm = 0.0;
        assert_eq!(
            mf_periodic_copy(part, grid.as_mut_ptr(), values.as_mut_ptr(), len - 1, &mut norm),
            MfStatus::BufferTooSmall
        );
        assert_eq!(mf_periodic_copy(part, grid.as_mut_ptr(), values.as_mut_ptr(), len, &mut norm), MfStatus::Ok);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[len - 1], 2.0 * std::f64::consts::PI);
        assert!((values[0] - (0.25_f64 + 0.05).powf(-0.25)).abs() < 1e-14);
        assert!((values[len - 1] - values[0]).abs() < 1e-6);
        assert!(norm > 0.0);
        assert_eq!(mf_periodic_part(p, f, 7, 128, false, &mut part), MfStatus::InvalidConfig);
        mf_periodic_free(part);
        mf_floquet_free(f);
        mf_params_free(p);
    }
}

#[test]
fn hill_delta0_without_drive() {
    let p = params(0.1, 0.0);
    let (mut delta, mut n) = (0.0, 0usize);
    unsafe {
        assert_eq!(mf_hill_delta0(p, 0.0, &mut delta, &mut n), MfStatus::Ok);
        mf_params_free(p);
    }
    assert_eq!(delta, 1.0);
    assert!(n > 0);
}

#[test]
fn stiffness_guard_surfaces() {
    let p = params(1e-5, 0.0);
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(mf_floquet_compute(p, 0.0, false, &mut f), MfStatus::StiffnessGuard);
        assert!(last_error().contains("stiff"));
        assert_eq!(mf_floquet_compute(p, 0.0, true, &mut f), MfStatus::Ok);
        mf_floquet_free(f);
        mf_params_free(p);
    }
}

#[test]
fn null_handles_are_safe() {
    unsafe {
        mf_params_free(ptr::null_mut());
        mf_floquet_free(ptr::null_mut());
        mf_periodic_free(ptr::null_mut());
        assert!(!mf_params_wkb_valid(ptr::null()));
        assert_eq!(mf_periodic_len(ptr::null()), 0);
        let mut x = 0.0;
        assert_eq!(mf_floquet_exponents(ptr::null(), &mut x, &mut x), MfStatus::NullPointer);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mathieu_floquet.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build script");
    for symbol in ["mf_params_new", "mf_floquet_compute", "mf_periodic_copy", "MF_STATUS_OK", "MF_BRANCH_MIN"] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99"]).arg(&header).status() else {
        eprintln!("no C compiler available; skipping syntax check");
        return;
    };
    assert!(status.success());
}
