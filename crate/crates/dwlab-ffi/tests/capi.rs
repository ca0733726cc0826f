//! Exercise the C ABI the way a foreign caller would: raw pointers, status
//! codes, and the last-error channel.

use std::ffi::CString;
use std::ptr;

use dwlab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let len = unsafe { dw_last_error(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(len.min(buf.len() - 1));
    String::from_utf8(buf).unwrap()
}

#[test]
fn params_roundtrip_and_rejection() {
    let mut params = unsafe { std::mem::zeroed::<DwParams>() };
    let status = unsafe { dw_params_derive(1, 2.0, f64::NAN, &mut params) };
    assert_eq!(status, DwStatus::DwOk);
    assert_eq!(params.alpha, 2.0);
    assert!((params.l_alpha_decay + 1.25).abs() < 1e-12);
    assert!((params.hs_decay + 0.25 + 1.0 + 0.5 * params.s).abs() < 1e-12);

    let status = unsafe { dw_params_derive(2, 0.9, f64::NAN, &mut params) };
    assert_eq!(status, DwStatus::DwInadmissible);
    assert!(last_error().contains("p > max{1, n/2}"));

    let status = unsafe { dw_params_derive(1, 2.0, f64::NAN, ptr::null_mut()) };
    assert_eq!(status, DwStatus::DwNullPointer);
}

#[test]
fn kernel_eval_matches_zero_frequency_closed_form() {
    let mut kv = unsafe { std::mem::zeroed::<DwKernelValues>() };
    let status = unsafe { dw_kernel_eval(1.0, 0.0, &mut kv) };
    assert_eq!(status, DwStatus::DwOk);
    assert!((kv.k - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
    assert!((kv.k_dt - (-1.0f64).exp()).abs() < 1e-14);

    let status = unsafe { dw_kernel_eval(-1.0, 0.0, &mut kv) };
    assert_eq!(status, DwStatus::DwInvalid);
    assert!(last_error().contains("t >= 0"));
}

#[test]
fn grid_lifecycle_and_validation() {
    let mut grid: *mut DwGrid = ptr::null_mut();
    let status = unsafe { dw_grid_new(1, 100, 10.0, &mut grid) };
    assert_eq!(status, DwStatus::DwInvalid); // not a power of two
    let status = unsafe { dw_grid_new(1, 128, 10.0, &mut grid) };
    assert_eq!(status, DwStatus::DwOk);
    unsafe { dw_grid_free(grid) };
    unsafe { dw_grid_free(ptr::null_mut()) }; // tolerated
}

#[test]
fn solve_and_fit_through_the_boundary() {
    let mut grid: *mut DwGrid = ptr::null_mut();
    assert_eq!(unsafe { dw_grid_new(1, 1024, 40.0, &mut grid) }, DwStatus::DwOk);
    let kind = CString::new("gaussian").unwrap();
    let mut traj: *mut DwTrajectory = ptr::null_mut();
    let status = unsafe {
        dw_solve(grid, 2.0, 0.01, kind.as_ptr(), 1.0, 20.0, 0.25, 20, &mut traj)
    };
    assert_eq!(status, DwStatus::DwOk, "{}", last_error());
    let len = unsafe { dw_trajectory_len(traj) };
    assert!(len > 10);
    let mut ts = Vec::with_capacity(len);
    let mut l2 = Vec::with_capacity(len);
    for i in 0..len {
        let mut s = unsafe { std::mem::zeroed::<DwSample>() };
        assert_eq!(unsafe { dw_trajectory_sample(traj, i, &mut s) }, DwStatus::DwOk);
        ts.push(s.t);
        l2.push(s.l2_v);
    }
    let mut s = unsafe { std::mem::zeroed::<DwSample>() };
    assert_eq!(
        unsafe { dw_trajectory_sample(traj, len, &mut s) },
        DwStatus::DwInvalid
    );

    let mut fit = unsafe { std::mem::zeroed::<DwDecayFit>() };
    let status = unsafe {
        dw_fit_decay(ts.as_ptr(), l2.as_ptr(), len, 1.0, 20.0, -1.25, &mut fit)
    };
    assert_eq!(status, DwStatus::DwOk, "{}", last_error());
    assert!(fit.slope < 0.0);
    assert_eq!(fit.deviation, fit.slope - fit.theoretical);

    unsafe { dw_trajectory_free(traj) };
    unsafe { dw_grid_free(grid) };

    // unknown initial kind is a named validation failure
    let bad = CString::new("sawtooth").unwrap();
    let mut grid2: *mut DwGrid = ptr::null_mut();
    assert_eq!(unsafe { dw_grid_new(1, 256, 20.0, &mut grid2) }, DwStatus::DwOk);
    let status = unsafe {
        dw_solve(grid2, 2.0, 0.01, bad.as_ptr(), 1.0, 5.0, 0.25, 10, &mut traj)
    };
    assert_eq!(status, DwStatus::DwInvalid);
    assert!(last_error().contains("sawtooth"));
    unsafe { dw_grid_free(grid2) };
}

#[test]
fn header_is_generated() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("dwlab.h");
    let text = std::fs::read_to_string(header).unwrap();
    for symbol in [
        "dw_params_derive",
        "dw_kernel_eval",
        "dw_grid_new",
        "dw_grid_free",
        "dw_solve",
        "dw_trajectory_len",
        "dw_trajectory_sample",
        "dw_trajectory_free",
        "dw_fit_decay",
        "dw_last_error",
        "DwStatus",
    ] {
        assert!(text.contains(symbol), "header missing {symbol}");
    }
}
