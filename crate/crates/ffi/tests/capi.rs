use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use asian_boundary_ffi::*;

const PARAMS: AbParams = AbParams {
    r: 0.06,
    q: 0.0,
    sigma: 0.2,
    maturity: 1.0,
};
const ARITH: AbAveraging = AbAveraging {
    method: AB_AVERAGING_ARITHMETIC,
    lambda: 0.0,
};

fn last_error() -> String {
    unsafe { CStr::from_ptr(ab_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    let mut h = 0.0;
    assert_eq!(unsafe { ab_h_star(&mut h) }, AbStatus::Ok);
    assert!((h + 0.638833).abs() < 1e-4);

    let mut g = 0.0;
    assert_eq!(unsafe { ab_expiry_limit(&PARAMS, &ARITH, AB_KIND_CALL, &mut g) }, AbStatus::Ok);
    assert!((g - 1.0 / 1.06).abs() < 1e-15);

    let mut v = 0.0;
    let geom = AbAveraging {
        method: AB_AVERAGING_GEOMETRIC,
        lambda: 0.0,
    };
    assert_eq!(unsafe { ab_european_value(&PARAMS, &geom, AB_KIND_CALL, 0.5, 0.9, &mut v) }, AbStatus::Ok);
    assert!(v > 0.0 && v < 1.0);
}

#[test]
fn invalid_input_reports_status_and_message() {
    let mut g = 0.0;
    let bad = AbParams { sigma: -1.0, ..PARAMS };
    assert_eq!(unsafe { ab_expiry_limit(&bad, &ARITH, AB_KIND_CALL, &mut g) }, AbStatus::InvalidArgument);
    assert!(last_error().contains("sigma"), "{}", last_error());
    assert_eq!(unsafe { ab_expiry_limit(&PARAMS, &ARITH, 7, &mut g) }, AbStatus::InvalidArgument);
    let weird = AbAveraging { method: 9, lambda: 0.0 };
    assert_eq!(unsafe { ab_expiry_limit(&PARAMS, &weird, AB_KIND_CALL, &mut g) }, AbStatus::InvalidArgument);
    assert_eq!(unsafe { ab_expiry_limit(ptr::null(), &ARITH, AB_KIND_CALL, &mut g) }, AbStatus::NullPointer);
    assert_eq!(unsafe { ab_h_star(ptr::null_mut()) }, AbStatus::NullPointer);
    let weighted = AbAveraging {
        method: AB_AVERAGING_WEIGHTED,
        lambda: 0.5,
    };
    let mut v = 0.0;
    assert_eq!(
        unsafe { ab_european_value(&PARAMS, &weighted, AB_KIND_CALL, 0.5, 0.9, &mut v) },
        AbStatus::Unsupported
    );
    // Success clears the message.
    assert_eq!(unsafe { ab_h_star(&mut v) }, AbStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn boundary_handle_lifecycle() {
    let grid = AbGrid {
        n: 50,
        m: 200,
        domain_length: 2.0,
    };
    let mut handle: *mut AbBoundary = ptr::null_mut();
    assert_eq!(unsafe { ab_boundary_solve(&PARAMS, &ARITH, &grid, &mut handle) }, AbStatus::Ok);
    assert!(!handle.is_null());

    let mut len = 0;
    assert_eq!(unsafe { ab_boundary_len(handle, &mut len) }, AbStatus::Ok);
    assert_eq!(len, 201);
    let mut ts = vec![0.0; len];
    let mut xs = vec![0.0; len];
    assert_eq!(
        unsafe { ab_boundary_copy(handle, ts.as_mut_ptr(), xs.as_mut_ptr(), len - 1) },
        AbStatus::BufferTooSmall
    );
    assert_eq!(unsafe { ab_boundary_copy(handle, ts.as_mut_ptr(), xs.as_mut_ptr(), len) }, AbStatus::Ok);
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
    assert!((xs[len - 1] - 1.0 / 1.06).abs() < 1e-15);

    let mut x = 0.0;
    assert_eq!(unsafe { ab_boundary_x_star(handle, ts[10], &mut x) }, AbStatus::Ok);
    assert_eq!(x, xs[10]);
    assert_eq!(unsafe { ab_boundary_x_star(handle, 2.0, &mut x) }, AbStatus::Domain);

    let (mut t_min, mut x_min) = (0.0, 0.0);
    assert_eq!(unsafe { ab_boundary_min(handle, &mut t_min, &mut x_min) }, AbStatus::Ok);
    assert_eq!(x_min, xs.iter().copied().fold(f64::INFINITY, f64::min));

    let mut price = AbPrice::default();
    assert_eq!(
        unsafe { ab_price(handle, &PARAMS, &ARITH, AB_KIND_CALL, 0.5, 0.95, &mut price) },
        AbStatus::Ok
    );
    assert!(price.premium >= 0.0);
    assert!((price.total - price.european - price.premium).abs() < 1e-15);

    unsafe { ab_boundary_free(handle) };
    unsafe { ab_boundary_free(ptr::null_mut()) };
}

fn header() -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/asian_boundary_ffi.h");
    std::fs::read_to_string(path).expect("generated header")
}

#[test]
fn header_declares_the_abi() {
    let h = header();
    for name in [
        "ab_version",
        "ab_last_error",
        "ab_h_star",
        "ab_expiry_limit",
        "ab_european_value",
        "ab_boundary_solve",
        "ab_boundary_free",
        "ab_boundary_len",
        "ab_boundary_copy",
        "ab_boundary_x_star",
        "ab_boundary_min",
        "ab_price",
        "typedef struct AbBoundary AbBoundary;",
        "AB_STATUS_BUFFER_TOO_SMALL = 7",
        "#define AB_KIND_PUT 1",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

/// Compiles and runs a small C program against the static library when a C
/// compiler and the archive are available.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let Some(archive) = exe
        .ancestors()
        .skip(1)
        .take(2)
        .map(|d| d.join("libasian_boundary_ffi.a"))
        .find(|p| p.exists())
    else {
        eprintln!("skipping: static library not built");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "asian_boundary_ffi.h"
int main(void) {
    AbParams p = {0.06, 0.0, 0.2, 1.0};
    AbAveraging a = {AB_AVERAGING_ARITHMETIC, 0.0};
    AbGrid g = {40, 100, 2.0};
    AbBoundary *b = NULL;
    double h = 0.0, t = 0.0, x = 0.0;
    if (ab_h_star(&h) != AB_STATUS_OK) return 1;
    if (ab_boundary_solve(&p, &a, &g, &b) != AB_STATUS_OK) return 2;
    if (ab_boundary_min(b, &t, &x) != AB_STATUS_OK) return 3;
    ab_boundary_free(b);
    p.sigma = -1.0;
    if (ab_boundary_solve(&p, &a, &g, &b) != AB_STATUS_INVALID_ARGUMENT) return 4;
    printf("%.6f %.6f %s\n", h, x, ab_last_error());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("-0.638833"), "{text}");
    assert!(text.contains("sigma"), "{text}");
}
