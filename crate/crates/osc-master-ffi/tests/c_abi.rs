use osc_master_ffi::*;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

const HEADER: &str = include_str!("../include/osc_master.h");

fn params(w: f64, o: f64, z: f64) -> *mut OscParams {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { osc_params_new(w, o, z, &mut h) }, OscStatus::Ok);
    h
}

fn coefficients(h: *const OscParams) -> OscCoefficients {
    let mut c = OscCoefficients::default();
    assert_eq!(unsafe { osc_coefficients(h, 4, &mut c) }, OscStatus::Ok);
    c
}

#[test]
fn verify_reports_mismatch_and_oracle_agreement() {
    let h = params(1.0, 0.1, 1.0);
    let mut rel = f64::NAN;
    assert_eq!(
        unsafe { osc_verify(h, 2, OscMethod::Matsubara, 1e-8, &mut rel) },
        OscStatus::Ok
    );
    assert!(rel < 1e-8);
    assert_eq!(
        unsafe { osc_verify(h, 4, OscMethod::FrequencyDomain, 1e-4, &mut rel) },
        OscStatus::Ok
    );
    assert_eq!(
        unsafe { osc_verify(h, 4, OscMethod::Matsubara, 1e-30, &mut rel) },
        OscStatus::Mismatch
    );
    assert_eq!(
        unsafe { osc_verify(h, 5, OscMethod::Matsubara, 1e-8, &mut rel) },
        OscStatus::InvalidArgument
    );
    unsafe { osc_params_free(h) };
}

#[test]
fn evolve_and_relax() {
    let h = params(1.0, 0.1, 1.0);
    let c = coefficients(h);
    let s0 = OscGaussianState {
        mean_x: 1.0,
        mean_p: 0.0,
        var_xx: 0.5,
        var_pp: 0.5,
        cov_xp: 0.0,
    };
    let mut target = OscGaussianState::default();
    assert_eq!(unsafe { osc_steady_state(&c, &mut target) }, OscStatus::Ok);
    let mut tr = ptr::null_mut();
    assert_eq!(
        unsafe { osc_evolve(&c, &s0, 1000.0, 11, 1e-10, 1e-12, &mut tr) },
        OscStatus::Ok
    );
    assert_eq!(unsafe { osc_trajectory_len(tr) }, 11);
    let (mut t, mut s) = (0.0, OscGaussianState::default());
    assert_eq!(unsafe { osc_trajectory_sample(tr, 10, &mut t, &mut s) }, OscStatus::Ok);
    assert_eq!(t, 1000.0);
    assert!((s.var_xx - target.var_xx).abs() < 1e-6 && (s.var_pp - target.var_pp).abs() < 1e-6);
    assert_eq!(
        unsafe { osc_trajectory_sample(tr, 11, &mut t, &mut s) },
        OscStatus::InvalidArgument
    );
    unsafe {
        osc_trajectory_free(tr);
        osc_params_free(h);
    }
}

#[test]
fn free_oscillator_keeps_its_energy() {
    let c = OscCoefficients::default();
    let s0 = OscGaussianState {
        mean_x: 1.0,
        mean_p: 0.5,
        var_xx: 0.8,
        var_pp: 0.8,
        cov_xp: 0.0,
    };
    let mut tr = ptr::null_mut();
    assert_eq!(
        unsafe { osc_evolve(&c, &s0, 200.0 * std::f64::consts::PI, 101, 1e-12, 1e-12, &mut tr) },
        OscStatus::Ok
    );
    let mut drift = f64::NAN;
    assert_eq!(unsafe { osc_trajectory_energy_drift(tr, &mut drift) }, OscStatus::Ok);
    assert!(drift < 1e-9);
    unsafe { osc_trajectory_free(tr) };
    let mut s = OscGaussianState::default();
    assert_eq!(unsafe { osc_steady_state(&c, &mut s) }, OscStatus::NoSteadyState);
}

#[test]
fn bad_inputs_map_to_status_codes() {
    let c = OscCoefficients::default();
    let mut tr = ptr::null_mut();
    let bad = OscGaussianState {
        var_xx: -1.0,
        ..Default::default()
    };
    assert_eq!(
        unsafe { osc_evolve(&c, &bad, 1.0, 5, 1e-10, 1e-12, &mut tr) },
        OscStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { osc_evolve(&c, ptr::null(), 1.0, 5, 1e-10, 1e-12, &mut tr) },
        OscStatus::NullPointer
    );
    let stiff = OscCoefficients {
        lambda: -1e13,
        ..Default::default()
    };
    let s0 = OscGaussianState {
        mean_x: 1.0,
        var_xx: 0.5,
        var_pp: 0.5,
        ..Default::default()
    };
    assert_eq!(
        unsafe { osc_evolve(&stiff, &s0, 10.0, 5, 1e-10, 1e-12, &mut tr) },
        OscStatus::Integrator
    );
    assert!(tr.is_null());
    assert_eq!(unsafe { osc_trajectory_len(ptr::null()) }, 0);
}

#[test]
fn header_declares_every_entry_point() {
    let src = include_str!("../src/lib.rs");
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|l| l.split('(').next())
        .collect();
    assert!(exported.len() >= 12);
    for f in exported {
        assert!(HEADER.contains(&format!("{f}(")), "{f} missing from header");
    }
    for t in [
        "typedef struct OscParams OscParams;",
        "typedef struct OscTrajectory OscTrajectory;",
        "OSC_STATUS_NO_STEADY_STATE = 6",
    ] {
        assert!(HEADER.contains(t), "{t}");
    }
}

// the library built alongside this test binary, not a possibly stale `cargo build` copy
fn static_library() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().join("libosc_master_ffi.a")
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "osc_master.h"

int main(void) {
    OscParams *p = NULL;
    if (osc_params_new(1.0, 0.1, 1.0, &p) != OSC_STATUS_OK) return 10;
    OscCoefficients c;
    if (osc_coefficients(p, 4, &c) != OSC_STATUS_OK) return 11;
    OscGaussianState s;
    if (osc_steady_state(&c, &s) != OSC_STATUS_OK) return 12;
    osc_params_free(p);
    if (osc_params_new(-1.0, 0.1, 1.0, &p) != OSC_STATUS_INVALID_ARGUMENT) return 13;
    char msg[128];
    osc_last_error(msg, sizeof msg);
    printf("%.17g %.17g %s\n", c.orders[0].a4, s.var_xx, msg);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let lib = static_library();
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let cc = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut f = text.split_whitespace();
    assert_eq!(f.next().unwrap().parse::<f64>().unwrap(), -0.05);
    assert!(f.next().unwrap().parse::<f64>().unwrap() > 0.5);
    assert!(text.contains("omega0_tilde"));
}
