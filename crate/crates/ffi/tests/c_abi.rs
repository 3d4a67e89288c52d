use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use slesigma_ffi::*;

#[test]
fn handles_round_trip() {
    unsafe {
        let mut path = ptr::null_mut();
        assert_eq!(sles_path_sample(1.0, 1.0, 0.0, 200, 2.0, 3, 0, &mut path), SlesStatus::Ok);
        assert_eq!(sles_path_len(path), 200);

        let mut cloud = ptr::null_mut();
        assert_eq!(sles_hull_cloud(path, 0.02, SlesSide::Right, &mut cloud), SlesStatus::Ok);
        let n = sles_cloud_len(cloud);
        assert!(n > 200);
        let (mut re, mut im, mut t) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let s = sles_cloud_points(cloud, re.as_mut_ptr(), im.as_mut_ptr(), t.as_mut_ptr(), n);
        assert_eq!(s, SlesStatus::Ok);
        assert!(re.iter().chain(&im).all(|v| v.is_finite()));
        assert!(t.iter().all(|&x| (0.0..=2.0).contains(&x)));
        sles_cloud_free(cloud);
        sles_path_free(path);
    }
}

#[test]
fn zero_path_forward_map() {
    unsafe {
        let mut path = ptr::null_mut();
        assert_eq!(sles_path_from_increments(2.0, [0.0; 100].as_ptr(), [0.0; 100].as_ptr(), 100, &mut path), SlesStatus::Ok);
        let (mut x, mut y) = (0.0, 0.0);
        assert_eq!(sles_forward_map(path, 1.0, 2.0, &mut x, &mut y), SlesStatus::Ok);
        let z = num_complex::Complex64::new(1.0, 2.0);
        let want = z * (1.0 + 8.0 / (z * z)).sqrt();
        assert!((x - want.re).abs() < 1e-9 && (y - want.im).abs() < 1e-9);
        sles_path_free(path);
    }
}

#[test]
fn density_and_phase() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(sles_density(4.0, 4.0, 0.0, 512, &mut d), SlesStatus::Ok);
        assert_eq!(sles_density_len(d), 513);
        let ratio = sles_density_value_at(d, 0.0) / sles_density_value_at(d, std::f64::consts::FRAC_PI_2);
        assert!((ratio - std::f64::consts::E).abs() < 1e-10);
        let mut u = vec![0.0; 513];
        assert_eq!(sles_density_values(d, u.as_mut_ptr(), ptr::null_mut(), 513), SlesStatus::Ok);
        assert_eq!(u[0], 0.0);
        sles_density_free(d);

        let mut r = std::mem::zeroed::<SlesPhaseReport>();
        assert_eq!(sles_phase_classify(7.0, 1.0, 0.0, 0.0, &mut r), SlesStatus::Ok);
        assert_eq!(r.label, SlesPhase::Swallowing);
        assert!(r.i < 0.0 && r.ii > 0.0);
        assert_eq!(sles_phase_classify(0.0, 0.0, 0.0, 0.0, &mut r), SlesStatus::InvalidArgument);
    }
}

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn static_lib() -> Option<PathBuf> {
    // tests/ binaries live in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libslesigma_ffi.a");
    lib.exists().then_some(lib)
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(manifest().join("include/slesigma.h")).unwrap();
    for name in [
        "sles_path_sample",
        "sles_path_free",
        "sles_hull_cloud",
        "sles_cloud_points",
        "sles_density",
        "sles_phase_classify",
        "sles_last_error_message",
        "SLES_STATUS_INVALID_COVARIANCE",
    ] {
        assert!(h.contains(name), "{name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let (Some(lib), true) = (static_lib(), have_cc()) else {
        eprintln!("no C compiler or static library, skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "slesigma.h"
int main(void) {
    SlesPath *p = NULL;
    if (sles_path_sample(1.0, 1.0, 2.0, 10, 1.0, 0, 0, &p) != SLES_STATUS_INVALID_COVARIANCE) return 1;
    char msg[128];
    if (sles_last_error_message(msg, sizeof msg) == 0) return 2;
    if (sles_path_zero(100, 2.0, &p) != SLES_STATUS_OK) return 3;
    double x, y;
    if (sles_forward_map(p, 0.0, 3.0, &x, &y) != SLES_STATUS_OK) return 4;
    sles_path_free(p);
    SlesPhaseReport r;
    if (sles_phase_classify(9.5, 1.0, 0.0, 0.0, &r) != SLES_STATUS_OK) return 5;
    printf("%d %.6f\n", (int)r.label, y);
    return r.label == SLES_PHASE_HITTING ? 0 : 6;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(Path::new(&exe)).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    // zero driver: f(3i) = √(−9 + 8) = i
    let y: f64 = String::from_utf8_lossy(&run.stdout).split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((y - 1.0).abs() < 1e-6, "{y}");
}
