use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use asq_core::fitting::synth;
use asq_ffi::*;

fn reference_device() -> AsqDeviceParams {
    AsqDeviceParams { ej_i_1: 0.2, ej_i_2: 0.3, ej_s_1: 0.82, ej_s_2: 0.63, ej_c: 10.0, e_c: 0.2, skew_1: 0.0, skew_2: 0.0 }
}

fn new_device(p: AsqDeviceParams) -> *mut AsqDevice {
    let mut dev = ptr::null_mut();
    assert_eq!(unsafe { asq_device_new(&p, &mut dev) }, AsqStatus::Ok);
    assert!(!dev.is_null());
    dev
}

fn last_error() -> String {
    let p = asq_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn coupling_methods_and_conventions() {
    let dev = new_device(reference_device());
    let (mut a, mut n, mut cp) = (0.0, 0.0, 0.0);
    let (mut ca, mut cc) = (AsqConvention::Interaction, AsqConvention::Eigenenergy);
    unsafe {
        assert_eq!(asq_coupling(dev, AsqMethod::Analytic, 0.1, 0.5, &mut a, &mut ca), AsqStatus::Ok);
        assert_eq!(asq_coupling(dev, AsqMethod::Numeric, 0.1, 0.5, &mut n, ptr::null_mut()), AsqStatus::Ok);
        assert_eq!(asq_coupling(dev, AsqMethod::CurrentProduct, 0.1, 0.5, &mut cp, &mut cc), AsqStatus::Ok);
        asq_device_free(dev);
    }
    assert_eq!(ca, AsqConvention::Eigenenergy);
    assert_eq!(cc, AsqConvention::Interaction);
    assert!((a - n).abs() < 0.02 * n.abs());
    // opposite sign conventions
    assert!(cp * n < 0.0);
}

#[test]
fn invalid_device_is_rejected() {
    let mut dev = ptr::null_mut();
    let p = AsqDeviceParams { ej_c: -1.0, ..reference_device() };
    assert_eq!(unsafe { asq_device_new(&p, &mut dev) }, AsqStatus::Domain);
    assert!(dev.is_null());
    assert!(last_error().contains("ej_c"), "{}", last_error());
    assert_eq!(unsafe { asq_device_new(ptr::null(), &mut dev) }, AsqStatus::NullPointer);
    unsafe { asq_device_free(ptr::null_mut()) };
}

#[test]
fn calibration_round_trip() {
    let closed = AsqDeviceParams { ej_i_1: 0.0, ej_i_2: 0.0, ej_s_1: 0.0, ej_s_2: 0.0, ..reference_device() };
    let dev = new_device(closed);
    let mut ejc = 0.0;
    let mut f01 = [0.0; 4];
    unsafe {
        assert_eq!(asq_ejc_from_ft(dev, 4.0, 40, &mut ejc), AsqStatus::Ok);
        asq_device_free(dev);
        let dev = new_device(AsqDeviceParams { ej_c: ejc, ..closed });
        assert_eq!(asq_transmon_f01(dev, 0.0, 0.0, 40, f01.as_mut_ptr()), AsqStatus::Ok);
        let mut e = 0.0;
        assert_eq!(asq_ejc_from_ft(dev, 1000.0, 40, &mut e), AsqStatus::OutOfRange);
        assert_eq!(asq_transmon_f01(dev, 0.0, 0.0, 3, f01.as_mut_ptr()), AsqStatus::InvalidArgument);
        asq_device_free(dev);
    }
    assert!((f01[0] - 4.0).abs() < 1e-4, "{f01:?}");
}

#[test]
fn steady_state_statuses() {
    let drive = AsqDrive { omega_p1: 2.0, omega_p2: 2.0, delta_1: -178.0, delta_2: -178.0, j: 178.0 };
    let rates = AsqRates { t1_1: 1000.0, t1_2: 1000.0, t2_1: 1.0, t2_2: 1.0 };
    let mut pop = [0.0; 4];
    assert_eq!(unsafe { asq_steady_state(&drive, &rates, pop.as_mut_ptr()) }, AsqStatus::Ok);
    assert!((pop.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    for p in &pop[..3] {
        assert!((p - 1.0 / 3.0).abs() < 0.02, "{pop:?}");
    }
    let off = AsqRates { t1_1: f64::INFINITY, t1_2: f64::INFINITY, t2_1: f64::INFINITY, t2_2: f64::INFINITY };
    assert_eq!(unsafe { asq_steady_state(&drive, &off, pop.as_mut_ptr()) }, AsqStatus::NotUnique);
    assert_eq!(unsafe { asq_steady_state(&drive, &rates, ptr::null_mut()) }, AsqStatus::NullPointer);
}

#[test]
fn fit_handles() {
    let (f, s) = synth::resonator_trace(4.2285, 1300.0, 35000.0, 0.1, 0.015, 801, 0.0, 0);
    let re: Vec<f64> = s.iter().map(|z| z.re).collect();
    let im: Vec<f64> = s.iter().map(|z| z.im).collect();
    let mut fit = ptr::null_mut();
    unsafe {
        assert_eq!(asq_fit_resonator(f.as_ptr(), re.as_ptr(), im.as_ptr(), f.len(), &mut fit), AsqStatus::Ok);
        assert_eq!(asq_fit_param_count(fit), 4);
        let (mut name, mut v, mut sg) = (ptr::null(), 0.0, 0.0);
        assert_eq!(asq_fit_param(fit, 2, &mut name, &mut v, &mut sg), AsqStatus::Ok);
        assert_eq!(CStr::from_ptr(name).to_str().unwrap(), "Q_i");
        assert!((v / 35000.0 - 1.0).abs() < 1e-8);
        let key = CString::new("f_r0").unwrap();
        assert_eq!(asq_fit_get(fit, key.as_ptr(), &mut v), AsqStatus::Ok);
        assert!((v - 4.2285).abs() < 1e-9);
        let (mut rss, mut conv) = (1.0, false);
        assert_eq!(asq_fit_summary(fit, &mut rss, &mut conv), AsqStatus::Ok);
        assert!(conv && rss < 1e-12);
        assert_eq!(asq_fit_param(fit, 9, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), AsqStatus::InvalidArgument);
        asq_fit_free(fit);

        let (t, y) = synth::t1_trace(1.0, 3.3, 0.0, 16.5, 60, 0.0, 0);
        assert_eq!(asq_fit_t1(t.as_ptr(), y.as_ptr(), t.len(), &mut fit), AsqStatus::Ok);
        let key = CString::new("T1").unwrap();
        assert_eq!(asq_fit_get(fit, key.as_ptr(), &mut v), AsqStatus::Ok);
        assert!((v - 3.3).abs() < 1e-6);
        asq_fit_free(fit);

        let (c, y) = synth::cpr_trace([0.82, 5.1, 0.4, 3.16, -0.39], -1.0, 4.0, 241, 0.0, 0);
        assert_eq!(asq_fit_cpr(c.as_ptr(), y.as_ptr(), c.len(), true, &mut fit), AsqStatus::Ok);
        let key = CString::new("S").unwrap();
        assert_eq!(asq_fit_get(fit, key.as_ptr(), &mut v), AsqStatus::Ok);
        assert!((v + 0.39).abs() < 1e-6);
        asq_fit_free(fit);
    }
}

#[test]
fn peak_decision() {
    let (x, u, d) = synth::peak_pair(3.4, 0.005, -178.0, 0.5, 0.02, 1);
    let mut out = AsqPeakDecision::default();
    unsafe {
        assert_eq!(asq_extract_j(x.as_ptr(), u.as_ptr(), d.as_ptr(), x.len(), &mut out), AsqStatus::Ok);
        assert!(out.is_double);
        assert!((out.j_mhz + 178.0).abs() < 3.0 * out.j_sigma.max(0.1));
        assert_eq!(asq_extract_j(x.as_ptr(), u.as_ptr(), u.as_ptr(), 5, &mut out), AsqStatus::ExtractionFailed);
    }
    assert!(last_error().contains("single_undriven"));
}

/// `cargo test` does not produce the staticlib, so build it into a
/// separate target directory (no contention with the running build).
fn static_library() -> PathBuf {
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("capi");
    let status = Command::new(env!("CARGO"))
        .args(["build", "--quiet", "--offline", "-p", "asq-ffi", "--lib", "--target-dir"])
        .arg(&target)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .status()
        .expect("cargo runs");
    assert!(status.success());
    target.join("debug").join("libasq_ffi.a")
}

#[test]
fn header_matches_exports() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/asq.h")).unwrap();
    for f in [
        "asq_version", "asq_last_error", "asq_device_new", "asq_device_free", "asq_coupling", "asq_l_asq",
        "asq_transmon_f01", "asq_ejc_from_ft", "asq_steady_state", "asq_fit_resonator", "asq_fit_cpr", "asq_fit_t1",
        "asq_fit_param_count", "asq_fit_param", "asq_fit_get", "asq_fit_summary", "asq_fit_free", "asq_extract_j",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct AsqDevice AsqDevice;"));
    assert!(header.contains("typedef struct AsqFit AsqFit;"));
}

#[test]
fn c_program_links_against_static_library() {
    let lib = static_library();
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
