// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use darkgate_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        dg_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn preset_device(name: &str) -> *mut DgDevice {
    let name = CString::new(name).unwrap();
    let mut dev = ptr::null_mut();
    let status = unsafe { dg_device_from_preset(name.as_ptr(), &mut dev) };
    assert_eq!(status, DgStatus::Ok, "{}", last_error());
    assert!(!dev.is_null());
    dev
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(dg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn gate_timing_values() {
    let g1 = 2.0 * std::f64::consts::PI * 8.0e6;
    let (mut t, mut g2) = (0.0, 0.0);
    assert_eq!(unsafe { dg_gate_timing(1, 1, g1, &mut t, &mut g2) }, DgStatus::Ok);
    assert!((t - 2f64.sqrt() * std::f64::consts::PI / g1).abs() < 1e-20);
    assert!((g2 / g1 - 3f64.sqrt()).abs() < 1e-14);

    assert_eq!(
        unsafe { dg_gate_timing(0, 1, g1, &mut t, &mut g2) },
        DgStatus::InvalidArgument
    );
    assert!(last_error().contains("k, m"));
    assert_eq!(
        unsafe { dg_gate_timing(1, 1, g1, ptr::null_mut(), &mut g2) },
        DgStatus::NullPointer
    );
}

#[test]
fn device_round_trip_and_validation() {
    let dev = preset_device("paper_sec4");
    let mut p = unsafe { std::mem::zeroed::<DgDeviceParams>() };
    assert_eq!(unsafe { dg_device_params(dev, &mut p) }, DgStatus::Ok);
    assert!((p.omega_a / (2.0 * std::f64::consts::PI) - 6.0e9).abs() < 1e-3);

    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { dg_device_new(&p, &mut copy) }, DgStatus::Ok);
    unsafe { dg_device_free(copy) };

    p.g1_ge = -1.0;
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { dg_device_new(&p, &mut bad) }, DgStatus::InvalidArgument);
    assert!(bad.is_null());
    assert!(!last_error().is_empty());

    unsafe {
        dg_device_free(dev);
        dg_device_free(ptr::null_mut());
    }
}

#[test]
fn unknown_preset_and_null_handles() {
    let name = CString::new("nope").unwrap();
    let mut dev = ptr::null_mut();
    assert_eq!(
        unsafe { dg_device_from_preset(name.as_ptr(), &mut dev) },
        DgStatus::InvalidArgument
    );
    assert!(last_error().contains("nope"));
    let mut out = 0.0;
    let status = unsafe { dg_average_gate_fidelity(ptr::null(), dg_options_default(), &mut out) };
    assert_eq!(status, DgStatus::NullPointer);
}

#[test]
fn error_message_truncates() {
    let mut t = 0.0;
    let mut g = 0.0;
    unsafe { dg_gate_timing(1, 1, f64::NAN, &mut t, &mut g) };
    let full = unsafe { dg_last_error_message(ptr::null_mut(), 0) };
    let mut buf = [1 as c_char; 8];
    let n = unsafe { dg_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full);
    assert!(n > 7);
    assert_eq!(buf[7], 0);
}

#[test]
fn tomography_of_dark_mode_model() {
    let dev = preset_device("paper_sec3_fig3");
    let mut tomo = unsafe { std::mem::zeroed::<DgTomography>() };
    let status = unsafe { dg_tomography(dev, DG_MODEL_HEFF_PRIME, dg_options_default(), 0.0, &mut tomo) };
    assert_eq!(status, DgStatus::Ok, "{}", last_error());
    let ideal = [1.0, 1.0, -1.0, 1.0];
    for (i, s) in ideal.iter().enumerate() {
        assert!((tomo.re[5 * i] - s).abs() < 1e-8, "{:?}", tomo.re);
    }
    assert!(tomo.deviation < 1e-8);
    assert!(!tomo.degraded);

    let status = unsafe { dg_tomography(dev, 17, dg_options_default(), 0.0, &mut tomo) };
    assert_eq!(status, DgStatus::InvalidArgument);
    unsafe { dg_device_free(dev) };
}

#[test]
fn fidelity_peak_near_gate_time() {
    let dev = preset_device("paper_sec4");
    let mut p = unsafe { std::mem::zeroed::<DgDeviceParams>() };
    unsafe { dg_device_params(dev, &mut p) };
    let (mut t_gate, mut g2) = (0.0, 0.0);
    unsafe { dg_gate_timing(1, 1, p.g1_ge, &mut t_gate, &mut g2) };
    let mut peak = DgPeak {
        fidelity: 0.0,
        time: 0.0,
        leakage: 0.0,
    };
    let status = unsafe {
        dg_fidelity_peak(
            dev,
            DG_MODEL_H2Q,
            dg_options_default(),
            0.95 * t_gate,
            1.05 * t_gate,
            11,
            &mut peak,
        )
    };
    assert_eq!(status, DgStatus::Ok, "{}", last_error());
    assert!(peak.fidelity > 0.98 && peak.fidelity <= 1.0, "{peak:?}");
    assert!((peak.time / t_gate - 1.0).abs() <= 0.05);

    let mut opts = dg_options_default();
    opts.dt = 1e-9;
    let status = unsafe { dg_fidelity_peak(dev, DG_MODEL_H2Q, opts, 0.0, t_gate, 3, &mut peak) };
    assert_eq!(status, DgStatus::StepTooLarge);
    unsafe { dg_device_free(dev) };
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/darkgate.h")).unwrap();
    for name in [
        "dg_version",
        "dg_last_error_message",
        "dg_options_default",
        "dg_device_new",
        "dg_device_from_preset",
        "dg_device_free",
        "dg_device_params",
        "dg_gate_timing",
        "dg_fidelity_peak",
        "dg_average_gate_fidelity",
        "dg_tomography",
        "typedef struct DgDevice DgDevice",
        "DG_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c99() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let dir = std::env::temp_dir().join(format!("darkgate-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"darkgate.h\"\n\
         int main(void) {\n\
           DgDevice *d = 0;\n\
           DgStatus s = dg_device_from_preset(\"paper_sec4\", &d);\n\
           DgOptions o = dg_options_default();\n\
           double f = 0.0;\n\
           if (s == DG_STATUS_OK) s = dg_average_gate_fidelity(d, o, &f);\n\
           dg_device_free(d);\n\
           return (int)s;\n\
         }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    assert!(status.success());
}

fn which_cc() -> Result<String, ()> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match std::process::Command::new(&cc).arg("--version").output() {
        Ok(o) if o.status.success() => Ok(cc),
        _ => Err(()),
    }
}
