// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! C ABI for the darkgate simulator.
//!
//! Devices are opaque handles created with [`dg_device_new`] or
//! [`dg_device_from_preset`] and released with [`dg_device_free`]. Every
//! fallible call returns a [`DgStatus`]; on failure the message is available
//! from [`dg_last_error_message`] on the same thread. Frequencies and
//! couplings are angular (rad/s), rates are in 1/s, times in seconds.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use darkgate::analysis::{average_gate_fidelity, cphase_tomography, gate_timing, GateModel, SimulationOptions};
use darkgate::config::preset;
use darkgate::dynamics::TimeGrid;
use darkgate::experiments::peak_fcp;
use darkgate::model::DeviceParams;
use darkgate::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    StepTooLarge = 3,
    InvariantViolated = 4,
    Io = 5,
    Panic = 6,
}

/// Gate model selector.
pub const DG_MODEL_HEFF_PRIME: u32 = 0;
pub const DG_MODEL_H2Q: u32 = 1;
pub const DG_MODEL_H2Q_RESONANT: u32 = 2;
pub const DG_MODEL_RESONANT_WITH_CORRECTIONS: u32 = 3;

/// Device parameters. Qutrit decay rates of the upper transitions follow from
/// the lower ones.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgDeviceParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_f: f64,
    pub omega1_ge: f64,
    pub omega1_es: f64,
    pub omega2_ge: f64,
    pub omega2_es: f64,
    pub g1_ge: f64,
    pub g2_ge: f64,
    pub gf_a: f64,
    pub gf_b: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub kappa_f: f64,
    pub gamma1_ge: f64,
    pub gamma2_ge: f64,
}

impl From<DgDeviceParams> for DeviceParams {
    fn from(p: DgDeviceParams) -> Self {
        DeviceParams {
            omega_a: p.omega_a,
            omega_b: p.omega_b,
            omega_f: p.omega_f,
            omega1_ge: p.omega1_ge,
            omega1_es: p.omega1_es,
            omega2_ge: p.omega2_ge,
            omega2_es: p.omega2_es,
            g1_ge: p.g1_ge,
            g2_ge: p.g2_ge,
            gf_a: p.gf_a,
            gf_b: p.gf_b,
            kappa_a: p.kappa_a,
            kappa_b: p.kappa_b,
            kappa_f: p.kappa_f,
            gamma1_ge: p.gamma1_ge,
            gamma2_ge: p.gamma2_ge,
        }
    }
}

impl From<DeviceParams> for DgDeviceParams {
    fn from(p: DeviceParams) -> Self {
        DgDeviceParams {
            omega_a: p.omega_a,
            omega_b: p.omega_b,
            omega_f: p.omega_f,
            omega1_ge: p.omega1_ge,
            omega1_es: p.omega1_es,
            omega2_ge: p.omega2_ge,
            omega2_es: p.omega2_es,
            g1_ge: p.g1_ge,
            g2_ge: p.g2_ge,
            gf_a: p.gf_a,
            gf_b: p.gf_b,
            kappa_a: p.kappa_a,
            kappa_b: p.kappa_b,
            kappa_f: p.kappa_f,
            gamma1_ge: p.gamma1_ge,
            gamma2_ge: p.gamma2_ge,
        }
    }
}

/// Numerical settings. `dt <= 0` selects the largest admissible step.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgOptions {
    pub n_max: u32,
    pub dt: f64,
    pub grid_n: u32,
}

impl From<DgOptions> for SimulationOptions {
    fn from(o: DgOptions) -> Self {
        SimulationOptions {
            n_max: o.n_max as usize,
            dt: (o.dt > 0.0).then_some(o.dt),
            grid_n: o.grid_n as usize,
            ..SimulationOptions::default()
        }
    }
}

/// Opaque device handle.
pub struct DgDevice {
    params: DeviceParams,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgPeak {
    pub fidelity: f64,
    pub time: f64,
    pub leakage: f64,
}

/// Tomography result; matrices are row-major, ordered `gg, ge, eg, ee`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgTomography {
    pub time: f64,
    pub re: [f64; 16],
    pub im: [f64; 16],
    pub deviation: f64,
    pub leakage: [f64; 4],
    pub degraded: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> DgStatus {
    match err {
        Error::InvalidParameter { .. }
        | Error::Config(_)
        | Error::DimensionMismatch { .. }
        | Error::SiteOutOfRange { .. }
        | Error::LevelOutOfRange { .. }
        | Error::InvalidState(_)
        | Error::NotHermitian(_) => DgStatus::InvalidArgument,
        Error::StepTooLarge { .. } => DgStatus::StepTooLarge,
        Error::Io(_) => DgStatus::Io,
        _ => DgStatus::InvariantViolated,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (DgStatus, String)>) -> DgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            DgStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            DgStatus::Panic
        }
    }
}

fn lift<T>(r: darkgate::Result<T>) -> Result<T, (DgStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (DgStatus, String) {
    (DgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn device_ref<'a>(dev: *const DgDevice) -> Result<&'a DgDevice, (DgStatus, String)> {
    dev.as_ref().ok_or_else(|| null("device"))
}

fn model_of(model: u32) -> Result<GateModel, (DgStatus, String)> {
    match model {
        DG_MODEL_HEFF_PRIME => Ok(GateModel::HeffPrime),
        DG_MODEL_H2Q => Ok(GateModel::H2q),
        DG_MODEL_H2Q_RESONANT => Ok(GateModel::H2qResonant),
        DG_MODEL_RESONANT_WITH_CORRECTIONS => Ok(GateModel::ResonantWithCorrections),
        other => Err((DgStatus::InvalidArgument, format!("unknown model {other}"))),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
#[no_mangle]
pub unsafe extern "C" fn dg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Default numerical settings.
#[no_mangle]
pub extern "C" fn dg_options_default() -> DgOptions {
    let o = SimulationOptions::default();
    DgOptions {
        n_max: o.n_max as u32,
        dt: 0.0,
        grid_n: o.grid_n as u32,
    }
}

#[no_mangle]
pub unsafe extern "C" fn dg_device_new(params: *const DgDeviceParams, out: *mut *mut DgDevice) -> DgStatus {
    guard(|| {
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = DeviceParams::from(*params);
        lift(p.validate())?;
        *out = Box::into_raw(Box::new(DgDevice { params: p }));
        Ok(())
    })
}

/// Creates a device from a shipped preset (`paper_sec3_fig3`, `paper_sec4`).
#[no_mangle]
pub unsafe extern "C" fn dg_device_from_preset(name: *const c_char, out: *mut *mut DgDevice) -> DgStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| (DgStatus::InvalidArgument, "preset name is not UTF-8".to_string()))?;
        let params = lift(preset(name).and_then(|c| c.device()))?;
        *out = Box::into_raw(Box::new(DgDevice { params }));
        Ok(())
    })
}

/// Releases a device. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dg_device_free(dev: *mut DgDevice) {
    if !dev.is_null() {
        drop(Box::from_raw(dev));
    }
}

#[no_mangle]
pub unsafe extern "C" fn dg_device_params(dev: *const DgDevice, out: *mut DgDeviceParams) -> DgStatus {
    guard(|| {
        let dev = device_ref(dev)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = dev.params.into();
        Ok(())
    })
}

/// Gate time and required upper-transition coupling of qutrit 2 for
/// timing integers `k`, `m`.
#[no_mangle]
pub unsafe extern "C" fn dg_gate_timing(k: u32, m: u32, g1_ge: f64, t_gate: *mut f64, g2_es: *mut f64) -> DgStatus {
    guard(|| {
        if t_gate.is_null() || g2_es.is_null() {
            return Err(null("output"));
        }
        let timing = lift(gate_timing(k, m, g1_ge))?;
        *t_gate = timing.t_gate;
        *g2_es = timing.g2_es_required;
        Ok(())
    })
}

/// Largest c-phase fidelity of the maximal superposition over `points`
/// uniformly spaced times in `[t_from, t_to]`.
#[no_mangle]
pub unsafe extern "C" fn dg_fidelity_peak(
    dev: *const DgDevice,
    model: u32,
    opts: DgOptions,
    t_from: f64,
    t_to: f64,
    points: u32,
    out: *mut DgPeak,
) -> DgStatus {
    guard(|| {
        let dev = device_ref(dev)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let model = model_of(model)?;
        let grid = lift(TimeGrid::linspace(t_from, t_to, points as usize))?;
        let peak = lift(peak_fcp(&dev.params, model, &grid, &opts.into()))?;
        *out = DgPeak {
            fidelity: peak.fidelity,
            time: peak.time,
            leakage: peak.leakage,
        };
        Ok(())
    })
}

/// Average gate fidelity at the gate time, with losses.
#[no_mangle]
pub unsafe extern "C" fn dg_average_gate_fidelity(dev: *const DgDevice, opts: DgOptions, out: *mut f64) -> DgStatus {
    guard(|| {
        let dev = device_ref(dev)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let o: SimulationOptions = opts.into();
        *out = lift(average_gate_fidelity(&dev.params, o.grid_n, &o))?;
        Ok(())
    })
}

/// Projected gate matrix at time `t`; a non-positive or NaN `t` selects the
/// gate time.
#[no_mangle]
pub unsafe extern "C" fn dg_tomography(
    dev: *const DgDevice,
    model: u32,
    opts: DgOptions,
    t: f64,
    out: *mut DgTomography,
) -> DgStatus {
    guard(|| {
        let dev = device_ref(dev)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let model = model_of(model)?;
        let t = (t > 0.0).then_some(t);
        let tomo = lift(cphase_tomography(&dev.params, model, t, &opts.into()))?;
        let mut re = [0.0; 16];
        let mut im = [0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                re[4 * i + j] = tomo.matrix[(i, j)].re;
                im[4 * i + j] = tomo.matrix[(i, j)].im;
            }
        }
        *out = DgTomography {
            time: tomo.time,
            re,
            im,
            deviation: tomo.deviation,
            leakage: tomo.leakage,
            degraded: tomo.degraded,
        };
        Ok(())
    })
}
