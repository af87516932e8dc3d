// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scripted figure reproductions and parameter scans.
//!
//! Frequencies on result axes are `ω/2π` in Hz and times are in seconds.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{argmax, gate_timing, GateModel, GateSimulation, SimulationOptions};
use crate::dynamics::{max_step, TimeGrid};
use crate::error::{Error, Result};
use crate::hilbert::RF;
use crate::model::{lifetime_to_rate, DeviceParams};

pub const TWO_PI: f64 = 2.0 * PI;

/// Fidelities may exceed 1 by round-off only.
pub const FIDELITY_SLACK: f64 = 1e-9;

/// Panels b-f sample this fraction of the gate time on either side of it.
pub const WINDOW_HALF_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub units: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

impl Series {
    fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    /// Parameters of every simulated point, in SI angular units.
    pub params: Vec<DeviceParams>,
    pub options: SimulationOptions,
    /// Step actually used by the finest-stepped point.
    pub dt: f64,
    pub notes: BTreeMap<String, String>,
    /// Excluded from reproducibility hashes.
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub axis: Axis,
    pub fidelity: Vec<Series>,
    pub leakage: Vec<Series>,
    /// Further per-point diagnostics (photon numbers, peak times, ...).
    pub extra: Vec<Series>,
    pub metadata: Metadata,
}

impl ExperimentResult {
    pub fn validate(&self) -> Result<()> {
        let n = self.axis.values.len();
        for s in self.fidelity.iter().chain(&self.leakage).chain(&self.extra) {
            if s.values.len() != n {
                return Err(Error::Invariant(format!(
                    "series `{}` has {} values for an axis of {n}",
                    s.name,
                    s.values.len()
                )));
            }
        }
        for s in &self.fidelity {
            if let Some(v) = s.values.iter().find(|v| !(**v >= 0.0 && **v <= 1.0 + FIDELITY_SLACK)) {
                return Err(Error::Invariant(format!("fidelity {v} in `{}` outside [0, 1]", s.name)));
            }
        }
        Ok(())
    }

    /// Every named column, axis first.
    pub fn columns(&self) -> Vec<(&str, &[f64])> {
        let mut out = vec![(self.axis.name.as_str(), self.axis.values.as_slice())];
        for s in self.fidelity.iter().chain(&self.leakage).chain(&self.extra) {
            out.push((s.name.as_str(), s.values.as_slice()));
        }
        out
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.fidelity
            .iter()
            .chain(&self.leakage)
            .chain(&self.extra)
            .find(|s| s.name == name)
            .map(|s| s.values.as_slice())
    }

    /// Largest value of a series and the axis value where it first occurs.
    pub fn peak(&self, name: &str) -> Option<(f64, f64)> {
        let s = self.series(name)?;
        let i = argmax(s)?;
        Some((self.axis.values[i], s[i]))
    }
}

fn step_used(sim: &GateSimulation) -> f64 {
    sim.options().dt.unwrap_or_else(|| max_step(sim.hamiltonian()))
}

/// Peak of `F_cp` from `|Ψ_max⟩` over a time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowPeak {
    pub fidelity: f64,
    pub time: f64,
    pub leakage: f64,
    pub dt: f64,
}

/// Propagates `|Ψ_max⟩` (master equation when the device is lossy) and
/// returns the best `F_cp` on the grid.
pub fn peak_fcp(
    params: &DeviceParams,
    model: GateModel,
    grid: &TimeGrid,
    opts: &SimulationOptions,
) -> Result<WindowPeak> {
    let sim = GateSimulation::new(params, model, opts)?;
    let traj = sim.propagate(&sim.psi_max(), grid, true)?;
    let (fid, leak) = sim.score(&traj, &sim.psi_max_cp())?;
    let i = argmax(&fid).expect("non-empty grid");
    Ok(WindowPeak {
        fidelity: fid[i],
        time: grid.times()[i],
        leakage: leak[i],
        dt: step_used(&sim),
    })
}

/// Samples of `[(1 − w) t, (1 + w) t]` with `w` = [`WINDOW_HALF_WIDTH`].
pub fn gate_window(t_gate: f64, points: usize) -> Result<TimeGrid> {
    TimeGrid::linspace(
        (1.0 - WINDOW_HALF_WIDTH) * t_gate,
        (1.0 + WINDOW_HALF_WIDTH) * t_gate,
        points.max(2),
    )
}

/// `gt = (g1/2π) t` values used for the gate-fidelity curve.
pub fn default_gt_grid() -> Vec<f64> {
    (0..=200).map(|k| k as f64 * 0.005).collect()
}

pub fn default_fig3_deltas() -> Vec<f64> {
    vec![5.0, 10.0, 25.0]
}

fn delta_label(delta: f64) -> String {
    if delta.fract() == 0.0 {
        format!("{}", delta as i64)
    } else {
        format!("{delta}")
    }
}

/// Fidelity, leakage, line photons and step of one coupling ratio.
type Fig3Run = (Vec<f64>, Vec<f64>, Vec<f64>, f64);

/// Gate fidelity of `|Ψ_max⟩` under the full qutrit Hamiltonian against the
/// ideal c-phase output, versus `gt`, for several `Δ = gf/g1`. The
/// Hamiltonian keeps the base device's detunings; the master equation is used
/// when the base device is lossy.
pub fn run_fig3(
    base: &DeviceParams,
    deltas: &[f64],
    gt_grid: &[f64],
    opts: &SimulationOptions,
) -> Result<ExperimentResult> {
    let started = Instant::now();
    if deltas.is_empty() {
        return Err(Error::param("deltas", "no values"));
    }
    if let Some(d) = deltas.iter().find(|d| !(d.is_finite() && **d > 1.0)) {
        return Err(Error::param("deltas", format!("{d} is not > 1")));
    }
    let times: Vec<f64> = gt_grid.iter().map(|gt| TWO_PI * gt / base.g1_ge).collect();
    let grid = TimeGrid::from_times(times)?;
    let points: Vec<DeviceParams> = deltas
        .iter()
        .map(|d| {
            let mut p = *base;
            p.gf_a = d * base.g1_ge;
            p.gf_b = d * base.g1_ge;
            p
        })
        .collect();
    let runs = points
        .par_iter()
        .map(|p| -> Result<Fig3Run> {
            let sim = GateSimulation::new(p, GateModel::H2q, opts)?;
            let traj = sim.propagate(&sim.psi_max(), &grid, true)?;
            let (fid, leak) = sim.score(&traj, &sim.psi_max_cp())?;
            let nf = sim.site_number(RF)?;
            let photons = traj
                .states
                .iter()
                .map(|s| crate::dynamics::expectation(&nf, s))
                .collect::<Result<Vec<_>>>()?;
            Ok((fid, leak, photons, step_used(&sim)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut result = ExperimentResult {
        name: "fig3".into(),
        axis: Axis {
            name: "gt".into(),
            units: "1".into(),
            values: gt_grid.to_vec(),
        },
        fidelity: Vec::new(),
        leakage: Vec::new(),
        extra: Vec::new(),
        metadata: Metadata {
            params: points,
            options: *opts,
            dt: runs.iter().map(|r| r.3).fold(f64::INFINITY, f64::min),
            notes: BTreeMap::from([("deltas".to_string(), format!("{deltas:?}"))]),
            wall_time_s: 0.0,
        },
    };
    for (d, (fid, leak, photons, _)) in deltas.iter().zip(runs) {
        let l = delta_label(*d);
        result.fidelity.push(Series::new(format!("F_delta{l}"), fid));
        result.leakage.push(Series::new(format!("leakage_delta{l}"), leak));
        result.extra.push(Series::new(format!("n_f_delta{l}"), photons));
    }
    result.metadata.wall_time_s = started.elapsed().as_secs_f64();
    result.validate()?;
    Ok(result)
}

/// Default time axis of the lossy gate curve: 0 to 120 ns in 0.1 ns steps.
pub fn default_fig7a_times() -> Vec<f64> {
    (0..=1200).map(|k| k as f64 * 1e-10).collect()
}

/// `F_cp` of `|Ψ_max⟩` versus time under `model`, using the master equation
/// when the device is lossy.
pub fn run_fcp_curve(
    name: &str,
    params: &DeviceParams,
    model: GateModel,
    times: &[f64],
    opts: &SimulationOptions,
) -> Result<ExperimentResult> {
    let started = Instant::now();
    let grid = TimeGrid::from_times(times.to_vec())?;
    let sim = GateSimulation::new(params, model, opts)?;
    let traj = sim.propagate(&sim.psi_max(), &grid, true)?;
    let (fid, leak) = sim.score(&traj, &sim.psi_max_cp())?;
    let mut extra = Vec::new();
    for key in ["norm_error", "trace_error", "min_eigenvalue"] {
        if let Some(v) = traj.observable(key) {
            extra.push(Series::new(key, v.to_vec()));
        }
    }
    let result = ExperimentResult {
        name: name.into(),
        axis: Axis {
            name: "t".into(),
            units: "s".into(),
            values: times.to_vec(),
        },
        fidelity: vec![Series::new("F_cp", fid)],
        leakage: vec![Series::new("leakage", leak)],
        extra,
        metadata: Metadata {
            params: vec![*params],
            options: *opts,
            dt: step_used(&sim),
            notes: BTreeMap::from([("model".to_string(), format!("{model:?}"))]),
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    };
    result.validate()?;
    Ok(result)
}

/// The lossy gate curve: resonant Hamiltonian plus the off-resonant
/// corrections, master equation.
pub fn run_fig7a(params: &DeviceParams, times: &[f64], opts: &SimulationOptions) -> Result<ExperimentResult> {
    run_fcp_curve("fig7a", params, GateModel::ResonantWithCorrections, times, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Panel {
    /// Fidelity vs `a` as the coupling of q1 is varied alone.
    B,
    /// Fidelity vs q2's anharmonicity.
    C,
    /// Fidelity vs a common offset of both q2 transitions.
    D,
    /// Fidelity vs the line's decay time.
    E,
    /// Average gate fidelity vs a uniform lifetime of every channel.
    F,
}

impl FromStr for Panel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            "d" => Ok(Self::D),
            "e" => Ok(Self::E),
            "f" => Ok(Self::F),
            _ => Err(Error::param("panel", format!("unknown panel `{s}`"))),
        }
    }
}

impl fmt::Display for Panel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::B => "b",
            Self::C => "c",
            Self::D => "d",
            Self::E => "e",
            Self::F => "f",
        };
        f.write_str(s)
    }
}

fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect()
}

fn logspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    linspace(from.log10(), to.log10(), n)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

impl Panel {
    /// Axis name and units.
    pub fn axis(self) -> (&'static str, &'static str) {
        match self {
            Self::B => ("g1_ge_hz", "Hz"),
            Self::C => ("anharmonicity2_hz", "Hz"),
            Self::D => ("q2_offset_hz", "Hz"),
            Self::E => ("kappa_f_inv_s", "s"),
            Self::F => ("lifetime_s", "s"),
        }
    }

    /// Default scan around the operating point.
    pub fn default_axis(self, base: &DeviceParams) -> Vec<f64> {
        match self {
            Self::B => linspace(0.5, 1.5, 11)
                .into_iter()
                .map(|x| x * base.g1_ge / TWO_PI)
                .collect(),
            Self::C => linspace(0.5, 1.5, 11)
                .into_iter()
                .map(|x| x * base.anharmonicity2().abs() / TWO_PI)
                .collect(),
            Self::D => linspace(-4e6, 4e6, 9),
            Self::E => logspace(1e-9, 50e-6, 10),
            Self::F => linspace(10e-6, 100e-6, 10),
        }
    }

    /// The device at one axis value.
    pub fn apply(self, base: &DeviceParams, x: f64) -> Result<DeviceParams> {
        let mut p = *base;
        match self {
            Self::B => p.g1_ge = TWO_PI * x,
            Self::C => p.omega2_ge = p.omega2_es + TWO_PI * x,
            Self::D => {
                p.omega2_ge += TWO_PI * x;
                p.omega2_es += TWO_PI * x;
            }
            Self::E => {
                if !(x > 0.0) {
                    return Err(Error::param("kappa_f_inv_s", "must be > 0"));
                }
                p.kappa_f = lifetime_to_rate(x);
            }
            Self::F => {
                if !(x > 0.0) {
                    return Err(Error::param("lifetime_s", "must be > 0"));
                }
                p = p.with_uniform_lifetime(x);
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// One-axis robustness scans around `base`. Panels b-e report the peak `F_cp`
/// over a window around the nominal gate time; panel f reports the average
/// gate fidelity at the gate time.
pub fn run_fig7_panel(
    panel: Panel,
    base: &DeviceParams,
    axis: Option<&[f64]>,
    opts: &SimulationOptions,
) -> Result<ExperimentResult> {
    let started = Instant::now();
    let values = axis.map_or_else(|| panel.default_axis(base), <[f64]>::to_vec);
    if values.is_empty() {
        return Err(Error::param("axis", "no values"));
    }
    let points = values
        .iter()
        .map(|&x| panel.apply(base, x))
        .collect::<Result<Vec<_>>>()?;
    let t_gate = gate_timing(1, 1, base.g1_ge)?.t_gate;
    let window = gate_window(t_gate, opts.points)?;

    let runs = points
        .par_iter()
        .map(|p| -> Result<WindowPeak> {
            if panel == Panel::F {
                let sim = GateSimulation::new(p, GateModel::H2q, opts)?;
                let f = sim.gate_channel(t_gate, true)?.average_fidelity(opts.grid_n, 0.0)?;
                Ok(WindowPeak {
                    fidelity: f,
                    time: t_gate,
                    leakage: f64::NAN,
                    dt: step_used(&sim),
                })
            } else {
                peak_fcp(p, GateModel::H2q, &window, opts)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let (name, units) = panel.axis();
    let mut fidelity_name = "F_cp";
    let mut leakage = vec![Series::new("leakage", runs.iter().map(|r| r.leakage).collect())];
    if panel == Panel::F {
        fidelity_name = "F_avg";
        leakage.clear();
    }
    let result = ExperimentResult {
        name: format!("fig7{panel}"),
        axis: Axis {
            name: name.into(),
            units: units.into(),
            values,
        },
        fidelity: vec![Series::new(fidelity_name, runs.iter().map(|r| r.fidelity).collect())],
        leakage,
        extra: vec![Series::new("t_peak_s", runs.iter().map(|r| r.time).collect())],
        metadata: Metadata {
            params: points,
            options: *opts,
            dt: runs.iter().map(|r| r.dt).fold(f64::INFINITY, f64::min),
            notes: BTreeMap::from([("t_gate_s".to_string(), format!("{t_gate:e}"))]),
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    };
    result.validate()?;
    Ok(result)
}

/// `from, from + step, ...` up to `to` inclusive (with round-off slack).
pub fn sweep_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::param("step", "must be finite and > 0"));
    }
    if !(from.is_finite() && to.is_finite() && from > 0.0) {
        return Err(Error::param("range", "bounds must be finite and from > 0"));
    }
    if to < from {
        return Err(Error::param("range", "empty grid: to < from"));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| from + k as f64 * step).collect())
}

/// Scans q1's coupling (Hz) with q2's slaved to the `k = m = 1` timing and
/// everything else held at `base`; each point scores the peak `F_cp` over a
/// window around its own gate time. Returns the first best coupling in Hz.
pub fn optimal_coupling_sweep(
    base: &DeviceParams,
    from_hz: f64,
    to_hz: f64,
    step_hz: f64,
    opts: &SimulationOptions,
) -> Result<(f64, ExperimentResult)> {
    let started = Instant::now();
    let grid = sweep_grid(from_hz, to_hz, step_hz)?;
    let points = grid
        .iter()
        .map(|&g_hz| -> Result<DeviceParams> {
            let mut p = *base;
            let timing = gate_timing(1, 1, TWO_PI * g_hz)?;
            p.g1_ge = TWO_PI * g_hz;
            p.g2_ge = timing.g2_ge_required();
            p.validate()?;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let runs = points
        .par_iter()
        .map(|p| -> Result<WindowPeak> {
            let t_gate = gate_timing(1, 1, p.g1_ge)?.t_gate;
            peak_fcp(p, GateModel::H2q, &gate_window(t_gate, opts.points)?, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let fid: Vec<f64> = runs.iter().map(|r| r.fidelity).collect();
    let best = grid[argmax(&fid).expect("non-empty grid")];
    let result = ExperimentResult {
        name: "sweep".into(),
        axis: Axis {
            name: "g1_ge_hz".into(),
            units: "Hz".into(),
            values: grid,
        },
        fidelity: vec![Series::new("F_cp", fid)],
        leakage: vec![Series::new("leakage", runs.iter().map(|r| r.leakage).collect())],
        extra: vec![Series::new("t_peak_s", runs.iter().map(|r| r.time).collect())],
        metadata: Metadata {
            params: points,
            options: *opts,
            dt: runs.iter().map(|r| r.dt).fold(f64::INFINITY, f64::min),
            notes: BTreeMap::from([("best_g1_ge_hz".to_string(), format!("{best}"))]),
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    };
    result.validate()?;
    Ok((best, result))
}
