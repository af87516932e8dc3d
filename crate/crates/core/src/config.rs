// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a flat TOML table.
//!
//! Frequencies and couplings are `ω/2π` in Hz, decay times in seconds
//! (`inf` for a lossless channel). Values are stored as written; conversion
//! to angular units happens in [`RunConfig::device`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::SimulationOptions;
use crate::error::{Error, Result};
use crate::experiments::TWO_PI;
use crate::model::{lifetime_to_rate, DeviceParams};

pub const MAX_FREQUENCY_HZ: f64 = 1e12;
pub const MAX_N_MAX: usize = 6;
pub const MAX_GRID_N: usize = 256;
pub const MAX_POINTS: usize = 1_000_000;

/// Shipped presets as `(name, file contents)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("paper_sec3_fig3", include_str!("../presets/paper_sec3_fig3.toml")),
    ("paper_sec4", include_str!("../presets/paper_sec4.toml")),
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    omega_a_hz: Option<f64>,
    omega_b_hz: Option<f64>,
    omega_f_hz: Option<f64>,
    omega1_ge_hz: Option<f64>,
    omega1_es_hz: Option<f64>,
    omega2_ge_hz: Option<f64>,
    omega2_es_hz: Option<f64>,
    g1_ge_hz: Option<f64>,
    g2_ge_hz: Option<f64>,
    gf_a_hz: Option<f64>,
    gf_b_hz: Option<f64>,
    kappa_a_inv_s: Option<f64>,
    kappa_b_inv_s: Option<f64>,
    kappa_f_inv_s: Option<f64>,
    gamma1_inv_s: Option<f64>,
    gamma2_inv_s: Option<f64>,

    n_max: Option<usize>,
    dt_s: Option<f64>,
    points: Option<usize>,
    grid_n: Option<usize>,

    experiment: Option<String>,
    deltas: Option<Vec<f64>>,
    gt_grid: Option<Vec<f64>>,
    panel: Option<String>,
    axis: Option<Vec<f64>>,
    sweep_from_hz: Option<f64>,
    sweep_to_hz: Option<f64>,
    sweep_step_hz: Option<f64>,
    out_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub omega_a_hz: f64,
    pub omega_b_hz: f64,
    pub omega_f_hz: f64,
    pub omega1_ge_hz: f64,
    pub omega1_es_hz: f64,
    pub omega2_ge_hz: f64,
    pub omega2_es_hz: f64,
    pub g1_ge_hz: f64,
    pub g2_ge_hz: f64,
    pub gf_a_hz: f64,
    pub gf_b_hz: f64,
    pub kappa_a_inv_s: f64,
    pub kappa_b_inv_s: f64,
    pub kappa_f_inv_s: f64,
    pub gamma1_inv_s: f64,
    pub gamma2_inv_s: f64,

    pub n_max: usize,
    pub dt_s: Option<f64>,
    pub points: usize,
    pub grid_n: usize,

    pub experiment: Option<String>,
    pub deltas: Option<Vec<f64>>,
    pub gt_grid: Option<Vec<f64>>,
    pub panel: Option<String>,
    pub axis: Option<Vec<f64>>,
    pub sweep_from_hz: Option<f64>,
    pub sweep_to_hz: Option<f64>,
    pub sweep_step_hz: Option<f64>,
    pub out_dir: Option<String>,
}

const EXPERIMENTS: &[&str] = &["check", "evolve", "cphase", "tomography", "fig3", "fig7", "sweep"];
const PANELS: &[&str] = &["a", "b", "c", "d", "e", "f"];

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn required(name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("missing required key `{name}`")))
}

fn range_error(name: &str, reason: &str) -> Error {
    Error::Config(format!("`{name}` {reason}"))
}

fn frequency(name: &str, v: Option<f64>) -> Result<f64> {
    let v = required(name, v)?;
    if !(v.is_finite() && v > 0.0 && v <= MAX_FREQUENCY_HZ) {
        return Err(range_error(
            name,
            &format!("must be in (0, {MAX_FREQUENCY_HZ:e}] Hz, got {v}"),
        ));
    }
    Ok(v)
}

fn coupling(name: &str, v: Option<f64>) -> Result<f64> {
    let v = required(name, v)?;
    if !(v.is_finite() && (0.0..=MAX_FREQUENCY_HZ).contains(&v)) {
        return Err(range_error(
            name,
            &format!("must be in [0, {MAX_FREQUENCY_HZ:e}] Hz, got {v}"),
        ));
    }
    Ok(v)
}

fn lifetime(name: &str, v: Option<f64>) -> Result<f64> {
    let v = required(name, v)?;
    if v.is_nan() || v <= 0.0 {
        return Err(range_error(name, &format!("must be > 0 s (inf for lossless), got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(span) => Error::Config(format!("line {}: {msg}", line_of(text, span.start))),
                None => Error::Config(msg),
            }
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(r: RawConfig) -> Result<Self> {
        let cfg = Self {
            omega_a_hz: frequency("omega_a_hz", r.omega_a_hz)?,
            omega_b_hz: frequency("omega_b_hz", r.omega_b_hz)?,
            omega_f_hz: frequency("omega_f_hz", r.omega_f_hz)?,
            omega1_ge_hz: frequency("omega1_ge_hz", r.omega1_ge_hz)?,
            omega1_es_hz: frequency("omega1_es_hz", r.omega1_es_hz)?,
            omega2_ge_hz: frequency("omega2_ge_hz", r.omega2_ge_hz)?,
            omega2_es_hz: frequency("omega2_es_hz", r.omega2_es_hz)?,
            g1_ge_hz: coupling("g1_ge_hz", r.g1_ge_hz)?,
            g2_ge_hz: coupling("g2_ge_hz", r.g2_ge_hz)?,
            gf_a_hz: coupling("gf_a_hz", r.gf_a_hz)?,
            gf_b_hz: coupling("gf_b_hz", r.gf_b_hz)?,
            kappa_a_inv_s: lifetime("kappa_a_inv_s", r.kappa_a_inv_s)?,
            kappa_b_inv_s: lifetime("kappa_b_inv_s", r.kappa_b_inv_s)?,
            kappa_f_inv_s: lifetime("kappa_f_inv_s", r.kappa_f_inv_s)?,
            gamma1_inv_s: lifetime("gamma1_inv_s", r.gamma1_inv_s)?,
            gamma2_inv_s: lifetime("gamma2_inv_s", r.gamma2_inv_s)?,
            n_max: r.n_max.unwrap_or(2),
            dt_s: r.dt_s,
            points: r.points.unwrap_or(200),
            grid_n: r.grid_n.unwrap_or(8),
            experiment: r.experiment,
            deltas: r.deltas,
            gt_grid: r.gt_grid,
            panel: r.panel,
            axis: r.axis,
            sweep_from_hz: r.sweep_from_hz,
            sweep_to_hz: r.sweep_to_hz,
            sweep_step_hz: r.sweep_step_hz,
            out_dir: r.out_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_N_MAX).contains(&self.n_max) {
            return Err(range_error("n_max", &format!("must be in [1, {MAX_N_MAX}]")));
        }
        if let Some(dt) = self.dt_s {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(range_error("dt_s", "must be finite and > 0"));
            }
        }
        if !(2..=MAX_POINTS).contains(&self.points) {
            return Err(range_error("points", &format!("must be in [2, {MAX_POINTS}]")));
        }
        if !(4..=MAX_GRID_N).contains(&self.grid_n) {
            return Err(range_error("grid_n", &format!("must be in [4, {MAX_GRID_N}]")));
        }
        if let Some(e) = &self.experiment {
            if !EXPERIMENTS.contains(&e.as_str()) {
                return Err(range_error("experiment", &format!("unknown experiment `{e}`")));
            }
        }
        if let Some(p) = &self.panel {
            if !PANELS.contains(&p.as_str()) {
                return Err(range_error("panel", &format!("unknown panel `{p}`")));
            }
        }
        if let Some(d) = &self.deltas {
            if d.is_empty() || d.iter().any(|x| !(x.is_finite() && *x > 1.0)) {
                return Err(range_error("deltas", "must be a non-empty list of values > 1"));
            }
        }
        for (name, list) in [("gt_grid", &self.gt_grid), ("axis", &self.axis)] {
            if let Some(v) = list {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(range_error(name, "must be a non-empty list of finite values"));
                }
            }
        }
        for (name, v) in [
            ("sweep_from_hz", self.sweep_from_hz),
            ("sweep_to_hz", self.sweep_to_hz),
            ("sweep_step_hz", self.sweep_step_hz),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(range_error(name, "must be finite and > 0"));
                }
            }
        }
        self.device()?;
        Ok(())
    }

    /// Device parameters in rad/s and 1/s.
    pub fn device(&self) -> Result<DeviceParams> {
        let w = |hz: f64| TWO_PI * hz;
        let p = DeviceParams {
            omega_a: w(self.omega_a_hz),
            omega_b: w(self.omega_b_hz),
            omega_f: w(self.omega_f_hz),
            omega1_ge: w(self.omega1_ge_hz),
            omega1_es: w(self.omega1_es_hz),
            omega2_ge: w(self.omega2_ge_hz),
            omega2_es: w(self.omega2_es_hz),
            g1_ge: w(self.g1_ge_hz),
            g2_ge: w(self.g2_ge_hz),
            gf_a: w(self.gf_a_hz),
            gf_b: w(self.gf_b_hz),
            kappa_a: lifetime_to_rate(self.kappa_a_inv_s),
            kappa_b: lifetime_to_rate(self.kappa_b_inv_s),
            kappa_f: lifetime_to_rate(self.kappa_f_inv_s),
            gamma1_ge: lifetime_to_rate(self.gamma1_inv_s),
            gamma2_ge: lifetime_to_rate(self.gamma2_inv_s),
        };
        p.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }

    pub fn options(&self) -> SimulationOptions {
        SimulationOptions {
            n_max: self.n_max,
            dt: self.dt_s,
            points: self.points,
            grid_n: self.grid_n,
            ..SimulationOptions::default()
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::parse(&text)
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
    RunConfig::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load() {
        let c = preset("paper_sec4").unwrap();
        assert_eq!(c.omega_a_hz, 6e9);
        assert_eq!(c.g1_ge_hz, 8e6);
        assert_eq!(c.gf_a_hz, 200e6);
        assert_eq!(c.kappa_f_inv_s, 50e-6);
        assert_eq!(c.gamma1_inv_s, 50e-6);
        let f = preset("paper_sec3_fig3").unwrap();
        assert!(f.device().unwrap().is_lossless());
        assert!(preset("nope").is_err());
    }

    #[test]
    fn empty_file_names_first_key() {
        let err = RunConfig::parse("").unwrap_err().to_string();
        assert!(err.contains("omega_a_hz"), "{err}");
    }

    #[test]
    fn negative_coupling_is_rejected() {
        let text = PRESETS[1].1.replace("g1_ge_hz = 8.0e6", "g1_ge_hz = -8.0e6");
        assert_ne!(text, PRESETS[1].1);
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("g1_ge_hz"), "{err}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = format!("{}\nbogus_key = 1\n", PRESETS[1].1);
        let line = text.lines().position(|l| l.starts_with("bogus_key")).unwrap() + 1;
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(
            err.contains(&format!("line {line}")) && err.contains("bogus_key"),
            "{err}"
        );
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = RunConfig::parse("omega_a_hz = 6e9\nomega_b_hz = = 1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn infinite_lifetime_is_lossless() {
        let text = PRESETS[1].1.replace("kappa_a_inv_s = 50.0e-6", "kappa_a_inv_s = inf");
        assert_ne!(text, PRESETS[1].1);
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.device().unwrap().kappa_a, 0.0);
        let bad = PRESETS[1].1.replace("kappa_a_inv_s = 50.0e-6", "kappa_a_inv_s = 0.0");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn option_ranges() {
        for (key, value) in [
            ("n_max", "0"),
            ("grid_n", "3"),
            ("points", "1"),
            ("dt_s", "-1.0"),
            ("panel", "\"z\""),
        ] {
            let text = format!("{}\n{key} = {value}\n", PRESETS[1].1);
            assert!(RunConfig::parse(&text).is_err(), "{key}");
        }
    }

    #[test]
    fn conversion_to_angular_units() {
        let p = preset("paper_sec4").unwrap().device().unwrap();
        assert!((p.g1_ge - TWO_PI * 8e6).abs() < 1e-6);
        assert!((p.kappa_a - 2e4).abs() < 1e-9);
        assert!((p.g2_es() / p.g1_ge - 3f64.sqrt()).abs() < 1e-12);
    }
}
