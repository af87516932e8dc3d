// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Every data file is a CSV whose first line is
//! `# manifest_sha256=<hex>`, paired with a `<stem>.manifest.json` that
//! echoes the configuration and run parameters. The hash covers everything
//! in the manifest except wall time, so identical inputs give identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{
    cphase_tomography, gate_timing, oracle_times, verify_analytic_oracle, ComputationalState, GateModel,
    GateSimulation, SimulationOptions,
};
use crate::config::{load_config, preset, RunConfig};
use crate::dynamics::{expectation, TimeGrid};
use crate::error::{Error, Result};
use crate::experiments::{
    default_fig3_deltas, default_fig7a_times, default_gt_grid, optimal_coupling_sweep, run_fcp_curve, run_fig3,
    run_fig7_panel, run_fig7a, ExperimentResult, Metadata, Panel,
};
use crate::hilbert::{hermitian_deviation, RA, RB, RF};
use crate::model::{build_h2q, device_space, DeviceParams};
use crate::normal_modes::{verify_h_double_prime, ModeTransform};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Random-time samples used by the analytic-oracle check.
pub const ORACLE_SAMPLES: usize = 20;

#[derive(Debug, Parser)]
#[command(
    name = "darkgate",
    version,
    about = "Two-qutrit c-phase gate through a dark line mode"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Shipped preset (`paper_sec3_fig3` or `paper_sec4`).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Photon cutoff per mode.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Fixed integration step in seconds.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run the invariant self-test battery.
    Check,
    /// Propagate one initial state and write populations.
    Evolve {
        /// gg, ge, eg, ee or max.
        #[arg(long)]
        state: String,
        /// Final time in seconds.
        #[arg(long)]
        t: f64,
        #[arg(long, default_value = "h2q")]
        model: String,
    },
    /// Gate fidelity of the maximal superposition versus time.
    Cphase,
    /// Four-column c-phase tomography.
    Tomography {
        /// Evaluation time in seconds (default: the gate time).
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value = "h2q")]
        model: String,
    },
    /// Gate fidelity versus gt for several line couplings.
    Fig3 {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        deltas: Option<Vec<f64>>,
    },
    /// Lossy gate curve (a) or one robustness scan (b-f).
    Fig7 {
        #[arg(long)]
        panel: Option<String>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        axis: Option<Vec<f64>>,
    },
    /// Scan of q1's coupling with q2's coupling slaved to the gate timing.
    Sweep {
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Evolve { .. } => "evolve",
            Command::Cphase => "cphase",
            Command::Tomography { .. } => "tomography",
            Command::Fig3 { .. } => "fig3",
            Command::Fig7 { .. } => "fig7",
            Command::Sweep { .. } => "sweep",
        }
    }

    fn default_preset(&self) -> &'static str {
        match self {
            Command::Fig3 { .. } => "paper_sec3_fig3",
            _ => "paper_sec4",
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::StepTooLarge { .. } => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVARIANT,
    }
}

/// Resolves the configuration and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => load_config(path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("{}: {io}", path.display())),
            other => other,
        })?,
        (None, Some(name)) => preset(name)?,
        (None, None) => preset(cli.command.default_preset())?,
    };
    if let Some(n) = cli.nmax {
        cfg.n_max = n;
    }
    if let Some(dt) = cli.dt {
        cfg.dt_s = Some(dt);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Files staged under temporary names until the run succeeds.
struct Outputs {
    dir: PathBuf,
    staged: Vec<(PathBuf, PathBuf)>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Self {
        Self {
            dir,
            staged: Vec::new(),
        }
    }

    fn stage(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let fin = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.partial"));
        self.staged.push((tmp.clone(), fin));
        fs::write(&tmp, contents)?;
        Ok(())
    }

    fn commit(mut self) -> Result<Vec<PathBuf>> {
        let staged = std::mem::take(&mut self.staged);
        let mut done = Vec::new();
        for (tmp, fin) in &staged {
            if let Err(e) = fs::rename(tmp, fin) {
                for p in &done {
                    let _ = fs::remove_file(p);
                }
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                return Err(e.into());
            }
            done.push(fin.clone());
        }
        Ok(done)
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        for (tmp, _) in &self.staged {
            let _ = fs::remove_file(tmp);
        }
    }
}

/// Everything that determines a data file.
#[derive(Debug, Clone, Serialize)]
struct Reproducible<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    request: serde_json::Value,
    config: &'a RunConfig,
    run: Option<RunRecord<'a>>,
    files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
struct RunRecord<'a> {
    params: &'a [DeviceParams],
    options: &'a SimulationOptions,
    dt: f64,
    notes: &'a std::collections::BTreeMap<String, String>,
}

impl<'a> From<&'a Metadata> for RunRecord<'a> {
    fn from(m: &'a Metadata) -> Self {
        Self {
            params: &m.params,
            options: &m.options,
            dt: m.dt,
            notes: &m.notes,
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    manifest_sha256: String,
    wall_time_s: f64,
    #[serde(flatten)]
    reproducible: Reproducible<'a>,
}

fn manifest_hash(r: &Reproducible<'_>) -> Result<String> {
    let bytes = serde_json::to_vec(r).map_err(|e| Error::Invariant(format!("manifest serialization: {e}")))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// Full double precision, `.` decimal separator.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// CSV body: hash comment, header row, one row per axis value.
pub fn render_csv(hash: &str, columns: &[(&str, &[f64])]) -> String {
    let mut out = format!("# manifest_sha256={hash}\n");
    let header: Vec<&str> = columns.iter().map(|(n, _)| *n).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let rows = columns.first().map_or(0, |(_, v)| v.len());
    for r in 0..rows {
        let cells: Vec<String> = columns.iter().map(|(_, v)| format_number(v[r])).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

struct Table<'a> {
    stem: String,
    columns: Vec<(&'a str, &'a [f64])>,
}

fn emit(
    outputs: &mut Outputs,
    reproducible: Reproducible<'_>,
    tables: &[Table<'_>],
    wall_time_s: f64,
) -> Result<String> {
    let mut reproducible = reproducible;
    reproducible.files = tables.iter().map(|t| format!("{}.csv", t.stem)).collect();
    let hash = manifest_hash(&reproducible)?;
    for t in tables {
        outputs.stage(&format!("{}.csv", t.stem), render_csv(&hash, &t.columns).as_bytes())?;
    }
    let stem = tables.first().map_or("run", |t| t.stem.as_str()).to_string();
    let manifest = Manifest {
        manifest_sha256: hash.clone(),
        wall_time_s,
        reproducible,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Invariant(e.to_string()))?;
    outputs.stage(&format!("{stem}.manifest.json"), json.as_bytes())?;
    Ok(hash)
}

fn result_tables(r: &ExperimentResult) -> Vec<Table<'_>> {
    let axis = (r.axis.name.as_str(), r.axis.values.as_slice());
    let mut main = vec![axis];
    main.extend(r.fidelity.iter().map(|s| (s.name.as_str(), s.values.as_slice())));
    let mut tables = vec![Table {
        stem: r.name.clone(),
        columns: main,
    }];
    if !(r.leakage.is_empty() && r.extra.is_empty()) {
        let mut diag = vec![axis];
        diag.extend(
            r.leakage
                .iter()
                .chain(&r.extra)
                .map(|s| (s.name.as_str(), s.values.as_slice())),
        );
        tables.push(Table {
            stem: format!("{}_diagnostics", r.name),
            columns: diag,
        });
    }
    tables
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn check(name: &'static str, value: f64, threshold: f64) -> CheckResult {
    CheckResult {
        name,
        value,
        threshold,
        pass: value.is_finite() && value < threshold,
    }
}

/// The resonant two-level version of a device: every frequency at `ω_a`, both
/// line couplings at `gf_a`.
pub fn resonant_qubit_device(p: &DeviceParams) -> DeviceParams {
    let mut q = *p;
    q.omega_b = p.omega_a;
    q.omega_f = p.omega_a;
    q.omega1_ge = p.omega_a;
    q.omega2_ge = p.omega_a;
    q.gf_b = p.gf_a;
    q
}

/// Analytic-oracle agreement at [`ORACLE_SAMPLES`] times over two gate periods.
pub fn oracle_checks(p: &DeviceParams, n_max: usize) -> Result<Vec<CheckResult>> {
    let t_gate = gate_timing(1, 1, p.g1_ge)?.t_gate;
    let report = verify_analytic_oracle(p, &oracle_times(t_gate, ORACLE_SAMPLES), n_max)?;
    Ok(vec![
        check("analytic_oracle_population", report.max_population_error, 1e-10),
        check("analytic_oracle_infidelity", report.max_infidelity, 1e-9),
    ])
}

/// Invariant battery on the configured device.
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let p = cfg.device()?;
    let opts = cfg.options();
    let mut out = Vec::new();

    let space = device_space(&p, opts.n_max)?;
    let h = build_h2q(&p, &space)?;
    let scale = 1.0 + h.at(0.0).max_abs();
    out.push(check(
        "h2q_conserves_excitations",
        h.commutator_residual(&space.number_operator())? / scale,
        1e-12,
    ));
    let t_gate = gate_timing(1, 1, p.g1_ge)?.t_gate;
    let herm = (0..5)
        .map(|k| hermitian_deviation(h.at(k as f64 * t_gate / 4.0).matrix()) / scale)
        .fold(0.0f64, f64::max);
    out.push(check("h2q_hermitian", herm, 1e-12));

    out.push(check(
        "mode_transform_unitary",
        ModeTransform::new().unitarity_error(),
        1e-14,
    ));
    let hpp = verify_h_double_prime(&resonant_qubit_device(&p))?;
    out.push(check("h_double_prime_residual_n1", hpp.residual_n1, 1e-10));
    out.push(check("h_double_prime_residual_n2", hpp.residual_n2, 1e-8));
    out.push(check("collective_spectrum", hpp.spectrum_error, 1e-10));

    out.extend(oracle_checks(&p, opts.n_max)?);

    let timing = gate_timing(1, 1, p.g1_ge)?;
    let gp = p.g1_ge.powi(2) + timing.g2_es_required.powi(2);
    let odd = (p.g1_ge / 2f64.sqrt() * timing.t_gate / std::f64::consts::PI - 1.0).abs();
    let even = ((gp / 2.0).sqrt() * timing.t_gate / (2.0 * std::f64::consts::PI) - 1.0).abs();
    out.push(check("gate_timing_conditions", odd.max(even), 1e-12));

    // a short master-equation run of the configured device
    let sim = GateSimulation::new(&p, GateModel::H2q, &opts)?;
    let grid = TimeGrid::uniform(0.1 * t_gate, 5)?;
    let traj = sim.propagate(&sim.psi_max(), &grid, true)?;
    let trace = traj
        .max_abs("trace_error")
        .or(traj.max_abs("norm_error"))
        .unwrap_or(0.0);
    out.push(check("trace_or_norm_drift", trace, 1e-8));
    let min_eig = traj
        .observable("min_eigenvalue")
        .map_or(0.0, |v| v.iter().fold(0.0f64, |m, &e| m.min(e)));
    out.push(check("negative_eigenvalue", -min_eig, 1e-8));
    Ok(out)
}

fn parse_model(s: &str) -> Result<GateModel> {
    s.parse()
}

fn require_oracle(p: &DeviceParams, n_max: usize, log: &mut dyn Write) -> Result<()> {
    for c in oracle_checks(p, n_max)? {
        if !c.pass {
            writeln!(log, "FAIL {} = {:e} (limit {:e})", c.name, c.value, c.threshold)?;
            return Err(Error::Invariant(format!("{} failed before the run", c.name)));
        }
    }
    Ok(())
}

/// Runs one command; returns the process exit status.
pub fn run(cli: &Cli, log: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli, log) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, log: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let cfg = resolve_config(cli)?;
    let p = cfg.device()?;
    let opts = cfg.options();
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut outputs = Outputs::new(out_dir);
    let command = cli.command.name();
    let base = |request: serde_json::Value| Reproducible {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        request,
        config: &cfg,
        run: None,
        files: Vec::new(),
    };

    let code = match &cli.command {
        Command::Check => {
            let results = run_checks(&cfg)?;
            let mut ok = true;
            for c in &results {
                ok &= c.pass;
                let tag = if c.pass { "PASS" } else { "FAIL" };
                writeln!(log, "{tag} {} = {:e} (limit {:e})", c.name, c.value, c.threshold)?;
            }
            let values: Vec<f64> = results.iter().map(|c| c.value).collect();
            let limits: Vec<f64> = results.iter().map(|c| c.threshold).collect();
            let pass: Vec<f64> = results.iter().map(|c| if c.pass { 1.0 } else { 0.0 }).collect();
            let index: Vec<f64> = (0..results.len()).map(|i| i as f64).collect();
            let names: Vec<&str> = results.iter().map(|c| c.name).collect();
            let request = serde_json::json!({ "checks": names });
            emit(
                &mut outputs,
                base(request),
                &[Table {
                    stem: "check".into(),
                    columns: vec![
                        ("index", &index),
                        ("value", &values),
                        ("limit", &limits),
                        ("pass", &pass),
                    ],
                }],
                started.elapsed().as_secs_f64(),
            )?;
            if ok {
                EXIT_OK
            } else {
                EXIT_INVARIANT
            }
        }
        Command::Evolve { state, t, model } => {
            let model = parse_model(model)?;
            let sim = GateSimulation::new(&p, model, &opts)?;
            let psi0 = if state == "max" {
                sim.psi_max()
            } else {
                sim.basis_state(state.parse::<ComputationalState>()?)
            };
            let grid = TimeGrid::uniform(*t, opts.points)?;
            let traj = sim.propagate(&psi0, &grid, true)?;
            let idx = sim.computational_indices();
            let pops: Vec<Vec<f64>> = idx
                .iter()
                .map(|&i| traj.states.iter().map(|s| s.population(i)).collect())
                .collect();
            let leak: Vec<f64> = traj.states.iter().map(|s| sim.leakage(s)).collect();
            let mut photons = Vec::new();
            if model != GateModel::HeffPrime {
                for site in [RA, RB, RF] {
                    let n = sim.site_number(site)?;
                    photons.push(
                        traj.states
                            .iter()
                            .map(|s| expectation(&n, s))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
            } else {
                let n = sim.site_number(crate::hilbert::RC)?;
                photons.push(
                    traj.states
                        .iter()
                        .map(|s| expectation(&n, s))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            let mut columns: Vec<(&str, &[f64])> = vec![("t", &traj.times)];
            for (name, v) in ["P_gg", "P_ge", "P_eg", "P_ee"].iter().zip(&pops) {
                columns.push((name, v));
            }
            columns.push(("leakage", &leak));
            let photon_names: &[&str] = if photons.len() == 3 {
                &["n_a", "n_b", "n_f"]
            } else {
                &["n_c"]
            };
            for (name, v) in photon_names.iter().zip(&photons) {
                columns.push((name, v));
            }
            let request = serde_json::json!({ "state": state, "t": t, "model": format!("{model:?}") });
            emit(
                &mut outputs,
                base(request),
                &[Table {
                    stem: format!("evolve_{state}"),
                    columns,
                }],
                started.elapsed().as_secs_f64(),
            )?;
            EXIT_OK
        }
        Command::Cphase => {
            require_oracle(&p, opts.n_max, log)?;
            let t_gate = gate_timing(1, 1, p.g1_ge)?.t_gate;
            let times = TimeGrid::uniform(1.2 * t_gate, opts.points)?.times().to_vec();
            let r = run_fcp_curve("cphase", &p, GateModel::H2q, &times, &opts)?;
            let (t, f) = r.peak("F_cp").expect("non-empty");
            writeln!(
                log,
                "peak F_cp = {f:.6} at t = {:.3} ns (gate time {:.3} ns)",
                t * 1e9,
                t_gate * 1e9
            )?;
            let mut rep = base(serde_json::json!({}));
            rep.run = Some(RunRecord::from(&r.metadata));
            emit(&mut outputs, rep, &result_tables(&r), started.elapsed().as_secs_f64())?;
            EXIT_OK
        }
        Command::Tomography { t, model } => {
            let model = parse_model(model)?;
            let tomo = cphase_tomography(&p, model, *t, &opts)?;
            writeln!(log, "c-phase tomography at t = {:e} s ({model:?})", tomo.time)?;
            for i in 0..4 {
                let row: Vec<String> = (0..4)
                    .map(|j| {
                        let z = tomo.matrix[(i, j)];
                        format!("{:+.6}{:+.6}i", z.re, z.im)
                    })
                    .collect();
                writeln!(log, "  {}", row.join("  "))?;
            }
            writeln!(log, "deviation from diag(1, 1, -1, 1): {:e}", tomo.deviation)?;
            writeln!(log, "leakage per column: {:?}", tomo.leakage)?;
            if tomo.degraded {
                writeln!(log, "warning: leakage above 0.05, tomography degraded")?;
            }
            let mut rows = Vec::new();
            let mut cols = Vec::new();
            let mut re = Vec::new();
            let mut im = Vec::new();
            for i in 0..4 {
                for j in 0..4 {
                    rows.push(i as f64);
                    cols.push(j as f64);
                    re.push(tomo.matrix[(i, j)].re);
                    im.push(tomo.matrix[(i, j)].im);
                }
            }
            let request = serde_json::json!({
                "t": tomo.time,
                "model": format!("{model:?}"),
                "deviation": tomo.deviation,
                "leakage": tomo.leakage,
                "degraded": tomo.degraded,
            });
            emit(
                &mut outputs,
                base(request),
                &[Table {
                    stem: "tomography".into(),
                    columns: vec![("row", &rows), ("col", &cols), ("re", &re), ("im", &im)],
                }],
                started.elapsed().as_secs_f64(),
            )?;
            EXIT_OK
        }
        Command::Fig3 { deltas } => {
            require_oracle(&p, opts.n_max, log)?;
            let deltas = deltas
                .clone()
                .or_else(|| cfg.deltas.clone())
                .unwrap_or_else(default_fig3_deltas);
            let gt = cfg.gt_grid.clone().unwrap_or_else(default_gt_grid);
            let r = run_fig3(&p, &deltas, &gt, &opts)?;
            for s in &r.fidelity {
                let (x, f) = r.peak(&s.name).expect("non-empty");
                writeln!(log, "{}: peak {f:.6} at gt = {x:.4}", s.name)?;
            }
            let mut rep = base(serde_json::json!({ "deltas": deltas, "gt_grid": gt }));
            rep.run = Some(RunRecord::from(&r.metadata));
            emit(&mut outputs, rep, &result_tables(&r), started.elapsed().as_secs_f64())?;
            EXIT_OK
        }
        Command::Fig7 { panel, axis } => {
            require_oracle(&p, opts.n_max, log)?;
            let panel = panel
                .clone()
                .or_else(|| cfg.panel.clone())
                .unwrap_or_else(|| "a".into());
            let axis = axis.clone().or_else(|| cfg.axis.clone());
            let r = if panel == "a" {
                let times = axis.clone().unwrap_or_else(default_fig7a_times);
                run_fig7a(&p, &times, &opts)?
            } else {
                run_fig7_panel(panel.parse::<Panel>()?, &p, axis.as_deref(), &opts)?
            };
            let s = &r.fidelity[0];
            let (x, f) = r.peak(&s.name).expect("non-empty");
            writeln!(
                log,
                "{}: best {} = {f:.6} at {} = {x:e} {}",
                r.name, s.name, r.axis.name, r.axis.units
            )?;
            let mut rep = base(serde_json::json!({ "panel": panel, "axis": axis }));
            rep.run = Some(RunRecord::from(&r.metadata));
            emit(&mut outputs, rep, &result_tables(&r), started.elapsed().as_secs_f64())?;
            EXIT_OK
        }
        Command::Sweep { from, to, step } => {
            require_oracle(&p, opts.n_max, log)?;
            let from = from.or(cfg.sweep_from_hz).unwrap_or(1e6);
            let to = to.or(cfg.sweep_to_hz).unwrap_or(100e6);
            let step = step.or(cfg.sweep_step_hz).unwrap_or(1e6);
            let (best, r) = optimal_coupling_sweep(&p, from, to, step, &opts)?;
            writeln!(log, "best g1_ge/2pi = {:.3} MHz", best / 1e6)?;
            let mut rep = base(serde_json::json!({ "from_hz": from, "to_hz": to, "step_hz": step }));
            rep.run = Some(RunRecord::from(&r.metadata));
            emit(&mut outputs, rep, &result_tables(&r), started.elapsed().as_secs_f64())?;
            EXIT_OK
        }
    };
    for path in outputs.commit()? {
        writeln!(log, "wrote {}", path.display())?;
    }
    Ok(code)
}

/// Runs with `std::env::args`; progress on stdout, errors on stderr.
pub fn main_with_args() -> i32 {
    let cli = Cli::parse();
    run(&cli, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Reads the manifest hash from a CSV written by this tool.
pub fn csv_manifest_hash(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .next()
        .and_then(|l| l.strip_prefix("# manifest_sha256="))
        .map(str::to_string)
        .ok_or_else(|| Error::Invariant(format!("{} has no manifest header", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, 1.0, -2.5e-9, std::f64::consts::PI, 0.1 + 0.2, f64::MIN_POSITIVE] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_number(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let a = [0.0, 1.0];
        let b = [0.5, 0.25];
        let csv = render_csv("abc", &[("x", &a), ("y", &b)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# manifest_sha256=abc");
        assert_eq!(lines[1], "x,y");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0.0000000000000000e0,5.0000000000000000e-1"));
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
        assert_eq!(exit_code(&Error::Invariant("x".into())), EXIT_INVARIANT);
    }

    #[test]
    fn checks_pass_on_presets() {
        for name in ["paper_sec4", "paper_sec3_fig3"] {
            let cfg = preset(name).unwrap();
            for c in run_checks(&cfg).unwrap() {
                assert!(c.pass, "{name}: {c:?}");
            }
        }
    }

    #[test]
    fn staged_outputs_vanish_without_commit() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut o = Outputs::new(dir.path().to_path_buf());
            o.stage("a.csv", b"1").unwrap();
        }
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
        let mut o = Outputs::new(dir.path().to_path_buf());
        o.stage("a.csv", b"1").unwrap();
        let files = o.commit().unwrap();
        assert_eq!(files, vec![dir.path().join("a.csv")]);
    }
}
