//! `nmcavity run --config <path> [--out <dir>] [--threads N]`.
//!
//! A run configuration is a JSON object naming one command (`evolve`,
//! `measure`, `sweep` or `phase-diagram`), a model block and the blocks that
//! command needs. All numbers are dimensionless ratios to `reference_rate`
//! (default 1): the solvers see rates `ratio × reference_rate` and times
//! `ratio / reference_rate`, so CSV times are in units of the reference
//! rate's inverse. A `manifest.json` written by an earlier run is accepted
//! as a configuration and reproduces that run.
//!
//! Exit codes: 0 success, 1 I/O, 2 configuration, 3 validation, 4 solver.
//! Failures print `{"error": {"kind", "message", ...}}` on stderr and leave
//! no artifacts behind.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{evolve, DynamicsError, QubitSeries, Trajectory};
use crate::linear_ode::{IntegratorStats, Tolerances};
use crate::measures::{blp_measure_refined, witness_series, MeasureError, MeasureReport, MeasureSettings};
use crate::model::{validate, ModelError, ModelParams, Reservoir, TimeGrid, ValidatedParams};
use crate::sweep::{
    linspace, outcome_is_truncated, outcome_report, phase_diagram, sweep_1d, with_threads, PhaseAxes,
    PointError, RunSettings, SweepError, SweepParam, SweepSpec,
};

pub const THREADS_ENV: &str = "NMCAVITY_THREADS";

const CONVENTION: &str = "config values are ratios to reference_rate; solver rates = ratio * reference_rate; \
solver and CSV times = ratio / reference_rate; N, D and populations are dimensionless; \
fixed horizon for every point of a sweep";

#[derive(Debug, Parser)]
#[command(name = "nmcavity", version, about = "Qubit coupled to two coupled dissipative cavity modes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Execute a JSON run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for sweeps and phase diagrams.
        #[arg(long, env = THREADS_ENV, value_parser = clap::value_parser!(u16).range(1..))]
        threads: Option<u16>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Evolve,
    Measure,
    Sweep,
    PhaseDiagram,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub t_max: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub kappa1: f64,
    pub kappa2: f64,
    pub omega_mm: f64,
    pub reservoir: Reservoir,
    #[serde(default)]
    pub time: Option<GridBlock>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceBlock {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureBlock {
    pub eps: Option<f64>,
    pub tail_tol: Option<f64>,
    pub rise_floor: Option<f64>,
    /// Replaces the grid horizon, keeping its sample spacing.
    pub t_max: Option<f64>,
}

/// Either an explicit list or `{start, stop, steps}` (inclusive).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AxisBlock {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize },
}

impl AxisBlock {
    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisBlock::Values(v) => v.clone(),
            AxisBlock::Range { start, stop, steps } => linspace(*start, *stop, *steps),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub param: SweepParam,
    pub values: AxisBlock,
    #[serde(default)]
    pub overrides: BTreeMap<SweepParam, f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseBlock {
    pub kappa: Option<AxisBlock>,
    pub omega: Option<AxisBlock>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "unit_rate")]
    pub reference_rate: f64,
    pub model: ModelBlock,
    #[serde(default)]
    pub time: Option<GridBlock>,
    #[serde(default)]
    pub tolerances: Option<ToleranceBlock>,
    #[serde(default)]
    pub measure: Option<MeasureBlock>,
    /// Initial qubit amplitude as `[re, im]`; Lorentzian runs only.
    #[serde(default)]
    pub initial_h: Option<Complex64>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub phase: Option<PhaseBlock>,
    #[serde(default)]
    pub output: Option<OutputBlock>,
}

fn unit_rate() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Io,
    Config,
    Validation,
    Solver,
}

impl ErrorKind {
    pub fn exit_code(&self) -> i32 {
        match self {
            ErrorKind::Io => 1,
            ErrorKind::Config => 2,
            ErrorKind::Validation => 3,
            ErrorKind::Solver => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub details: Option<Value>,
}

impl CliError {
    fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            details: None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut err = json!({ "kind": self.kind, "message": self.message });
        if let Some(d) = &self.details {
            err["details"] = d.clone();
        }
        json!({ "error": err })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::new(ErrorKind::Validation, e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        let kind = match e {
            DynamicsError::Solver(_) => ErrorKind::Solver,
            _ => ErrorKind::Validation,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        let mut err = CliError::new(ErrorKind::Solver, e.to_string());
        if let MeasureError::TailTooLarge { report, .. } = &e {
            err.details = Some(json!({ "lower_bound_report": report }));
        }
        err
    }
}

impl From<PointError> for CliError {
    fn from(e: PointError) -> Self {
        match e {
            PointError::Model(e) => e.into(),
            PointError::Dynamics(e) => e.into(),
            PointError::Measure(e) => e.into(),
            e @ PointError::UnsupportedParam(..) => CliError::new(ErrorKind::Validation, e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        let kind = match e {
            SweepError::Pool(_) => ErrorKind::Io,
            SweepError::Point { .. } => ErrorKind::Solver,
            _ => ErrorKind::Validation,
        };
        CliError::new(kind, e.to_string())
    }
}

/// A parsed configuration together with the JSON it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub raw: Value,
}

/// Parse a run configuration, unwrapping it from a manifest if needed.
pub fn parse_config(text: &str) -> Result<LoadedConfig, CliError> {
    let config_err = |e: serde_json::Error| CliError::new(ErrorKind::Config, format!("invalid config: {e}"));
    let mut raw: Value = serde_json::from_str(text).map_err(config_err)?;
    if raw.get("tool").is_some() {
        if let Some(inner) = raw.get("config") {
            raw = inner.clone();
        }
    }
    let config = RunConfig::deserialize(&raw).map_err(config_err)?;
    Ok(LoadedConfig { config, raw })
}

/// Physical-unit inputs derived from a configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ValidatedParams,
    pub settings: RunSettings,
}

pub fn resolve(config: &RunConfig) -> Result<Resolved, CliError> {
    let rate = config.reference_rate;
    if !(rate.is_finite() && rate > 0.0) {
        return Err(CliError::new(
            ErrorKind::Validation,
            format!("reference_rate must be finite and positive, got {rate}"),
        ));
    }
    let m = &config.model;
    let ratio_params = ModelParams {
        kappa1: m.kappa1,
        kappa2: m.kappa2,
        omega_mm: m.omega_mm,
        reservoir: m.reservoir,
    };
    let params = validate(&validate(&ratio_params)?.params().scaled(rate))?;

    let block = match (m.time, config.time) {
        (Some(_), Some(_)) => {
            return Err(CliError::new(ErrorKind::Config, "time grid given both in model and at top level"))
        }
        (Some(g), None) | (None, Some(g)) => g,
        (None, None) => return Err(CliError::new(ErrorKind::Config, "missing time grid block")),
    };
    let mut grid = TimeGrid::new(block.t_max, block.n_samples)?;

    let mut measure = MeasureSettings::default();
    if let Some(mb) = config.measure {
        if let Some(t_max) = mb.t_max {
            grid = TimeGrid::with_spacing(t_max, grid.dt())?;
        }
        measure.eps = mb.eps.unwrap_or(measure.eps);
        measure.tail_tol = mb.tail_tol.unwrap_or(measure.tail_tol);
        measure.rise_floor = mb.rise_floor.unwrap_or(measure.rise_floor);
    }
    for (name, v) in [("eps", measure.eps), ("tail_tol", measure.tail_tol), ("rise_floor", measure.rise_floor)] {
        if !(v.is_finite() && v >= 0.0) || (name == "eps" && v == 0.0) {
            return Err(CliError::new(ErrorKind::Validation, format!("measure.{name} out of range: {v}")));
        }
    }
    let grid = grid.scaled(1.0 / rate)?;

    let mut tol = Tolerances::default();
    if let Some(tb) = config.tolerances {
        tol.rtol = tb.rtol.unwrap_or(tol.rtol);
        tol.atol = tb.atol.unwrap_or(tol.atol);
    }
    let h0 = config.initial_h.unwrap_or(Complex64::new(1.0, 0.0));
    Ok(Resolved {
        params,
        settings: RunSettings {
            grid,
            tol,
            measure,
            h0,
        },
    })
}

/// One file to be written into the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub contents: Vec<u8>,
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub stats: IntegratorStats,
    pub summary: Value,
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn csv_artifact(name: &'static str, header: &str, rows: impl Iterator<Item = String>) -> Artifact {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    Artifact {
        name,
        contents: s.into_bytes(),
    }
}

fn trajectory_artifacts(traj: &Trajectory) -> Result<Vec<Artifact>, CliError> {
    let w = match traj {
        Trajectory::Markovian(_) => Some(witness_series(traj)?.w_values),
        Trajectory::Lorentzian(_) => None,
    };
    let moduli = traj.mode_moduli();
    let times = traj.times();
    let rows = (0..traj.n_samples()).map(|i| {
        let h = traj.qubit_amplitude(i);
        let (c1, c2) = moduli[i];
        let w = w.as_ref().map_or(String::new(), |w| num(w[i]));
        format!(
            "{},{},{},{},{},{},{},{}",
            num(times[i]),
            num(h.re),
            num(h.im),
            num(h.norm()),
            num(c1),
            num(c2),
            num(h.norm()),
            w
        )
    });
    let trajectory = csv_artifact("trajectory.csv", "t,re_h,im_h,abs_h,abs_c1,abs_c2,D,W", rows);

    let lost = traj.lost_population();
    let rows = (0..traj.n_samples()).map(|i| {
        let (c1, c2) = moduli[i];
        format!(
            "{},{},{},{},{}",
            num(times[i]),
            num(traj.qubit_amplitude(i).norm_sqr()),
            num(c1 * c1),
            num(c2 * c2),
            num(lost[i])
        )
    });
    let populations = csv_artifact("populations.csv", "t,p_qubit,p_mode1,p_mode2,p_reservoir", rows);
    Ok(vec![trajectory, populations])
}

fn horizon_json(settings: &RunSettings) -> Value {
    json!({
        "t_max": settings.grid.t_max(),
        "n_samples": settings.grid.n_samples(),
        "dt": settings.grid.dt(),
    })
}

fn point_status(outcome: &Result<MeasureReport, PointError>) -> &'static str {
    if outcome.is_ok() {
        "ok"
    } else if outcome_is_truncated(outcome) {
        "truncated"
    } else {
        "failed"
    }
}

fn point_json(outcome: &Result<MeasureReport, PointError>) -> Value {
    let mut v = json!({ "status": point_status(outcome) });
    if let Some(r) = outcome_report(outcome) {
        v["report"] = json!(r);
    }
    if let Err(e) = outcome {
        v["error"] = json!(e.to_string());
    }
    v
}

fn require<'a, T>(block: &'a Option<T>, name: &str, command: &str) -> Result<&'a T, CliError> {
    block
        .as_ref()
        .ok_or_else(|| CliError::new(ErrorKind::Config, format!("command `{command}` needs a `{name}` block")))
}

/// Execute a configuration without writing anything.
pub fn execute(config: &RunConfig) -> Result<RunOutput, CliError> {
    let Resolved { params, settings } = resolve(config)?;
    let rate = config.reference_rate;
    match config.command {
        Command::Evolve => {
            let traj = evolve(&params, &settings.grid, &settings.tol, settings.h0)?;
            let artifacts = trajectory_artifacts(&traj)?;
            Ok(RunOutput {
                artifacts,
                stats: *traj.stats(),
                summary: json!({ "final_abs_h": traj.last_qubit_modulus() }),
            })
        }
        Command::Measure => {
            let traj = evolve(&params, &settings.grid, &settings.tol, settings.h0)?;
            let report = blp_measure_refined(&traj, &settings.measure)?;
            let doc = json!({
                "report": report,
                "settings": settings.measure,
                "horizon": horizon_json(&settings),
            });
            Ok(RunOutput {
                artifacts: vec![Artifact {
                    name: "measure.json",
                    contents: json_bytes(&doc),
                }],
                stats: *traj.stats(),
                summary: json!({ "n_value": report.n_value, "regime": report.regime }),
            })
        }
        Command::Sweep => {
            let block = require(&config.sweep, "sweep", "sweep")?;
            let ratios = block.values.values();
            let mut spec = SweepSpec::new(params, block.param, ratios.iter().map(|v| v * rate).collect(), settings)?;
            for (p, v) in &block.overrides {
                spec = spec.with_override(*p, v * rate);
            }
            let points = sweep_1d(&spec);
            let mut stats = IntegratorStats::default();
            for s in points.iter().filter_map(|p| p.stats.as_ref()) {
                stats.merge(s);
            }
            let rows = ratios.iter().zip(&points).map(|(ratio, p)| {
                let r = p.report();
                format!(
                    "{},{},{},{},{}",
                    num(*ratio),
                    r.map_or(String::new(), |r| num(r.n_value)),
                    r.map_or("", |r| r.regime.as_str()),
                    r.map_or(String::new(), |r| num(r.truncation_tail)),
                    point_status(&p.outcome)
                )
            });
            let header = format!("{},n_value,regime,truncation_tail,status", block.param);
            let sweep_csv = csv_artifact("sweep.csv", &header, rows);
            let detail: Vec<Value> = ratios
                .iter()
                .zip(&points)
                .map(|(ratio, p)| {
                    let mut v = point_json(&p.outcome);
                    v["value"] = json!(ratio);
                    v
                })
                .collect();
            let doc = json!({
                "param": block.param,
                "points": detail,
                "horizon": horizon_json(&settings),
                "settings": settings.measure,
            });
            let failures = points.iter().filter(|p| p.report().is_none()).count();
            let truncated = points.iter().filter(|p| p.is_truncated()).count();
            Ok(RunOutput {
                artifacts: vec![
                    sweep_csv,
                    Artifact {
                        name: "sweep.json",
                        contents: json_bytes(&doc),
                    },
                ],
                stats,
                summary: json!({ "points": points.len(), "failed": failures, "truncated": truncated }),
            })
        }
        Command::PhaseDiagram => {
            let block = config.phase.clone().unwrap_or_default();
            let default = PhaseAxes::default();
            let kappa_ratios = block.kappa.map_or(default.kappa, |a| a.values());
            let omega_ratios = block.omega.map_or(default.omega, |a| a.values());
            let axes = PhaseAxes {
                kappa: kappa_ratios.iter().map(|v| v * rate).collect(),
                omega: omega_ratios.iter().map(|v| v * rate).collect(),
            };
            let pd = phase_diagram(&axes, &params, &settings)?;
            let mut rows = Vec::with_capacity(kappa_ratios.len() * omega_ratios.len());
            let mut truncated = Vec::new();
            let mut failed = Vec::new();
            for (i, k) in kappa_ratios.iter().enumerate() {
                for (j, om) in omega_ratios.iter().enumerate() {
                    let cell = &pd.cells[i][j];
                    let r = outcome_report(cell);
                    rows.push(format!(
                        "{},{},{},{}",
                        num(*k),
                        num(*om),
                        r.map_or(String::new(), |r| num(r.n_value)),
                        r.map_or("", |r| r.regime.as_str())
                    ));
                    if let Some(r) = r.filter(|_| outcome_is_truncated(cell)) {
                        truncated.push(json!({ "i": i, "j": j, "truncation_tail": r.truncation_tail }));
                    }
                    if let (None, Err(e)) = (r, cell) {
                        failed.push(json!({ "i": i, "j": j, "error": e.to_string() }));
                    }
                }
            }
            let doc = json!({
                "kappa_values": kappa_ratios,
                "omega_values": omega_ratios,
                "truncated_cells": truncated,
                "failed_cells": failed,
                "horizon": horizon_json(&settings),
                "settings": settings.measure,
            });
            Ok(RunOutput {
                artifacts: vec![
                    csv_artifact("phase.csv", "kappa,omega,n_value,regime", rows.into_iter()),
                    Artifact {
                        name: "phase.json",
                        contents: json_bytes(&doc),
                    },
                ],
                stats: pd.stats,
                summary: json!({
                    "cells": kappa_ratios.len() * omega_ratios.len(),
                    "truncated": pd.truncated_cells(),
                    "failed": pd.failed_cells(),
                }),
            })
        }
    }
}

/// Write every artifact under a temporary name, then rename them into place.
pub fn write_atomically(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    let io = |what: &str, p: &Path, e: std::io::Error| {
        CliError::new(ErrorKind::Io, format!("{what} {}: {e}", p.display()))
    };
    std::fs::create_dir_all(dir).map_err(|e| io("cannot create", dir, e))?;
    let pid = std::process::id();
    let temps: Vec<PathBuf> = artifacts
        .iter()
        .map(|a| dir.join(format!(".{}.{pid}.tmp", a.name)))
        .collect();
    let cleanup = || {
        for t in &temps {
            let _ = std::fs::remove_file(t);
        }
    };
    for (a, t) in artifacts.iter().zip(&temps) {
        if let Err(e) = std::fs::write(t, &a.contents) {
            cleanup();
            return Err(io("cannot write", t, e));
        }
    }
    for (a, t) in artifacts.iter().zip(&temps) {
        let target = dir.join(a.name);
        if let Err(e) = std::fs::rename(t, &target) {
            cleanup();
            return Err(io("cannot rename into", &target, e));
        }
    }
    Ok(())
}

/// Load, execute and write one run. Returns the output directory.
pub fn run(config_path: &Path, out: Option<&Path>, threads: Option<usize>) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::new(ErrorKind::Config, format!("cannot read {}: {e}", config_path.display())))?;
    let LoadedConfig { config, raw } = parse_config(&text)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("nmcavity-out"));

    let start = Instant::now();
    let output = match threads {
        Some(n) => with_threads(n, || execute(&config))??,
        None => execute(&config)?,
    };
    let wall = start.elapsed().as_secs_f64();

    let manifest = json!({
        "tool": "nmcavity",
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command,
        "config": raw,
        "convention": CONVENTION,
        "reference_rate": config.reference_rate,
        "threads": threads.unwrap_or_else(rayon::current_num_threads),
        "integrator_stats": output.stats,
        "summary": output.summary,
        "artifacts": output.artifacts.iter().map(|a| a.name).collect::<Vec<_>>(),
        "wall_time_s": wall,
    });
    let mut artifacts = output.artifacts;
    artifacts.push(Artifact {
        name: "manifest.json",
        contents: json_bytes(&manifest),
    });
    write_atomically(&dir, &artifacts)?;
    Ok(dir)
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ErrorKind::Config.exit_code() } else { 0 };
        }
    };
    let CliCommand::Run { config, out, threads } = cli.command;
    match run(&config, out.as_deref(), threads.map(usize::from)) {
        Ok(dir) => {
            println!("{}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.kind.exit_code()
        }
    }
}
