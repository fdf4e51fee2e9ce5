//! Subcommand implementations.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use cuspkit_core::manifold::{critical_y, cusp_exponent_fit};
use cuspkit_core::ode::default_initial_state;
use cuspkit_core::signature::{signature as mmo_signature, EventKind};
use cuspkit_core::spectra::find_symmetric_equilibrium;
use cuspkit_core::{
    check_conditions, cusp_test, desingularized_eigenvalues, find_symmetric_fold, integrate,
    jacobian_blocks, locate_singular_hopf, reduction_coefficients, trace_fold_curve, BuiltinModel,
    Classification, ConditionReport, CuspReport, Error, HopfResult, MmoSignature, Observable,
    PairState, ReducedCoefficients, SaoPrediction, SlowFastModel, TraceOptions, Trajectory,
};

use crate::config::{parse_f64, parse_pair, RunConfig};
use crate::io::{read_trajectory, sink, write_json, HEADERS};
use crate::{CliError, SCHEMA_VERSION};

fn param_map(m: &BuiltinModel) -> BTreeMap<String, f64> {
    m.params()
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

// ---------------------------------------------------------------- analyze

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub x: f64,
    pub y: f64,
    /// Slow offset `y_eq - y*` from the cusp.
    pub w_offset: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub folds: Vec<f64>,
    pub cusp: CuspReport,
    pub reduced: Option<ReducedCoefficients>,
    pub conditions: ConditionReport,
    pub sao: Option<SaoPrediction>,
    pub equilibrium: Option<EquilibriumReport>,
    /// Why optional sections are missing.
    pub notes: Vec<String>,
}

/// Fold search, cusp test, reduction, conditions, SAO prediction and the
/// nearby symmetric equilibrium.
pub fn run_analysis(m: &BuiltinModel, cfg: &RunConfig) -> Result<Analysis, CliError> {
    let tol = &cfg.tolerances;
    let folds =
        find_symmetric_fold(m, cfg.fold_bracket_for(m), tol).map_err(CliError::from_core)?;
    let x = *folds.get(cfg.fold_index).ok_or_else(|| {
        if folds.is_empty() {
            CliError::numerical("no symmetric fold in the bracket")
        } else {
            CliError::config(format!(
                "fold_index {} out of range ({} folds)",
                cfg.fold_index,
                folds.len()
            ))
        }
    })?;
    let cusp = cusp_test(m, x, tol).map_err(CliError::from_core)?;
    let conditions = check_conditions(m, x, tol).map_err(CliError::from_core)?;
    let mut notes = Vec::new();
    let reduced = match reduction_coefficients(m, x, tol) {
        Ok(rc) => Some(rc),
        Err(Error::Degenerate(s)) => {
            notes.push(format!("reduction: {s}"));
            None
        }
        Err(e) => return Err(CliError::from_core(e)),
    };
    let sao = reduced.as_ref().and_then(|rc| {
        match desingularized_eigenvalues(rc, tol.condition_margin) {
            Ok(p) => Some(p),
            Err(e) => {
                notes.push(format!("desingularized eigenvalues: {e}"));
                None
            }
        }
    });
    let equilibrium = match find_symmetric_equilibrium(m, (x, cusp.y_star))
        .and_then(|(xe, ye)| Ok((xe, ye, jacobian_blocks(m, xe, ye)?)))
    {
        Ok((xe, ye, b)) => Some(EquilibriumReport {
            x: xe,
            y: ye,
            w_offset: ye - cusp.y_star,
            classification: b.classification,
        }),
        Err(e) => {
            notes.push(format!("equilibrium: {e}"));
            None
        }
    };
    Ok(Analysis {
        folds,
        cusp,
        reduced,
        conditions,
        sao,
        equilibrium,
        notes,
    })
}

#[derive(Serialize)]
struct AnalyzeDoc<'a> {
    schema_version: u32,
    command: &'static str,
    model: &'a str,
    epsilon: f64,
    params: BTreeMap<String, f64>,
    #[serde(flatten)]
    analysis: &'a Analysis,
}

pub fn analyze(cfg: &RunConfig, out: Option<&Path>) -> Result<u8, CliError> {
    let m = cfg.build_model()?;
    let a = run_analysis(&m, cfg)?;
    let doc = AnalyzeDoc {
        schema_version: SCHEMA_VERSION,
        command: "analyze",
        model: m.name(),
        epsilon: m.epsilon(),
        params: param_map(&m),
        analysis: &a,
    };
    write_json(&doc, out)?;
    Ok(if a.conditions.all_satisfied { 0 } else { 2 })
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Start on the symmetric subspace (both cells displaced equally).
    #[arg(long)]
    pub symmetric_ic: bool,
    /// Explicit initial state.
    #[arg(long, value_name = "X1,X2,Y1,Y2", conflicts_with = "symmetric_ic")]
    pub ic: Option<String>,
    /// Use the model's variable names in the CSV header.
    #[arg(long)]
    pub aliases: bool,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
}

fn initial_state(
    m: &BuiltinModel,
    cfg: &RunConfig,
    a: &SimulateArgs,
) -> Result<PairState, CliError> {
    if let Some(s) = &a.ic {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| parse_f64(p.trim(), "--ic"))
            .collect::<Result<_, _>>()?;
        if v.len() != 4 {
            return Err(CliError::config("--ic expects four comma-separated values"));
        }
        return Ok(PairState::new(v[0], v[1], v[2], v[3]));
    }
    let s = default_initial_state(m, &cfg.tolerances).map_err(CliError::from_core)?;
    Ok(if a.symmetric_ic {
        PairState::symmetric(s.x1, s.y1)
    } else {
        s
    })
}

/// Integrate from the default initial state over `(0, t_end)`.
fn default_run(m: &BuiltinModel, cfg: &RunConfig, t_end: f64) -> Result<Trajectory, Error> {
    let s0 = default_initial_state(m, &cfg.tolerances)?;
    integrate(m, s0, (0.0, t_end), &cfg.integrator.options())
}

pub fn simulate(cfg: &mut RunConfig, a: &SimulateArgs, out: Option<&Path>) -> Result<u8, CliError> {
    if let Some(t) = a.t_end {
        cfg.t_end = Some(t);
    }
    if let Some(v) = a.rtol {
        cfg.integrator.rtol = v;
    }
    if let Some(v) = a.atol {
        cfg.integrator.atol = v;
    }
    if a.max_step.is_some() {
        cfg.integrator.max_step = a.max_step;
    }
    cfg.validate()?;
    let m = cfg.build_model()?;
    let s0 = initial_state(&m, cfg, a)?;
    let aliases = a.aliases.then(|| m.channel_names());
    let write = |tr: &Trajectory| -> Result<(), CliError> {
        let mut w = sink(out)?;
        tr.write_csv(&mut w, aliases)
            .and_then(|_| w.flush())
            .map_err(CliError::io)
    };
    match integrate(&m, s0, (0.0, cfg.t_end_for()), &cfg.integrator.options()) {
        Ok(tr) => {
            write(&tr)?;
            Ok(0)
        }
        // Keep what was computed before the failure.
        Err(Error::DomainExit { t, partial, .. }) => {
            write(&partial)?;
            Err(CliError::numerical(format!(
                "trajectory left the model domain at t = {t}"
            )))
        }
        Err(Error::Integration {
            t,
            reason,
            partial: Some(p),
        }) => {
            write(&p)?;
            Err(CliError::numerical(format!(
                "integration failed at t = {t}: {reason}"
            )))
        }
        Err(e) => Err(CliError::from_core(e)),
    }
}

// ---------------------------------------------------------------- signature

#[derive(Debug, Args)]
pub struct SignatureArgs {
    /// Trajectory CSV as written by `simulate`.
    pub input: PathBuf,
    /// LAO threshold as a fraction of the largest swing.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// `u` (antisymmetric, default) or one of x1, x2, y1, y2.
    #[arg(long, default_value = "u")]
    pub observable: String,
    /// Fraction of the time span discarded as transient.
    #[arg(long)]
    pub transient_fraction: Option<f64>,
    /// Also write the event table as CSV.
    #[arg(long)]
    pub events: Option<PathBuf>,
}

fn parse_observable(s: &str) -> Result<Observable, CliError> {
    Ok(match s {
        "u" | "antisymmetric" => Observable::Antisymmetric,
        _ => match HEADERS.iter().find_map(|h| h.iter().position(|c| *c == s)) {
            Some(i) => Observable::Channel(i),
            None => return Err(CliError::config(format!("unknown observable '{s}'"))),
        },
    })
}

/// Signature of a trajectory after dropping the transient; derivatives are not used.
pub fn trajectory_signature(
    tr: &Trajectory,
    cfg: &RunConfig,
    obs: Observable,
) -> Result<MmoSignature, CliError> {
    let (Some(&t0), Some(&t1)) = (tr.t.first(), tr.t.last()) else {
        return Err(CliError::config("trajectory has no samples"));
    };
    let mut tail = tr.after(t0 + cfg.transient_fraction * (t1 - t0));
    tail.derivs.clear();
    mmo_signature(&tail, obs, cfg.sao_threshold).map_err(CliError::from_core)
}

#[derive(Serialize)]
struct SignatureDoc<'a> {
    schema_version: u32,
    command: &'static str,
    input: String,
    observable: &'a str,
    transient_fraction: f64,
    #[serde(flatten)]
    signature: &'a MmoSignature,
}

pub fn signature(
    cfg: &mut RunConfig,
    a: &SignatureArgs,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    if let Some(v) = a.threshold {
        cfg.sao_threshold = v;
    }
    if let Some(v) = a.transient_fraction {
        cfg.transient_fraction = v;
    }
    cfg.validate()?;
    let obs = parse_observable(&a.observable)?;
    let tr = read_trajectory(&a.input)?;
    let sig = trajectory_signature(&tr, cfg, obs)?;
    if let Some(p) = &a.events {
        let mut w = sink(Some(p))?;
        sig.write_events_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(CliError::io)?;
    }
    let doc = SignatureDoc {
        schema_version: SCHEMA_VERSION,
        command: "signature",
        input: a.input.display().to_string(),
        observable: &a.observable,
        transient_fraction: cfg.transient_fraction,
        signature: &sig,
    };
    write_json(&doc, out)?;
    Ok(0)
}

// ---------------------------------------------------------------- hopf

#[derive(Debug, Args)]
pub struct HopfArgs {
    /// Parameter to vary.
    #[arg(long)]
    pub param: String,
    #[arg(long, value_name = "LO,HI")]
    pub bracket: String,
}

#[derive(Serialize)]
struct HopfDoc<'a> {
    schema_version: u32,
    command: &'static str,
    model: &'a str,
    status: &'static str,
    parameter: &'a str,
    bracket: [f64; 2],
    result: Option<HopfResult>,
    message: Option<String>,
}

pub fn hopf(cfg: &RunConfig, a: &HopfArgs, out: Option<&Path>) -> Result<u8, CliError> {
    let (lo, hi) = parse_pair(&a.bracket, "--bracket")?;
    if !(lo < hi) {
        return Err(CliError::config("--bracket must be increasing"));
    }
    let m = cfg.build_model()?;
    // Reject unknown parameters before continuation starts.
    m.with_param(&a.param, lo).map_err(CliError::from_core)?;
    let mut doc = HopfDoc {
        schema_version: SCHEMA_VERSION,
        command: "hopf",
        model: m.name(),
        status: "ok",
        parameter: &a.param,
        bracket: [lo, hi],
        result: None,
        message: None,
    };
    match locate_singular_hopf(&m, &a.param, (lo, hi), &cfg.tolerances) {
        Ok(r) => {
            doc.result = Some(r);
            write_json(&doc, out)?;
            Ok(0)
        }
        Err(e) if e.is_config() => Err(CliError::from_core(e)),
        Err(e) => {
            doc.status = if matches!(e, Error::NotFound(_)) {
                "not_found"
            } else {
                "failed"
            };
            doc.message = Some(e.to_string());
            write_json(&doc, out)?;
            Ok(3)
        }
    }
}

// ---------------------------------------------------------------- fold

#[derive(Debug, Args)]
pub struct FoldArgs {
    /// Arclength traced along each branch; model-specific default.
    #[arg(long)]
    pub arclength: Option<f64>,
    /// Nominal points per branch.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Write the traced curve as CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Serialize)]
struct FoldDoc<'a> {
    schema_version: u32,
    command: &'static str,
    model: &'a str,
    x_star: f64,
    y_star: f64,
    n_points: usize,
    truncated: bool,
    warning: Option<String>,
    /// Log-log slope of `|z|` against `|w|` along the curve.
    exponent: Option<f64>,
    exponent_error: Option<String>,
}

pub fn fold(cfg: &RunConfig, a: &FoldArgs, out: Option<&Path>) -> Result<u8, CliError> {
    let m = cfg.build_model()?;
    let tol = &cfg.tolerances;
    let arclength = a.arclength.unwrap_or(if m.name() == "morris_lecar" {
        0.4
    } else {
        0.004
    });
    if !(arclength > 0.0) || a.points < 2 {
        return Err(CliError::config(
            "arclength must be positive and points at least 2",
        ));
    }
    let folds =
        find_symmetric_fold(&m, cfg.fold_bracket_for(&m), tol).map_err(CliError::from_core)?;
    let x = *folds
        .get(cfg.fold_index)
        .ok_or_else(|| CliError::numerical("no symmetric fold with the requested index"))?;
    let curve = trace_fold_curve(&m, x, &TraceOptions::new(arclength, a.points), tol)
        .map_err(CliError::from_core)?;
    if let Some(p) = &a.curve {
        let mut w = sink(Some(p))?;
        curve
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(CliError::io)?;
    }
    let fit = cusp_exponent_fit(&curve, None);
    let doc = FoldDoc {
        schema_version: SCHEMA_VERSION,
        command: "fold",
        model: m.name(),
        x_star: curve.x_star,
        y_star: critical_y(&m, x, x, tol).map_err(CliError::from_core)?,
        n_points: curve.points.len(),
        truncated: curve.truncated,
        warning: curve.warning.clone(),
        exponent: fit.as_ref().ok().copied(),
        exponent_error: fit.err().map(|e| e.to_string()),
    };
    write_json(&doc, out)?;
    Ok(0)
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Grid axis `name=lo:hi:n`; give once or twice.
    #[arg(long = "param", value_name = "NAME=LO:HI:N", required = true)]
    pub params: Vec<String>,
    /// Worker threads (capped by CUSPKIT_THREADS).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

pub fn parse_axis(s: &str) -> Result<Axis, CliError> {
    let bad = || CliError::config(format!("--param expects name=lo:hi:n, got '{s}'"));
    let (name, range) = s.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parse_f64(parts[0], "--param lo")?;
    let hi = parse_f64(parts[1], "--param hi")?;
    let n: usize = parts[2].parse().ok().filter(|&n| n >= 1).ok_or_else(bad)?;
    let values = if n == 1 {
        vec![lo]
    } else {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    };
    Ok(Axis {
        name: name.trim().to_string(),
        values,
    })
}

fn thread_count(jobs: Option<usize>) -> Result<usize, CliError> {
    let mut n = match jobs {
        Some(0) => return Err(CliError::config("--jobs must be at least 1")),
        Some(j) => j,
        None => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
    };
    if let Ok(v) = std::env::var("CUSPKIT_THREADS") {
        let cap: usize = v.trim().parse().ok().filter(|&c| c >= 1).ok_or_else(|| {
            CliError::config(format!(
                "CUSPKIT_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        n = n.min(cap);
    }
    Ok(n)
}

pub const SWEEP_HEADER: [&str; 21] = [
    "param_1",
    "value_1",
    "param_2",
    "value_2",
    "status",
    "c1",
    "c2",
    "c3",
    "c4",
    "c5",
    "c6",
    "all_conditions",
    "w_eq_minus_w_star",
    "n_sao_predicted",
    "signature",
    "n_lao_events",
    "n_sao_events",
    "n_complete_epochs",
    "alternating_cells",
    "mmo",
    "message",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One grid cell: analysis verdicts plus the signature of a bounded-time run.
fn sweep_cell(cfg: &RunConfig, point: &[(String, f64)]) -> Vec<String> {
    let mut cell = cfg.clone();
    for (k, v) in point {
        cell.params.insert(k.clone(), *v);
    }
    let mut row: Vec<String> = Vec::with_capacity(SWEEP_HEADER.len());
    for i in 0..2 {
        match point.get(i) {
            Some((k, v)) => row.extend([k.clone(), v.to_string()]),
            None => row.extend([String::new(), String::new()]),
        }
    }
    let mut errors = Vec::new();
    let m = match cell.build_model() {
        Ok(m) => Some(m),
        Err(e) => {
            errors.push(e.message);
            None
        }
    };
    let analysis = m.as_ref().and_then(|m| {
        run_analysis(m, &cell)
            .map_err(|e| errors.push(format!("analysis: {}", e.message)))
            .ok()
    });
    let sig = m.as_ref().and_then(|m| {
        default_run(m, &cell, cell.t_end_for())
            .map_err(CliError::from_core)
            .and_then(|tr| trajectory_signature(&tr, &cell, Observable::Antisymmetric))
            .map_err(|e| errors.push(format!("simulation: {}", e.message)))
            .ok()
    });
    row.push(if errors.is_empty() { "ok" } else { "error" }.into());
    match &analysis {
        Some(a) => {
            let c = &a.conditions;
            for check in [c.c1, c.c2, c.c3, c.c4, c.c5, c.c6] {
                row.push(check.satisfied.to_string());
            }
            row.push(c.all_satisfied.to_string());
            row.push(opt(a.equilibrium.as_ref().map(|e| e.w_offset)));
            row.push(opt(a.sao.and_then(|s| s.n_sao)));
        }
        None => row.extend(std::iter::repeat_n(String::new(), 9)),
    }
    match &sig {
        Some(s) => {
            let n_lao = s.events.iter().filter(|e| e.kind == EventKind::Lao).count();
            row.push(s.signature_string.clone());
            row.push(n_lao.to_string());
            row.push((s.events.len() - n_lao).to_string());
            row.push(s.n_complete_epochs().to_string());
            row.push(opt(s.alternating_cells));
            row.push(s.has_both_kinds().to_string());
        }
        None => row.extend(std::iter::repeat_n(String::new(), 6)),
    }
    row.push(errors.join("; "));
    row
}

pub fn sweep(cfg: &mut RunConfig, a: &SweepArgs, out: Option<&Path>) -> Result<u8, CliError> {
    if a.params.len() > 2 {
        return Err(CliError::config("sweep takes one or two --param axes"));
    }
    if let Some(t) = a.t_end {
        cfg.t_end = Some(t);
    }
    cfg.validate()?;
    let axes: Vec<Axis> = a
        .params
        .iter()
        .map(|s| parse_axis(s))
        .collect::<Result<_, _>>()?;
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(CliError::config(
            "sweep axes must name different parameters",
        ));
    }
    // Fail fast on bad model or parameter names.
    let mut probe = cfg.build_model()?;
    for ax in &axes {
        probe = probe
            .with_param(&ax.name, ax.values[0])
            .map_err(CliError::from_core)?;
    }

    let mut grid: Vec<Vec<(String, f64)>> = Vec::new();
    for &v1 in &axes[0].values {
        match axes.get(1) {
            Some(ax2) => {
                for &v2 in &ax2.values {
                    grid.push(vec![(axes[0].name.clone(), v1), (ax2.name.clone(), v2)]);
                }
            }
            None => grid.push(vec![(axes[0].name.clone(), v1)]),
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(a.jobs)?)
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    let cfg: &RunConfig = cfg;
    // Indexed parallel collect keeps grid order.
    let rows: Vec<Vec<String>> =
        pool.install(|| grid.par_iter().map(|p| sweep_cell(cfg, p)).collect());

    let mut w = csv::Writer::from_writer(sink(out)?);
    let csv_err = |e: csv::Error| CliError::config(format!("cannot write CSV: {e}"));
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in &rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io)?;
    Ok(0)
}
