//! The four subcommands.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use lelab_core::diagnostics::{compute_many, principal_eigenpair_for, DiagnosticsBundle};
use lelab_core::geometry::GeometryError;
use lelab_core::solver::{
    continuation_sweep, locate_peak, radial_shoot, Problem, SolveRecord, SolverError,
};

use crate::config::RunConfig;
use crate::report::{fmt12, single_report, sweep_report, write_csv, Row};
use crate::CliError;

/// Accuracy requested from the radial oracle.
const ORACLE_TOL: f64 = 1e-12;

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::InvalidParameter(msg) => CliError::Config(msg),
        SolverError::Geometry(GeometryError::MeshFailure(msg)) => {
            CliError::Solver(format!("mesh generation failed: {msg}"))
        }
        SolverError::Geometry(g) => CliError::Config(g.to_string()),
        other => CliError::Solver(other.to_string()),
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// Writes to standard output, ignoring a closed pipe.
fn stdout_text(text: &str) {
    let mut out = io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

/// Worker cap from `LELAB_THREADS`, defaulting to the available parallelism.
pub fn worker_count() -> Result<usize, CliError> {
    match std::env::var("LELAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!(
                "LELAB_THREADS must be a positive integer (got {v:?})"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Builds the mesh, runs the continuation over `ps` and evaluates the
/// diagnostics. Fails only when every exponent fails.
pub fn run_pipeline(
    cfg: &RunConfig,
    ps: &[f64],
    field_scale: f64,
    with_diagnostics: bool,
) -> Result<(Problem, Vec<Row>), CliError> {
    let domain = cfg.domain()?;
    let workers = worker_count()?;
    let opts = cfg.sweep_options();
    let center = if cfg.mesh.peak_refinement {
        Some(match cfg.mesh.refinement_center {
            Some(c) => c,
            None => locate_peak(&domain, cfg.mesh.h, ps, &opts).map_err(solver_error)?,
        })
    } else {
        None
    };
    let problem = Problem::generate(domain, &cfg.mesh_options(center)).map_err(solver_error)?;
    let h = problem.mesh().h();
    let items = continuation_sweep(&problem, ps, &opts).map_err(solver_error)?;

    let mut rows: Vec<Row> = items
        .into_iter()
        .map(|item| match item.outcome {
            Ok(mut rec) => {
                if field_scale != 1.0 {
                    rec.u = rec.u.scaled(field_scale);
                    rec.m *= field_scale;
                }
                Row {
                    p: item.p,
                    h,
                    status: "ok".into(),
                    record: Some(rec),
                    diagnostics: None,
                    reason: item
                        .iteration_spike
                        .then(|| "newton iteration spike, possible branch change".into()),
                }
            }
            Err(e) => Row {
                p: item.p,
                h,
                status: e.status().into(),
                record: None,
                diagnostics: None,
                reason: Some(e.to_string()),
            },
        })
        .collect();

    if with_diagnostics && rows.iter().any(|r| r.record.is_some()) {
        match principal_eigenpair_for(&problem) {
            Ok(eig) => {
                let recs: Vec<&SolveRecord> =
                    rows.iter().filter_map(|r| r.record.as_ref()).collect();
                let results =
                    compute_many(&problem, &eig, &recs, &cfg.diagnostics_options(), workers);
                let mut results = results.into_iter();
                for row in rows.iter_mut().filter(|r| r.record.is_some()) {
                    match results.next() {
                        Some(Ok(b)) => row.diagnostics = Some(b),
                        Some(Err(e)) => row.reason = Some(format!("diagnostics: {e}")),
                        None => {}
                    }
                }
            }
            Err(e) => {
                for row in rows.iter_mut().filter(|r| r.record.is_some()) {
                    row.reason = Some(format!("eigenpair: {e}"));
                }
            }
        }
    }
    Ok((problem, rows))
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| io_error(p, e)),
        None => {
            stdout_text(&(text + "\n"));
            Ok(())
        }
    }
}

fn write_field(path: &Path, nodes: &[[f64; 2]], u: &[f64]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    for (x, v) in nodes.iter().zip(u) {
        writeln!(w, "{} {} {}", fmt12(x[0]), fmt12(x[1]), fmt12(*v))
            .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let ps = cfg.p_values()?;
    if ps.len() != 1 {
        return Err(CliError::Config(format!(
            "solve needs exactly one exponent, got {}",
            ps.len()
        )));
    }
    let (problem, rows) = match run_pipeline(cfg, &ps, 1.0, cfg.diagnostics.enabled) {
        Ok(out) => out,
        Err(CliError::Solver(msg)) => {
            let row = Row {
                p: ps[0],
                h: cfg.mesh.h,
                status: "failed".into(),
                record: None,
                diagnostics: None,
                reason: Some(msg.clone()),
            };
            write_json(cfg.output.json.as_deref(), &single_report(cfg, &row))?;
            return Err(CliError::Solver(msg));
        }
        Err(e) => return Err(e),
    };
    let row = &rows[0];
    write_json(cfg.output.json.as_deref(), &single_report(cfg, row))?;
    if let (Some(path), Some(rec)) = (&cfg.output.field, &row.record) {
        write_field(path, problem.mesh().nodes(), rec.u.values())?;
    }
    match &row.record {
        Some(_) => Ok(()),
        None => Err(CliError::Solver(
            row.reason.clone().unwrap_or_else(|| row.status.clone()),
        )),
    }
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let ps = cfg.p_values()?;
    if ps.len() < 2 {
        return Err(CliError::Config(
            "sweep needs at least two exponents".into(),
        ));
    }
    let (_, rows) = run_pipeline(cfg, &ps, 1.0, cfg.diagnostics.enabled)?;
    match &cfg.output.csv {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            write_csv(BufWriter::new(file), &rows).map_err(|e| io_error(path, e))?;
        }
        None => write_csv(io::stdout().lock(), &rows)
            .map_err(|e| CliError::Config(format!("cannot write CSV: {e}")))?,
    }
    if let Some(path) = &cfg.output.json {
        write_json(Some(path), &sweep_report(cfg, &rows))?;
    }
    Ok(())
}

/// One line of the verification table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub p: f64,
    pub identity: &'static str,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub relative: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn checks_for(cfg: &RunConfig, row: &Row) -> Vec<Check> {
    let v = &cfg.verify;
    let d: Option<&DiagnosticsBundle> = row.diagnostics.as_ref();
    let mut out = Vec::new();
    let mut push = |identity, sides: Option<(f64, f64, f64)>, tolerance: f64| {
        let pass = sides.is_some_and(|(_, _, rel)| rel.is_finite() && rel <= tolerance);
        out.push(Check {
            p: row.p,
            identity,
            lhs: sides.map(|s| s.0),
            rhs: sides.map(|s| s.1),
            relative: sides.map(|s| s.2),
            tolerance,
            pass,
        });
    };
    push(
        "energy",
        d.map(|d| (d.beta, d.p_int_u_p1, d.energy_gap_rel)),
        v.energy_gap_rel,
    );
    push(
        "pohozaev",
        d.map(|d| (d.pohozaev.lhs, d.pohozaev.rhs, d.pohozaev.relative)),
        v.pohozaev_rel,
    );
    push(
        "eigen",
        d.map(|d| (d.eigen.lhs, d.eigen.rhs, d.eigen.relative)),
        v.eigen_rel,
    );
    push(
        "green",
        d.and_then(|d| d.green.as_ref())
            .map(|g| (g.identity.lhs, g.identity.rhs, g.identity.relative)),
        v.green_rel,
    );
    push(
        "flux",
        d.map(|d| (d.flux.lhs, d.flux.rhs, d.flux.relative)),
        v.flux_rel,
    );
    out
}

pub fn format_table(checks: &[Check]) -> String {
    let cell = |x: Option<f64>| x.map(fmt12).unwrap_or_else(|| "n/a".into());
    let mut s = format!(
        "{:<10} {:<10} {:>20} {:>20} {:>20} {:>10} {}\n",
        "p", "identity", "lhs", "rhs", "relative_gap", "tolerance", "result"
    );
    for c in checks {
        let _ = writeln!(
            s,
            "{:<10} {:<10} {:>20} {:>20} {:>20} {:>10} {}",
            c.p,
            c.identity,
            cell(c.lhs),
            cell(c.rhs),
            cell(c.relative),
            format!("{:e}", c.tolerance),
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    s
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let ps = cfg.p_values()?;
    let (_, rows) = run_pipeline(cfg, &ps, cfg.verify.field_scale, true)?;
    let checks: Vec<Check> = rows.iter().flat_map(|r| checks_for(cfg, r)).collect();
    let mut table = format_table(&checks);
    for row in rows
        .iter()
        .filter(|r| r.record.is_none() || r.diagnostics.is_none())
    {
        if let Some(reason) = &row.reason {
            let _ = writeln!(table, "p={}: {reason}", row.p);
        }
    }
    stdout_text(&table);
    if checks.iter().all(|c| c.pass) {
        Ok(())
    } else {
        Err(CliError::Verification(
            checks.iter().filter(|c| !c.pass).count(),
        ))
    }
}

pub fn cmd_oracle(p: f64, points: usize) -> Result<(), CliError> {
    if !(p > 1.0) {
        return Err(CliError::Config(format!(
            "exponent must exceed 1 (got {p})"
        )));
    }
    let o = radial_shoot(p, ORACLE_TOL).map_err(solver_error)?;
    let (lhs, rhs) = o.pohozaev_sides();
    let mut text = String::new();
    let mut emit = |s: String| {
        text.push_str(&s);
        text.push('\n');
    };
    emit(format!("p {}", fmt12(p)));
    emit(format!("M {}", fmt12(o.m)));
    emit(format!("du_dr_at_1 {}", fmt12(o.boundary_slope)));
    emit(format!("pohozaev_lhs {}", fmt12(lhs)));
    emit(format!("pohozaev_rhs {}", fmt12(rhs)));
    emit(format!("pohozaev_rel {}", fmt12((lhs - rhs).abs() / lhs)));
    if points > 0 {
        emit("r u".into());
        for k in 0..points {
            let r = if points == 1 {
                0.0
            } else {
                k as f64 / (points - 1) as f64
            };
            emit(format!("{} {}", fmt12(r), fmt12(o.value(r))));
        }
    }
    stdout_text(&text);
    Ok(())
}
