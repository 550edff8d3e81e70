//! CSV rows and JSON reports.

use std::io::Write;

use lelab_core::diagnostics::DiagnosticsBundle;
use lelab_core::solver::SolveRecord;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

pub const CSV_COLUMNS: [&str; 19] = [
    "status",
    "p",
    "h",
    "M",
    "x_max_x",
    "x_max_y",
    "clearance",
    "beta",
    "p_int_u_p1",
    "int_u_p",
    "energy_gap_rel",
    "pohozaev_rel",
    "eigen_rel",
    "flux_rel",
    "green_rel",
    "bubble_dist",
    "m1",
    "beta_pred",
    "newton_iters",
];

/// Twelve significant digits in scientific notation; non-finite values
/// print as an empty cell.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

/// Outcome of one exponent as written to the reports.
#[derive(Debug, Clone)]
pub struct Row {
    pub p: f64,
    pub h: f64,
    pub status: String,
    pub record: Option<SolveRecord>,
    pub diagnostics: Option<DiagnosticsBundle>,
    /// Why `record` or `diagnostics` is missing.
    pub reason: Option<String>,
}

impl Row {
    pub fn csv_fields(&self) -> Vec<String> {
        let mut out = vec![self.status.clone(), fmt12(self.p), fmt12(self.h)];
        let Some(rec) = &self.record else {
            out.resize(CSV_COLUMNS.len(), String::new());
            return out;
        };
        let d = self.diagnostics.as_ref();
        out.extend([
            fmt12(rec.m),
            fmt12(rec.x_max[0]),
            fmt12(rec.x_max[1]),
            fmt12(rec.clearance),
            opt(d.map(|d| d.beta)),
            opt(d.map(|d| d.p_int_u_p1)),
            opt(d.map(|d| d.int_u_p)),
            opt(d.map(|d| d.energy_gap_rel)),
            opt(d.map(|d| d.pohozaev.relative)),
            opt(d.map(|d| d.eigen.relative)),
            opt(d.map(|d| d.flux.relative)),
            opt(d
                .and_then(|d| d.green.as_ref())
                .map(|g| g.identity.relative)),
            opt(d.and_then(|d| d.bubble_distance)),
            opt(d
                .and_then(|d| d.concentration.candidates.first())
                .map(|c| c.m)),
            opt(d.map(|d| d.concentration.beta_pred)),
            rec.iterations.to_string(),
        ]);
        out
    }

    /// `record` carries `status` and, for failures, `reason`; a missing
    /// bundle is `null` with the reason under `record.reason`.
    pub fn json(&self) -> (Value, Value) {
        let mut record = match &self.record {
            Some(r) => serde_json::to_value(r).unwrap_or_else(|_| json!({})),
            None => json!({ "p": self.p, "h": self.h }),
        };
        if let Value::Object(map) = &mut record {
            map.insert("status".into(), json!(self.status));
            if let Some(reason) = &self.reason {
                map.insert("reason".into(), json!(reason));
            }
        }
        let diagnostics = match &self.diagnostics {
            Some(d) => serde_json::to_value(d).unwrap_or(Value::Null),
            None => Value::Null,
        };
        (record, diagnostics)
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record(row.csv_fields())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Versions {
    lelab: &'static str,
    lelab_core: &'static str,
}

fn versions() -> Value {
    serde_json::to_value(Versions {
        lelab: env!("CARGO_PKG_VERSION"),
        lelab_core: lelab_core::VERSION,
    })
    .unwrap_or(Value::Null)
}

/// Report for a single exponent.
pub fn single_report(config: &RunConfig, row: &Row) -> Value {
    let (record, diagnostics) = row.json();
    json!({
        "config_echo": config,
        "record": record,
        "diagnostics": diagnostics,
        "versions": versions(),
    })
}

/// Report for a sweep: `record` and `diagnostics` are arrays ordered by `p`.
pub fn sweep_report(config: &RunConfig, rows: &[Row]) -> Value {
    let (records, diags): (Vec<Value>, Vec<Value>) = rows.iter().map(Row::json).unzip();
    json!({
        "config_echo": config,
        "record": records,
        "diagnostics": diags,
        "versions": versions(),
    })
}
