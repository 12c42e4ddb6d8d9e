//! Trace rows, their CSV form, and column-wise trace comparison.
//!
//! Floats are written with 17 significant digits so a trace read back
//! reproduces the in-memory values bit for bit. Columns that are only
//! sampled at checkpoints hold `NaN` elsewhere.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::diagnostics::{ConstraintFlags, LyapunovSample};
use crate::error::{Error, Result};

/// One logged step of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub s: f64,
    pub sdot: f64,
    pub qc: f64,
    /// `T(0, t)`, K.
    pub t0: f64,
    /// `T̂(0, t)`, K.
    pub that0: f64,
    /// `T(0, t) - T̂(0, t)`, computed from the deviation fields.
    pub ttilde0: f64,
    pub h1_u: f64,
    pub h1_err: f64,
    /// `ũ_x(s, t)`, K·m⁻¹.
    pub err_flux: f64,
    /// `(1/α) ∫ u dx + s/β` of the plant.
    pub energy: f64,
    /// `(1/k) ∫₀^t q_c dt` as applied to the plant.
    pub heat_in: f64,
    pub u_min: f64,
    pub err_max: f64,
    pub v: f64,
    pub vtot: f64,
}

pub const TRACE_COLUMNS: [&str; 21] = [
    "t",
    "s",
    "sdot",
    "qc",
    "T0",
    "That0",
    "Ttilde0",
    "h1_u",
    "h1_err",
    "err_flux",
    "energy",
    "heat_in",
    "u_min",
    "err_max",
    "V",
    "Vtot",
    "qc_positive",
    "s_increasing",
    "s_below_sr",
    "u_nonnegative",
    "error_nonpositive",
];

pub const CHECKPOINT_COLUMNS: [&str; 9] =
    ["t", "s", "X", "h1_what", "h1_wtilde", "V1_tilde", "Vtot", "V", "wtilde_max"];

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRecord], flags: &[ConstraintFlags]) -> Result<()> {
    if rows.len() != flags.len() {
        return Err(Error::Trace(format!("{} rows but {} flag sets", rows.len(), flags.len())));
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
    for (r, f) in rows.iter().zip(flags) {
        let values = [
            r.t, r.s, r.sdot, r.qc, r.t0, r.that0, r.ttilde0, r.h1_u, r.h1_err, r.err_flux, r.energy, r.heat_in,
            r.u_min, r.err_max, r.v, r.vtot,
        ];
        let mut line: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        line.extend(
            [f.qc_positive, f.s_increasing, f.s_below_sr, f.u_nonnegative, f.error_nonpositive]
                .map(|b| flag(b).to_string()),
        );
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_checkpoint_csv(path: &Path, samples: &[LyapunovSample]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", CHECKPOINT_COLUMNS.join(","))?;
    for c in samples {
        let values = [c.t, c.s, c.x_err, c.h1_what, c.h1_wtilde, c.v1_tilde, c.vtot, c.v, c.wtilde_max];
        let line: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// A numeric CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Trace(format!("{}: empty file", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Trace(format!("{}: row {}: {v:?}: {e}", path.display(), lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Trace(format!(
                "{}: row {} has {} fields, header has {}",
                path.display(),
                lineno + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Column-wise maximum absolute difference between two tables of the same
/// schema and length. Entries that are NaN in both tables count as equal.
pub fn compare_tables(a: &Table, b: &Table) -> Result<Vec<(String, f64)>> {
    if a.header != b.header {
        return Err(Error::Trace(format!("schema mismatch: {:?} vs {:?}", a.header, b.header)));
    }
    if a.rows.len() != b.rows.len() {
        return Err(Error::Trace(format!("row count mismatch: {} vs {}", a.rows.len(), b.rows.len())));
    }
    let mut diffs = vec![0.0_f64; a.header.len()];
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        for (d, (x, y)) in diffs.iter_mut().zip(ra.iter().zip(rb)) {
            let delta = if x.is_nan() && y.is_nan() { 0.0 } else { (x - y).abs() };
            // a NaN on one side only is reported as an infinite difference
            *d = d.max(if delta.is_nan() { f64::INFINITY } else { delta });
        }
    }
    Ok(a.header.iter().cloned().zip(diffs).collect())
}

pub fn compare_traces(a: &Path, b: &Path) -> Result<Vec<(String, f64)>> {
    compare_tables(&read_table(a)?, &read_table(b)?)
}
