use std::path::Path;

use super::write_atomic;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

pub const DIAGNOSTICS_HEADER: [&str; 7] = [
    "t",
    "sup_norm",
    "l2_energy",
    "enstrophy",
    "max_divergence",
    "picard_iters",
    "picard_final_residual",
];

fn float(v: f64) -> String {
    // 17 significant digits round-trip every finite f64.
    format!("{v:.16e}")
}

/// Renders records as CSV text with the fixed header.
pub fn diagnostics_to_csv(records: &[DiagnosticsRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::MalformedCsv(e.to_string());
    w.write_record(DIAGNOSTICS_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            float(r.t),
            float(r.sup_norm),
            float(r.l2_energy),
            float(r.enstrophy),
            float(r.max_divergence),
            r.picard_iters.to_string(),
            float(r.picard_final_residual),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::MalformedCsv(e.to_string()))
}

/// Atomically writes the diagnostics CSV.
pub fn write_diagnostics(records: &[DiagnosticsRecord], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &diagnostics_to_csv(records)?)
}

pub fn read_diagnostics(path: impl AsRef<Path>) -> Result<Vec<DiagnosticsRecord>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_diagnostics(&bytes)
}

pub(crate) fn parse_diagnostics(bytes: &[u8]) -> Result<Vec<DiagnosticsRecord>> {
    let mut r = csv::Reader::from_reader(bytes);
    let headers = r.headers().map_err(|e| Error::MalformedCsv(e.to_string()))?.clone();
    let mut columns = [0usize; 7];
    for (slot, name) in columns.iter_mut().zip(DIAGNOSTICS_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MalformedCsv(format!("missing column `{name}`")))?;
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::MalformedCsv(e.to_string()))?;
        let field = |c: usize| -> Result<&str> {
            rec.get(columns[c]).ok_or_else(|| {
                Error::MalformedCsv(format!("row {}: missing value for `{}`", row + 1, DIAGNOSTICS_HEADER[c]))
            })
        };
        let num = |c: usize| -> Result<f64> {
            let s = field(c)?;
            s.trim().parse::<f64>().map_err(|_| {
                Error::MalformedCsv(format!("row {}: `{}` is not a number: {s:?}", row + 1, DIAGNOSTICS_HEADER[c]))
            })
        };
        let iters = field(5)?;
        out.push(DiagnosticsRecord {
            t: num(0)?,
            sup_norm: num(1)?,
            l2_energy: num(2)?,
            enstrophy: num(3)?,
            max_divergence: num(4)?,
            picard_iters: iters.trim().parse().map_err(|_| {
                Error::MalformedCsv(format!("row {}: `picard_iters` is not an integer: {iters:?}", row + 1))
            })?,
            picard_final_residual: num(6)?,
        });
    }
    Ok(out)
}
