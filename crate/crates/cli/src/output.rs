//! CSV and JSON tables.

use std::io::Write;

use serde::Serialize;

use crate::config::{ExperimentConfig, Format, SCHEMA_VERSION};
use crate::experiments::Row;
use crate::CliError;

/// 17 significant digits.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

fn opt_count(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(Row::COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record([
            r.experiment.to_string(),
            opt_count(r.m),
            opt_sci(r.eta),
            opt_sci(r.q),
            opt_sci(r.phi),
            opt_sci(r.lambda),
            opt_count(r.repeat),
            opt_count(r.truncation),
            r.quantity.to_string(),
            sci(r.simulated),
            opt_sci(r.reference),
            opt_sci(r.abs_diff),
            opt_sci(r.tolerance),
            r.provenance.to_string(),
            r.pass.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Serialize)]
struct Table<'a> {
    schema: u32,
    experiment: &'static str,
    seed: u64,
    tolerance: Option<f64>,
    pass: bool,
    rows: &'a [Row],
}

pub fn write_json<W: Write>(cfg: &ExperimentConfig, rows: &[Row], mut out: W) -> Result<(), CliError> {
    let table = Table {
        schema: SCHEMA_VERSION,
        experiment: cfg.experiment.name(),
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        pass: rows.iter().all(|r| r.pass),
        rows,
    };
    serde_json::to_writer_pretty(&mut out, &table).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_table<W: Write>(cfg: &ExperimentConfig, rows: &[Row], out: W) -> Result<(), CliError> {
    match cfg.format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(cfg, rows, out),
    }
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_has_seventeen_digits() {
        assert_eq!(sci(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(sci(0.0), "0.0000000000000000e0");
        let back: f64 = sci(0.1 + 0.2).parse().unwrap();
        assert_eq!(back, 0.1 + 0.2);
    }
}
