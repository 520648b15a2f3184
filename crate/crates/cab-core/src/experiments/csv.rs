//! CSV emission for sweep records. The header is part of the external
//! contract and must not change.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{Method, SweepRecord};

pub const CSV_HEADER: &str =
    "m,n,nu,rho,k1,k2,method,trials,successes,success_frac,mean_solve_seconds,mean_iterations";

/// Renders records in (cell, method) order. Floats print in shortest
/// round-trip form, so identical records give identical bytes.
pub fn emit_csv(records: &[SweepRecord]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.m,
            r.n,
            r.nu,
            r.rho,
            r.k1,
            r.k2,
            r.method.name(),
            r.trials,
            r.successes,
            r.success_frac(),
            r.mean_solve_seconds,
            r.mean_iterations
        );
    }
    out
}

/// Writes the CSV with optional `#`-prefixed metadata comment lines before
/// the header.
pub fn write_csv(path: &Path, records: &[SweepRecord], metadata: &[String]) -> Result<()> {
    let mut out = String::new();
    for line in metadata {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&emit_csv(records));
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Parses CSV text produced by [`emit_csv`]/[`write_csv`] (comment lines
/// are skipped). Used by chart rendering and tests.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::parse("csv", "empty input"))?;
    if header != CSV_HEADER {
        return Err(Error::parse("csv", format!("unexpected header {header:?}")));
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::parse(
                "csv",
                format!("row {idx} has {} fields, expected 12", fields.len()),
            ));
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse("csv", format!("bad {what} {s:?} in row {idx}")))
        };
        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse("csv", format!("bad {what} {s:?} in row {idx}")))
        };
        let method: Method = fields[6].parse()?;
        records.push(SweepRecord {
            m: parse_usize(fields[0], "m")?,
            n: parse_usize(fields[1], "n")?,
            nu: parse_f64(fields[2], "nu")?,
            rho: parse_f64(fields[3], "rho")?,
            k1: parse_usize(fields[4], "k1")?,
            k2: parse_usize(fields[5], "k2")?,
            method,
            trials: parse_usize(fields[7], "trials")?,
            successes: parse_usize(fields[8], "successes")?,
            mean_solve_seconds: parse_f64(fields[10], "mean_solve_seconds")?,
            mean_iterations: parse_f64(fields[11], "mean_iterations")?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> SweepRecord {
        SweepRecord {
            m: 500,
            n: 125,
            nu: 0.05,
            rho: 0.5,
            k1: 15,
            k2: 250,
            method: Method::ExtendedL1,
            trials: 100,
            successes: 93,
            mean_solve_seconds: 0.0,
            mean_iterations: 8.5,
        }
    }

    #[test]
    fn empty_records_give_header_only() {
        assert_eq!(emit_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn single_record_row() {
        let csv = emit_csv(&[record()]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "500,125,0.05,0.5,15,250,extended_l1,100,93,0.93,0,8.5"
        );
        assert!(lines.next().is_none());
    }

    #[test]
    fn parse_roundtrip_including_comments() {
        let records = vec![record()];
        let mut text = String::from("# preset=fig5 trials_per_cell=100\n");
        text.push_str(&emit_csv(&records));
        let back = parse_csv(&text).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn parse_rejects_wrong_header() {
        assert!(parse_csv("a,b,c\n1,2,3\n").is_err());
    }
}
