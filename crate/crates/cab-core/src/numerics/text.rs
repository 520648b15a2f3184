//! Whitespace-separated text format for matrices and vectors.
//!
//! First line `ROWS COLS`, then one row per line with entries printed at 17
//! significant digits (`{:.16e}`), which round-trips f64 exactly. Vectors
//! are stored as COLS=1 matrices.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, DenseVector};

/// Renders a matrix in the text format.
pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.16e}", m.get(i, j));
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    std::fs::write(path, format_matrix(m)).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_vector(path: &Path, v: &DenseVector) -> Result<()> {
    let m = DenseMatrix::from_column_major(v.dim(), 1, v.as_slice().to_vec())
        .expect("vector entries are already validated");
    write_matrix(path, &m)
}

pub fn parse_matrix(text: &str, path: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path, "empty file"))?;
    let mut parts = header.split_whitespace();
    let rows: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(path, "bad ROWS field"))?;
    let cols: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(path, "bad COLS field"))?;
    let mut entries = vec![0.0; rows * cols];
    let mut row = 0;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        if row >= rows {
            return Err(Error::parse(path, format!("more than {rows} rows")));
        }
        let mut col = 0;
        for token in line.split_whitespace() {
            if col >= cols {
                return Err(Error::parse(
                    path,
                    format!("row {row} has more than {cols} entries"),
                ));
            }
            let value: f64 = token
                .parse()
                .map_err(|_| Error::parse(path, format!("bad float {token:?} in row {row}")))?;
            entries[col * rows + row] = value;
            col += 1;
        }
        if col != cols {
            return Err(Error::parse(
                path,
                format!("row {row} has {col} entries, expected {cols}"),
            ));
        }
        row += 1;
    }
    if row != rows {
        return Err(Error::parse(path, format!("got {row} rows, expected {rows}")));
    }
    DenseMatrix::from_column_major(rows, cols, entries)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_matrix(&text, &path.display().to_string())
}

pub fn read_vector(path: &Path) -> Result<DenseVector> {
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(Error::parse(
            path.display().to_string(),
            format!("expected a vector (COLS=1), got {} columns", m.cols()),
        ));
    }
    DenseVector::from_entries(m.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_bits() {
        let m = DenseMatrix::from_column_major(
            2,
            3,
            vec![
                1.0,
                -2.5e-300,
                std::f64::consts::PI,
                1.0 / 3.0,
                -0.0,
                6.02214076e23,
            ],
        )
        .unwrap();
        let text = format_matrix(&m);
        let back = parse_matrix(&text, "test").unwrap();
        assert_eq!(m.as_slice(), back.as_slice());
    }

    #[test]
    fn header_shape_is_row_major_lines() {
        let m = DenseMatrix::from_column_major(2, 2, vec![1.0, 3.0, 2.0, 4.0]).unwrap();
        let text = format_matrix(&m);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "2 2");
        assert!(lines.next().unwrap().starts_with("1.0000000000000000e0 2."));
    }

    #[test]
    fn rejects_truncated_input() {
        assert!(parse_matrix("2 2\n1 2\n", "t").is_err());
        assert!(parse_matrix("2 2\n1 2 3\n4 5 6\n", "t").is_err());
        assert!(parse_matrix("", "t").is_err());
    }
}
