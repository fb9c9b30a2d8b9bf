//! Plain-text array formats.
//!
//! Matrices: a `rows,cols` header line, then one comma-separated row per
//! line. Vectors use the same layout with shape `len,1`. Values are written
//! with 17 significant digits so files round-trip exactly.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;
use crate::linalg::{DenseMatrix, DenseVector};
use crate::solvers::trace::format_f64;

pub fn matrix_to_csv(a: &DenseMatrix) -> String {
    let mut out = format!("{},{}\n", a.rows(), a.cols());
    for r in 0..a.rows() {
        let row: Vec<String> = a.row(r).iter().map(|&v| format_f64(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn vector_to_csv(v: &[f64]) -> String {
    let mut out = format!("{},1\n", v.len());
    for &x in v {
        let _ = writeln!(out, "{}", format_f64(x));
    }
    out
}

fn parse_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{} line {}: {msg}", path.display(), line + 1))
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<DenseMatrix, CliError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err(path, 0, "empty file"))?;
    let (rows, cols) = header
        .split_once(',')
        .and_then(|(r, c)| Some((r.trim().parse::<usize>().ok()?, c.trim().parse::<usize>().ok()?)))
        .ok_or_else(|| parse_err(path, 0, "expected a `rows,cols` header"))?;
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|e| parse_err(path, i + 1, e))?;
            data.push(v);
        }
    }
    if data.len() != rows * cols {
        return Err(parse_err(
            path,
            0,
            format!("header says {rows}x{cols} but found {} values", data.len()),
        ));
    }
    DenseMatrix::new(rows, cols, data).map_err(CliError::from)
}

pub fn parse_vector(text: &str, path: &Path) -> Result<DenseVector, CliError> {
    let m = parse_matrix(text, path)?;
    if m.cols() != 1 {
        return Err(parse_err(path, 0, format!("expected a column vector, got {} columns", m.cols())));
    }
    DenseVector::new(m.as_slice().to_vec()).map_err(CliError::from)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn read_vector(path: &Path) -> Result<DenseVector, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_vector(&text, path)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_text(path, &to_json(value))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let a = DenseMatrix::from_rows(&[vec![1.0, -0.1], vec![1e-300, 1.0 / 3.0]]).unwrap();
        let text = matrix_to_csv(&a);
        assert!(text.starts_with("2,2\n"));
        let back = parse_matrix(&text, Path::new("a.csv")).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn vector_round_trip() {
        let v = vec![0.1, -2.5, 0.0];
        let text = vector_to_csv(&v);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(&*parse_vector(&text, Path::new("v.csv")).unwrap(), &v[..]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(parse_matrix("2,2\n1,2\n3\n", Path::new("a.csv")).is_err());
        assert!(parse_vector("1,2\n1,2\n", Path::new("v.csv")).is_err());
        assert!(parse_matrix("", Path::new("a.csv")).is_err());
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
