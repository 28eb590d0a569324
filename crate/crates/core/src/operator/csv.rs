//! Dense matrix interchange format: one line per matrix row, entries
//! separated by `;`, each entry a `re,im` pair.
//!
//! ```text
//! 0.5,0;0,0.25
//! 0,-0.25;0.5,0
//! ```

use std::fmt::Write as _;
use std::path::Path;

use faer::{c64, Mat};

use super::hermitian::HermitianOperator;
use crate::{Error, Result};

pub fn parse_matrix(text: &str) -> Result<Mat<c64>> {
    let mut rows: Vec<Vec<c64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(';')
            .map(|cell| parse_entry(cell).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    let m = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != m) {
        return Err(Error::Parse(format!(
            "row {} has {} entries, expected {m}",
            bad + 1,
            rows[bad].len()
        )));
    }
    Ok(Mat::from_fn(n, m, |i, j| rows[i][j]))
}

fn parse_entry(cell: &str) -> std::result::Result<c64, String> {
    let mut parts = cell.split(',');
    let (re, im) = match (parts.next(), parts.next(), parts.next()) {
        (Some(re), Some(im), None) => (re, im),
        _ => return Err(format!("entry {cell:?} is not a `re,im` pair")),
    };
    let re: f64 = re.trim().parse().map_err(|_| format!("bad real part {re:?}"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part {im:?}"))?;
    Ok(c64::new(re, im))
}

/// Writes with Rust's shortest round-trip float formatting, so
/// `parse_matrix(format_matrix(m)) == m` exactly.
pub fn format_matrix(m: &Mat<c64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(';');
            }
            let z = m[(i, j)];
            write!(out, "{},{}", z.re, z.im).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_operator(path: impl AsRef<Path>) -> Result<HermitianOperator> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    HermitianOperator::from_mat(parse_matrix(&text)?)
}

pub fn write_operator(path: impl AsRef<Path>, op: &HermitianOperator) -> Result<()> {
    let path = path.as_ref();
    let text = format_matrix(&op.clone().into_mat());
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_entries() {
        let m = parse_matrix("0.5,0;0,-0.25\n0,0.25;0.5,0\n").unwrap();
        assert_eq!(m[(0, 1)], c64::new(0.0, -0.25));
        assert_eq!(m[(1, 0)], c64::new(0.0, 0.25));
        assert!(HermitianOperator::from_mat(m).is_ok());
    }

    #[test]
    fn rejects_ragged_and_malformed() {
        assert!(parse_matrix("1,0;0,0\n0,0\n").is_err());
        assert!(parse_matrix("1;0\n").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("a,0\n").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rho.csv");
        let op = HermitianOperator::from_fn(2, |i, j| {
            c64::new(0.1 + (i + j) as f64 / 3.0, if i < j { 0.1 } else if i > j { -0.1 } else { 0.0 })
        })
        .unwrap();
        write_operator(&path, &op).unwrap();
        let back = read_operator(&path).unwrap();
        assert_eq!(back.max_abs_diff(&op), 0.0);
    }
}
