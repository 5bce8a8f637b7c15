//! SVMLight / LIBSVM text format: `label idx:val idx:val ...` with 1-based,
//! whitespace-separated feature indices.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;
use sketchy_core::{CsrMatrix, Dataset, DesignMatrix, Real};

use crate::error::{BenchError, Result};

/// Reads a file. `n_features` fixes `p`; otherwise `p` is the largest index seen.
pub fn parse_svmlight<T: Real>(path: impl AsRef<Path>, n_features: Option<usize>) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BenchError::io(path, e))?;
    read_svmlight(BufReader::new(file), n_features).map_err(|e| match e {
        BenchError::Io { source, .. } => BenchError::io(path, source),
        other => other,
    })
}

fn parse_number<N: FromStr>(tok: &str, what: &str, line: usize) -> Result<N> {
    tok.parse()
        .map_err(|_| BenchError::parse(line, format!("malformed {what} '{tok}'")))
}

pub fn read_svmlight<T: Real, R: BufRead>(reader: R, n_features: Option<usize>) -> Result<Dataset<T>> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, T)>> = Vec::new();
    let mut max_idx = 0usize;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| BenchError::io("<svmlight>", e))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let label: f64 = parse_number(toks.next().unwrap_or(""), "label", lineno)?;
        if !label.is_finite() {
            return Err(BenchError::parse(lineno, "label is not finite"));
        }
        let mut row = Vec::new();
        for tok in toks {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| BenchError::parse(lineno, format!("expected idx:val, got '{tok}'")))?;
            if idx == "qid" {
                continue;
            }
            let idx: usize = parse_number(idx, "feature index", lineno)?;
            if idx == 0 {
                return Err(BenchError::parse(lineno, "feature indices are 1-based"));
            }
            let val: f64 = parse_number(val, "feature value", lineno)?;
            if !val.is_finite() {
                return Err(BenchError::parse(lineno, format!("feature {idx} is not finite")));
            }
            if row.iter().any(|&(j, _)| j == idx - 1) {
                return Err(BenchError::parse(lineno, format!("duplicate feature index {idx}")));
            }
            if let Some(p) = n_features {
                if idx > p {
                    return Err(BenchError::parse(lineno, format!("feature index {idx} exceeds p = {p}")));
                }
            }
            max_idx = max_idx.max(idx);
            row.push((idx - 1, T::lit(val)));
        }
        labels.push(T::lit(label));
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(BenchError::parse(0, "no samples in input"));
    }
    let p = n_features.unwrap_or(max_idx).max(1);
    let csr = CsrMatrix::from_rows(p, rows)?;
    Ok(Dataset::new(DesignMatrix::Sparse(csr), DVector::from_vec(labels))?)
}

/// Writes nonzero entries only. Values use the shortest round-trip representation.
pub fn write_svmlight<T: Real, W: Write>(ds: &Dataset<T>, mut out: W) -> std::io::Result<()> {
    let a = ds.design();
    for i in 0..ds.n() {
        write!(out, "{}", ds.labels()[i])?;
        let mut err = Ok(());
        a.for_each_in_row(i, |j, v| {
            if err.is_ok() && v != T::zero() {
                err = write!(out, " {}:{}", j + 1, v);
            }
        });
        err?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_svmlight<T: Real>(ds: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_svmlight(ds, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| BenchError::io(path, e))
}
