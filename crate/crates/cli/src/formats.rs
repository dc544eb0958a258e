//! Matrix file formats: plain CSV (one matrix row per line) and MatrixMarket
//! dense `array real general`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use wellcond_core::DenseMatrix;

const MM_HEADER: &str = "%%MatrixMarket matrix array real general";

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read matrix file {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("cannot parse matrix file {}", path.display()))
}

/// Detects the format from the first line.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    if text.trim_start().starts_with("%%MatrixMarket") {
        parse_matrix_market(text)
    } else {
        parse_csv(text)
    }
}

pub fn parse_csv(text: &str) -> Result<DenseMatrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut count = 0;
        for field in line.split(',') {
            let field = field.trim();
            let v: f64 = field
                .parse()
                .map_err(|_| anyhow!("line {}: `{field}` is not a number", lineno + 1))?;
            data.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                bail!("line {}: expected {c} fields, found {count}", lineno + 1)
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| anyhow!("no data rows"))?;
    Ok(DenseMatrix::from_row_major(rows, cols, &data)?)
}

pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        bail!("malformed MatrixMarket header `{header}`");
    }
    if tokens[2] != "array" {
        bail!(
            "only the dense `array` format is supported, got `{}`",
            tokens[2]
        );
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        bail!("only real matrices are supported, got `{}`", tokens[3]);
    }
    if tokens[4] != "general" {
        bail!("only `general` symmetry is supported, got `{}`", tokens[4]);
    }

    let mut body = lines.filter(|l| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let size = body.next().ok_or_else(|| anyhow!("missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| anyhow!("malformed size line `{size}`"))?;
    let [rows, cols] = dims[..] else {
        bail!("size line must hold two integers, got `{size}`");
    };
    let data: Vec<f64> = body
        .flat_map(str::split_whitespace)
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| anyhow!("`{t}` is not a number"))
        })
        .collect::<Result<_>>()?;
    if data.len() != rows * cols {
        bail!(
            "expected {} entries for {rows}x{cols}, found {}",
            rows * cols,
            data.len()
        );
    }
    // array format is column-major
    Ok(DenseMatrix::new(rows, cols, data)?)
}

pub fn to_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format_f64(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn to_matrix_market(m: &DenseMatrix) -> String {
    let mut out = format!("{MM_HEADER}\n{} {}\n", m.rows(), m.cols());
    for v in m.as_slice() {
        let _ = writeln!(out, "{}", format_f64(*v));
    }
    out
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}
