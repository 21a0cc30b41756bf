//! Plain-text matrix I/O for the batch tools.
//!
//! Format: a header line `rows cols`, then the entries in row-major order
//! separated by whitespace (line breaks are free).  Values are written with
//! 17 significant digits so a write/read round trip is bitwise exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Writes `m` to `path` in the text format described above.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{} {}", m.nrows(), m.ncols())?;
    for i in 0..m.nrows() {
        let mut line = String::new();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{:.16e}", m[(i, j)]));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a matrix written by [`write_matrix`] (or by hand in the same
/// format).  Parse failures carry the file path and 1-based line number.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let shown = path.display().to_string();
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: shown.clone(),
        line,
        msg,
    };

    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let (rows, cols) = loop {
        let Some((idx, line)) = lines.next() else {
            return Err(parse_err(1, "missing header line `rows cols`".into()));
        };
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let rows: usize = parts
            .next()
            .ok_or_else(|| parse_err(idx + 1, "missing row count".into()))?
            .parse()
            .map_err(|e| parse_err(idx + 1, format!("bad row count: {e}")))?;
        let cols: usize = parts
            .next()
            .ok_or_else(|| parse_err(idx + 1, "missing column count".into()))?
            .parse()
            .map_err(|e| parse_err(idx + 1, format!("bad column count: {e}")))?;
        if let Some(extra) = parts.next() {
            return Err(parse_err(
                idx + 1,
                format!("unexpected token `{extra}` after header"),
            ));
        }
        break (rows, cols);
    };

    let total = rows
        .checked_mul(cols)
        .ok_or_else(|| parse_err(1, "matrix size overflows".into()))?;
    let mut entries = Vec::with_capacity(total);
    let mut last_line = 1;
    for (idx, line) in lines {
        let line = line?;
        last_line = idx + 1;
        for token in line.split_whitespace() {
            if entries.len() == total {
                return Err(parse_err(
                    idx + 1,
                    format!("unexpected extra entry `{token}` (expected {total})"),
                ));
            }
            let value: f64 = token
                .parse()
                .map_err(|e| parse_err(idx + 1, format!("bad entry `{token}`: {e}")))?;
            entries.push(value);
        }
    }
    if entries.len() != total {
        return Err(parse_err(
            last_line,
            format!("expected {} entries, found {}", total, entries.len()),
        ));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &entries))
}
