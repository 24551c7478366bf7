//! Grid and coefficient dumps: CSV with 9 significant digits and 8-bit
//! grayscale PPM images.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::analytic::SpectralCoefficients;
use crate::error::{Error, Result};

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Formats a value with 9 significant digits.
pub fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Writes an `m x m` grid stored as `[j * m + l]`: one line per `j`, values
/// comma-separated along `l`.
pub fn write_grid_csv(path: &Path, values: &[f64], m: usize) -> Result<()> {
    let mut f = create(path)?;
    let mut out = String::new();
    for row in values.chunks_exact(m) {
        let line: Vec<String> = row.iter().map(|&v| sig9(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    f.write_all(out.as_bytes()).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))
}

/// Reads a grid written by [`write_grid_csv`]; returns the values and `m`.
pub fn read_grid_csv(path: &Path) -> Result<(Vec<f64>, usize)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        for tok in line.split(',') {
            let v = tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("bad value `{tok}`: {e}"),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    if rows * rows != values.len() {
        return Err(Error::Parse { path: path.into(), line: rows, msg: "grid is not square".into() });
    }
    Ok((values, rows))
}

/// Min-max normalized 8-bit gray levels; a constant grid maps to 0.
pub fn gray_levels(values: &[f64]) -> Vec<u8> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|&v| if span > 0.0 { ((v - lo) / span * 255.0).round() as u8 } else { 0 })
        .collect()
}

/// Writes a binary PPM with equal RGB channels. The top image row is the
/// largest `j`, so the picture has y pointing up.
pub fn write_ppm(path: &Path, values: &[f64], m: usize) -> Result<()> {
    let gray = gray_levels(values);
    let mut bytes = format!("P6\n{m} {m}\n255\n").into_bytes();
    for row in gray.chunks_exact(m).rev() {
        for &g in row {
            bytes.extend_from_slice(&[g, g, g]);
        }
    }
    let mut f = create(path)?;
    f.write_all(&bytes).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))
}

/// Coefficient matrix as CSV: header `u,p,a`, one mode per line.
pub fn write_coefficients_csv(path: &Path, c: &SpectralCoefficients) -> Result<()> {
    let mut out = String::from("u,p,a\n");
    let k = c.order();
    for u in 0..=k {
        for p in 0..=k {
            out.push_str(&format!("{u},{p},{}\n", sig9(c.get(u, p))));
        }
    }
    let mut f = create(path)?;
    f.write_all(out.as_bytes()).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))
}
