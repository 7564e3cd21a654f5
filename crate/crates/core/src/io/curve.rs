//! Plain-text point files: one point per line, whitespace-separated fields
//! written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::problem::CurvePoint;
use crate::{Error, Result};

/// Writes `point.z` as one line.
pub fn write_curve_point(sink: &mut impl Write, point: &CurvePoint) -> std::io::Result<()> {
    write_row(sink, &point.z)
}

fn write_row(sink: &mut impl Write, z: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for v in z {
        if !first {
            sink.write_all(b" ")?;
        }
        write!(sink, "{v:.16e}")?;
        first = false;
    }
    sink.write_all(b"\n")
}

/// Streams accepted points to a file, flushing after every line.
pub struct CurveWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CurveWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(CurveWriter { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    pub fn write(&mut self, point: &CurvePoint) -> Result<()> {
        write_curve_point(&mut self.out, point)
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// Reads every point of a curve file. Blank lines and `#` comments are skipped.
pub fn read_curve(path: &Path, n_dim: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_curve(&text, n_dim).map_err(|(line, message)| Error::Format { path: path.into(), line, message })
}

/// The first point of a point file.
pub fn read_initial_point(path: &Path, n_dim: usize) -> Result<Vec<f64>> {
    read_curve(path, n_dim)?.into_iter().next().ok_or_else(|| Error::Format {
        path: path.into(),
        line: 0,
        message: "file contains no point".into(),
    })
}

fn parse_curve(text: &str, n_dim: usize) -> Result<Vec<Vec<f64>>, (usize, String)> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let row = content
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|_| (i + 1, format!("not a number: {tok}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        if row.len() != n_dim {
            return Err((i + 1, format!("expected {n_dim} fields, found {}", row.len())));
        }
        points.push(row);
    }
    Ok(points)
}
