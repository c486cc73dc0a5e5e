//! Plot-ready CSV tables.

use std::path::Path;

use feq_core::ChebRep;

use crate::report::write_atomic;

pub const SAMPLE_POINTS: usize = 1001;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: u64, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// 17 significant digits: enough to round-trip every f64.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows(path: &Path, header: [&str; 2], rows: impl Iterator<Item = [String; 2]>) -> Result<(), TableError> {
    let io_err = |source| TableError::Io { path: path.display().to_string(), source };
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |source| TableError::Csv { path: path.display().to_string(), source };
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(e.into_error()))?;
    write_atomic(path, &bytes).map_err(io_err)
}

/// `x,phi` at `SAMPLE_POINTS` uniform points of [-1, 1].
pub fn write_solution(path: &Path, phi: &ChebRep) -> Result<(), TableError> {
    let half = (SAMPLE_POINTS - 1) as f64 / 2.0;
    let rows = (0..SAMPLE_POINTS).map(|i| {
        let x = (i as f64 - half) / half;
        [fmt(x), fmt(phi.eval(x).unwrap_or(f64::NAN))]
    });
    write_rows(path, ["x", "phi"], rows)
}

pub fn write_coeffs(path: &Path, rep: &ChebRep) -> Result<(), TableError> {
    let rows = rep.coeffs().iter().enumerate().map(|(i, c)| [i.to_string(), fmt(*c)]);
    write_rows(path, ["index", "coefficient"], rows)
}

/// Reads an `index,coefficient` table; indices must run 0, 1, 2, …
pub fn read_coeffs(path: &Path) -> Result<Vec<f64>, TableError> {
    let name = path.display().to_string();
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| TableError::Csv { path: name.clone(), source })?;
    let malformed = |line: u64, message: String| TableError::Malformed { path: name.clone(), line, message };
    let headers = r.headers().map_err(|source| TableError::Csv { path: name.clone(), source })?.clone();
    if headers.iter().collect::<Vec<_>>() != ["index", "coefficient"] {
        return Err(malformed(1, "expected header `index,coefficient`".into()));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|source| TableError::Csv { path: name.clone(), source })?;
        let line = rec.position().map_or(0, |p| p.line());
        let index: usize = rec[0].parse().map_err(|_| malformed(line, format!("bad index {:?}", &rec[0])))?;
        if index != out.len() {
            return Err(malformed(line, format!("expected index {}, found {index}", out.len())));
        }
        let c: f64 = rec[1].parse().map_err(|_| malformed(line, format!("bad coefficient {:?}", &rec[1])))?;
        if !c.is_finite() {
            return Err(malformed(line, format!("non-finite coefficient {c}")));
        }
        out.push(c);
    }
    Ok(out)
}
