//! Design matrices from CSV: a header row, then one observation per line.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{ConfigError, Result};

pub fn read_design<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let bad = |e: csv::Error| ConfigError::field("design", e.to_string());
    let cols = rdr.headers().map_err(bad)?.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(bad)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| ConfigError {
                field: Some("design".into()),
                line: Some(line),
                column: None,
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(ConfigError {
                    field: Some("design".into()),
                    line: Some(line),
                    column: None,
                    message: "non-finite entry".into(),
                }
                .into());
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 || cols == 0 {
        return Err(ConfigError::field("design", "design has no observations").into());
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn load_design(path: &Path) -> Result<DMatrix<f64>> {
    read_design(std::fs::File::open(path)?)
}
