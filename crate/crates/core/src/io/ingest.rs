//! CSV ingestion: one numeric column in design order, optional header.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::smoothing::{Orientation, Sample, MIN_SAMPLE_SIZE};

/// Reads `path` into a sample. A non-numeric first row is taken as a header;
/// blank lines are skipped.
pub fn ingest_csv<T: Scalar>(path: &Path, orientation: Orientation) -> Result<Sample<T>> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{shown}: {e}")))?;
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Io(format!("{shown}: {e}")))?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        match fields.as_slice() {
            [] => continue,
            [field] => match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(T::lit(v)),
                _ if k == 0 => continue,
                _ => return Err(Error::Parse { path: shown, line, field: field.to_string() }),
            },
            _ => {
                return Err(Error::Parse { path: shown, line, field: record.iter().collect::<Vec<_>>().join(",") });
            }
        }
    }
    if values.len() < MIN_SAMPLE_SIZE {
        return Err(Error::TooFewRows(shown, values.len()));
    }
    Sample::new(values, orientation)
}
