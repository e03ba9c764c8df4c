//! CSV ingestion: one observation per row, `d` numeric columns.

use anyhow::{bail, Context, Result};
use pco::Sample;
use std::path::Path;

/// Reads a sample from a CSV file. A non-numeric first row is treated as a
/// header and skipped; every other parse failure, ragged row, or non-finite
/// value is an error naming the offending row (1-based, header included).
pub fn ingest_csv(path: &Path) -> Result<Sample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;

    let mut data: Vec<f64> = Vec::new();
    let mut width: Option<usize> = None;
    let mut data_rows = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let row_number = idx + 1;
        let record = record.with_context(|| format!("row {row_number}: malformed CSV"))?;
        let cells: Vec<&str> = record.iter().filter(|c| !c.is_empty()).collect();
        if cells.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            cells.iter().map(|c| c.parse::<f64>()).collect();
        let values = match parsed {
            Ok(values) => values,
            Err(_) if idx == 0 => continue, // header row
            Err(_) => {
                let bad = cells
                    .iter()
                    .find(|c| c.parse::<f64>().is_err())
                    .unwrap_or(&"");
                bail!("row {row_number}: non-numeric cell {bad:?}");
            }
        };
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            bail!("row {row_number}: non-finite value {bad}");
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                bail!(
                    "row {row_number}: expected {w} columns, found {}",
                    values.len()
                );
            }
            _ => {}
        }
        data.extend(values);
        data_rows += 1;
    }
    let d = width.with_context(|| format!("{}: no data rows", path.display()))?;
    if data_rows == 0 {
        bail!("{}: no data rows", path.display());
    }
    Sample::new(data, d).map_err(|e| anyhow::anyhow!("{e}"))
}
