//! CSV emission. Floats are written with 17 significant digits so that a
//! read-back reproduces them bit-exactly; outputs are the contract, SVG
//! plots are decoration.

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// 17 significant digits; round-trips through `str::parse::<f64>`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn format_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one CSV file with a header row.
pub fn emit_csv<R, F>(
    path: &Path,
    header: &[&str],
    records: &[R],
    mut to_row: F,
) -> Result<(), CsvError>
where
    F: FnMut(&R) -> Vec<String>,
{
    let mut writer = csv::Writer::from_path(path).map_err(|source| CsvError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    let wrap = |source| CsvError::Write {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(header).map_err(wrap)?;
    for record in records {
        writer.write_record(to_row(record)).map_err(wrap)?;
    }
    writer.flush().map_err(|source| CsvError::Write {
        path: path.to_path_buf(),
        source: csv::Error::from(source),
    })?;
    Ok(())
}

/// Reads a CSV written by [`emit_csv`] back as (header, string rows).
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|source| CsvError::Read {
            path: path.to_path_buf(),
            source,
        })?;
    let header = reader
        .headers()
        .map_err(|source| CsvError::Read {
            path: path.to_path_buf(),
            source,
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| CsvError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}
