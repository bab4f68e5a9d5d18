//! CSV and JSON readers and writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use ggm_core::{Dataset, GgmError, SymMatrix};
use nalgebra::DMatrix;
use serde::Serialize;

/// A dataset plus its optional row index (e.g. dates).
pub struct Table {
    pub data: Dataset,
    pub index: Option<Vec<String>>,
}

fn parse_error(line: usize, msg: impl Into<String>) -> anyhow::Error {
    GgmError::Parse { line, msg: msg.into() }.into()
}

fn is_numeric(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok()
}

/// Reads a numeric CSV. A non-numeric first row is taken as the header; a
/// first column that is non-numeric (or headed `date`) is taken as the row index.
pub fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(parse_error(1, "empty file"));
    };
    let header_row = first.iter().any(|f| !is_numeric(f));
    let header: Option<Vec<String>> = header_row.then(|| first.iter().map(str::to_string).collect());
    let body = &records[usize::from(header_row)..];
    let Some((_, first_body)) = body.first() else {
        return Err(parse_error(records.len() + 1, "no data rows"));
    };
    let has_index = header.as_ref().is_some_and(|h| h[0].eq_ignore_ascii_case("date") || h[0].is_empty())
        || !is_numeric(&first_body[0]);
    let skip = usize::from(has_index);
    let width = first_body.len() - skip;

    let mut index = Vec::with_capacity(body.len());
    let mut values = Vec::with_capacity(body.len() * width);
    for (line, rec) in body {
        if has_index {
            index.push(rec[0].to_string());
        }
        for (col, field) in rec.iter().enumerate().skip(skip) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(*line, format!("column {}: '{field}' is not a number", col + 1)))?;
            if !v.is_finite() {
                return Err(parse_error(*line, format!("column {}: non-finite value", col + 1)));
            }
            values.push(v);
        }
    }
    let labels = header.map(|h| h[skip..].to_vec());
    let m = DMatrix::from_row_slice(body.len(), width, &values);
    let data = Dataset::new(m, labels).with_context(|| format!("invalid dataset in {}", path.display()))?;
    Ok(Table { data, index: has_index.then_some(index) })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

/// Square matrix, one row per line, no header.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sym(path: &Path, m: &SymMatrix) -> Result<()> {
    write_matrix(path, m.as_matrix())
}

/// Dataset with a header row, and the row index as a leading `date` column if present.
pub fn write_table(path: &Path, data: &Dataset, index: Option<&[String]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let labels: Vec<String> = match data.labels() {
        Some(l) => l.to_vec(),
        None => (1..=data.p()).map(|j| format!("X{j}")).collect(),
    };
    let mut header = Vec::new();
    if index.is_some() {
        header.push("date".to_string());
    }
    header.extend(labels);
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        if let Some(idx) = index {
            rec.push(idx[i].clone());
        }
        rec.extend(data.values().row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Serializable rows with a header taken from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows given as strings under an explicit header.
pub fn write_records(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
