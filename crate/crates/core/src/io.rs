//! CSV readers and writers.
//!
//! Floats are written with 17 significant digits so every value re-parses to
//! the same bits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};

use crate::classifier::{ConceptBank, EmbeddingDataset};
use crate::error::{Error, Result};
use crate::generative::Sample;
use crate::linalg::{Matrix, Vector};
use crate::optimizer::StepRecord;
use crate::selection::SupportSet;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

fn reader(path: &Path, headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(ReaderBuilder::new().has_headers(headers).trim(csv::Trim::All).from_reader(file))
}

fn parse_f64(path: &Path, row: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::parse(path, format!("row {row}: bad number {s:?}")))
}

/// Writes a header row followed by `rows`.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Headerless numeric CSV, one matrix row per line.
pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    let mut w = writer(path)?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let mut rd = reader(path, false)?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if *cols.get_or_insert(rec.len()) != rec.len() {
            return Err(Error::parse(path, format!("row {i}: ragged row")));
        }
        for field in rec.iter() {
            data.push(parse_f64(path, i, field)?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::parse(path, "no rows"))?;
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

/// Rows are `β` followed by `x`.
pub fn write_samples_csv(path: &Path, samples: &[Sample]) -> Result<()> {
    let Some(first) = samples.first() else {
        return Err(Error::EmptyInput);
    };
    let (n, d) = (first.beta.len(), first.x.len());
    let mut m = Matrix::zeros(samples.len(), n + d);
    for (h, s) in samples.iter().enumerate() {
        for j in 0..n {
            m[(h, j)] = s.beta[j];
        }
        for j in 0..d {
            m[(h, n + j)] = s.x[j];
        }
    }
    write_matrix_csv(path, &m)
}

/// Inverse of [`write_samples_csv`]; the support is the nonzero pattern of `β`.
pub fn read_samples_csv(path: &Path, n: usize) -> Result<Vec<Sample>> {
    let m = read_matrix_csv(path)?;
    if m.ncols() <= n {
        return Err(Error::parse(path, format!("expected more than {n} columns, got {}", m.ncols())));
    }
    Ok(m.row_iter()
        .map(|row| {
            let beta = Vector::from_iterator(n, row.iter().take(n).copied());
            let x = Vector::from_iterator(row.len() - n, row.iter().skip(n).copied());
            let support = SupportSet::from_indices((0..n).filter(|&j| beta[j] != 0.0).collect());
            Sample { x, beta, support }
        })
        .collect())
}

pub const TRAJECTORY_HEADER: [&str; 5] = ["iter", "loss", "dev_all", "dev_active", "contraction"];

pub fn write_trajectory_csv(path: &Path, records: &[StepRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.iter.to_string(),
                fmt_f64(r.loss),
                fmt_f64(r.dev_all),
                fmt_f64(r.dev_active),
                fmt_f64(r.contraction),
            ]
        })
        .collect();
    write_table(path, &TRAJECTORY_HEADER, &rows)
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<StepRecord>> {
    let mut rd = reader(path, true)?;
    let header = rd.headers().map_err(|e| csv_err(path, e))?.clone();
    if header != StringRecord::from(TRAJECTORY_HEADER.to_vec()) {
        return Err(Error::parse(path, "unexpected trajectory header"));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != 5 {
            return Err(Error::parse(path, format!("row {i}: expected 5 fields")));
        }
        let iter = rec[0]
            .parse()
            .map_err(|_| Error::parse(path, format!("row {i}: bad iteration {:?}", &rec[0])))?;
        out.push(StepRecord {
            iter,
            loss: parse_f64(path, i, &rec[1])?,
            dev_all: parse_f64(path, i, &rec[2])?,
            dev_active: parse_f64(path, i, &rec[3])?,
            contraction: parse_f64(path, i, &rec[4])?,
        });
    }
    Ok(out)
}

fn read_labeled(path: &Path, key: &str) -> Result<(Vec<String>, Matrix)> {
    let mut rd = reader(path, true)?;
    let header = rd.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.get(0) != Some(key) {
        return Err(Error::parse(path, format!("first column must be {key:?}")));
    }
    let d = header.len() - 1;
    if d == 0 {
        return Err(Error::parse(path, "no value columns"));
    }
    let mut keys = Vec::new();
    let mut data = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != d + 1 {
            return Err(Error::parse(path, format!("row {i}: expected {} fields", d + 1)));
        }
        keys.push(rec[0].to_string());
        for field in rec.iter().skip(1) {
            data.push(parse_f64(path, i, field)?);
        }
    }
    if keys.is_empty() {
        return Err(Error::parse(path, "no rows"));
    }
    let rows = keys.len();
    Ok((keys, Matrix::from_row_slice(rows, d, &data)))
}

fn value_header(key: &str, d: usize) -> Vec<String> {
    std::iter::once(key.to_string()).chain((0..d).map(|j| format!("v{j}"))).collect()
}

/// `name,v0,..`; one concept per row. Columns are normalized on load.
pub fn read_concepts_csv(path: &Path) -> Result<ConceptBank> {
    let (names, rows) = read_labeled(path, "name")?;
    ConceptBank::new(names, rows.transpose())
}

pub fn write_concepts_csv(path: &Path, names: &[String], dict: &Matrix) -> Result<()> {
    let header = value_header("name", dict.nrows());
    let mut w = writer(path)?;
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (j, name) in names.iter().enumerate() {
        let rec: Vec<String> = std::iter::once(name.clone()).chain(dict.column(j).iter().map(|v| fmt_f64(*v))).collect();
        w.write_record(rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `label,v0,..`; one sample per row.
pub fn read_embeddings_csv(path: &Path, normalize: bool) -> Result<EmbeddingDataset> {
    let (labels, x) = read_labeled(path, "label")?;
    let labels = labels
        .iter()
        .enumerate()
        .map(|(i, s)| s.parse::<usize>().map_err(|_| Error::parse(path, format!("row {i}: bad label {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    EmbeddingDataset::new(x, labels, normalize)
}

pub fn write_embeddings_csv(path: &Path, data: &EmbeddingDataset) -> Result<()> {
    let header = value_header("label", data.dim());
    let mut w = writer(path)?;
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (h, label) in data.labels.iter().enumerate() {
        let rec: Vec<String> = std::iter::once(label.to_string()).chain(data.x.row(h).iter().map(|v| fmt_f64(*v))).collect();
        w.write_record(rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `contents` as-is.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}
