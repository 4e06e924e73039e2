//! Embedding file formats.
//!
//! Two formats are understood:
//!
//! * **TSF1**, a small binary container: the ASCII line `TSF1 <rows> <cols>\n`, then
//!   `rows` little-endian `u32` labels, then `rows * cols` little-endian `f32` values in
//!   row-major order.
//! * **CSV** without a header row: the first field is the integer label, the remaining
//!   fields are the vector components.
//!
//! Values are promoted to `f64` on load. Writing TSF1 narrows to `f32`, so a cloud
//! whose values are all exactly representable as `f32` round-trips bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::cloud::LabeledPointCloud;
use crate::error::{Error, Result};

const TSF1_MAGIC: &str = "TSF1";
// Longest plausible header: magic + two u64 decimals + separators.
const MAX_HEADER_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Tsf1,
    Csv,
}

impl EmbeddingFormat {
    /// Sniffs the format from the leading bytes.
    pub fn detect(bytes: &[u8]) -> Self {
        if bytes.starts_with(b"TSF1 ") {
            EmbeddingFormat::Tsf1
        } else {
            EmbeddingFormat::Csv
        }
    }
}

/// Loads a labeled cloud, sniffing the format when no hint is given.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    format_hint: Option<EmbeddingFormat>,
) -> Result<LabeledPointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format_hint.unwrap_or_else(|| EmbeddingFormat::detect(&bytes)) {
        EmbeddingFormat::Tsf1 => decode_tsf1(&bytes),
        EmbeddingFormat::Csv => decode_csv(&bytes),
    }
}

pub fn decode_tsf1(bytes: &[u8]) -> Result<LabeledPointCloud> {
    let newline = bytes
        .iter()
        .take(MAX_HEADER_LEN)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("TSF1 header line not terminated".into()))?;
    let header = std::str::from_utf8(&bytes[..newline])
        .map_err(|_| Error::Format("TSF1 header is not ASCII".into()))?;
    let fields: Vec<&str> = header.split(' ').collect();
    let [magic, rows, cols] = fields.as_slice() else {
        return Err(Error::Format(format!("bad TSF1 header `{header}`")));
    };
    if *magic != TSF1_MAGIC {
        return Err(Error::Format(format!("bad magic `{magic}`")));
    }
    let rows: usize = rows
        .parse()
        .map_err(|_| Error::Format(format!("bad row count `{rows}`")))?;
    let cols: usize = cols
        .parse()
        .map_err(|_| Error::Format(format!("bad column count `{cols}`")))?;

    let payload = &bytes[newline + 1..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|v| v.checked_mul(4))
        .and_then(|v| v.checked_add(rows * 4))
        .ok_or_else(|| Error::Format("TSF1 dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "TSF1 payload is {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let (label_bytes, value_bytes) = payload.split_at(rows * 4);
    let labels = label_bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let values: Vec<f64> = value_bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let points =
        Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Format(e.to_string()))?;
    LabeledPointCloud::new(points, labels)
}

pub fn encode_tsf1(cloud: &LabeledPointCloud) -> Vec<u8> {
    let (rows, cols) = (cloud.len(), cloud.dim());
    let mut out = format!("{TSF1_MAGIC} {rows} {cols}\n").into_bytes();
    out.reserve(rows * 4 * (cols + 1));
    for &l in cloud.labels() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    for &v in cloud.points().iter() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn write_tsf1(path: impl AsRef<Path>, cloud: &LabeledPointCloud) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_tsf1(cloud))
        .map_err(|e| Error::io(path, e))
}

pub fn decode_csv(bytes: &[u8]) -> Result<LabeledPointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut cols = None;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        if record.len() < 2 {
            return Err(Error::Data(format!(
                "row {row}: expected a label column followed by values"
            )));
        }
        let label = &record[0];
        labels.push(label.parse::<u32>().map_err(|_| {
            Error::Data(format!(
                "row {row}: label `{label}` is not a non-negative integer"
            ))
        })?);
        let width = record.len() - 1;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::Format(format!(
                    "row {row} has {width} values, expected {c}"
                )))
            }
            _ => {}
        }
        for field in record.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Format(format!("row {row}: `{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "row {row}: non-finite value `{field}`"
                )));
            }
            values.push(v);
        }
    }
    let cols = cols.ok_or(Error::EmptyInput("CSV has no rows"))?;
    let points = Array2::from_shape_vec((labels.len(), cols), values)
        .map_err(|e| Error::Format(e.to_string()))?;
    LabeledPointCloud::new(points, labels)
}

pub fn encode_csv(cloud: &LabeledPointCloud) -> String {
    let mut out = String::new();
    for (row, &l) in cloud.points().rows().into_iter().zip(cloud.labels()) {
        out.push_str(&l.to_string());
        for v in row {
            out.push(',');
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    out
}
