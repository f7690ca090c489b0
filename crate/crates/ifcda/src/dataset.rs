//! Data model and file ingestion.
//!
//! Feature matrices follow the columns-are-samples convention: an `m x n`
//! matrix holds `n` samples of dimension `m`. On disk, CSV rows are samples;
//! loading transposes into the column convention. Digital labels are 1-based
//! with the novel class fixed at `C+1`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Which side of the adaptation a dataset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainRole {
    Source,
    Target,
}

/// On-disk feature formats.
///
/// * `Csv`: UTF-8, comma-separated, one sample per row. With `labels` set the
///   final column is the integer digital label. `header` skips/emits a header
///   row.
/// * `RawBinary`: little-endian, two `u64` dims (m, n) followed by `m*n`
///   `f64` values in column-major order. Features only, no labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv { header: bool, labels: bool },
    RawBinary,
}

/// A feature matrix plus optional digital labels for one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDataset {
    features: DMatrix<f64>,
    labels: Option<Vec<usize>>,
    role: DomainRole,
}

impl DomainDataset {
    /// Build a dataset, validating finiteness and basic label sanity.
    /// Range validation against a known class count happens later via
    /// [`DomainDataset::validate_labels`] because `C` is derived from the
    /// source labels.
    pub fn new(
        features: DMatrix<f64>,
        labels: Option<Vec<usize>>,
        role: DomainRole,
    ) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::Data("empty feature matrix".into()));
        }
        if let Some((i, j)) = first_non_finite(&features) {
            return Err(Error::Data(format!(
                "non-finite feature value at dimension {i}, sample {j}"
            )));
        }
        if let Some(y) = &labels {
            if y.len() != features.ncols() {
                return Err(Error::Label(format!(
                    "label count {} does not match sample count {}",
                    y.len(),
                    features.ncols()
                )));
            }
            if let Some(pos) = y.iter().position(|&v| v == 0) {
                return Err(Error::Label(format!(
                    "label at sample {pos} is 0; digital labels are 1-based"
                )));
            }
        }
        Ok(DomainDataset {
            features,
            labels,
            role,
        })
    }

    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.features.ncols() == 0
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn role(&self) -> DomainRole {
        self.role
    }

    /// Check labels against a known class count: source labels must lie in
    /// `1..=C`, target labels in `1..=C+1`.
    pub fn validate_labels(&self, class_count: usize) -> Result<()> {
        let max_allowed = match self.role {
            DomainRole::Source => class_count,
            DomainRole::Target => class_count + 1,
        };
        if let Some(y) = &self.labels {
            for (i, &v) in y.iter().enumerate() {
                if v < 1 || v > max_allowed {
                    return Err(Error::Label(format!(
                        "label {v} at sample {i} outside 1..={max_allowed} for {:?} domain",
                        self.role
                    )));
                }
            }
        }
        Ok(())
    }

    /// Z-score each dimension (population variance). Dimensions with
    /// near-zero variance are centered but not scaled.
    pub fn standardized(&self) -> DomainDataset {
        let mut features = self.features.clone();
        let n = features.ncols() as f64;
        for mut row in features.row_iter_mut() {
            let mean = row.sum() / n;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let scale = if var > 1e-24 { var.sqrt() } else { 1.0 };
            for v in row.iter_mut() {
                *v = (*v - mean) / scale;
            }
        }
        DomainDataset {
            features,
            labels: self.labels.clone(),
            role: self.role,
        }
    }
}

fn first_non_finite(m: &DMatrix<f64>) -> Option<(usize, usize)> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

/// Load a feature file into the `m x n` column-sample convention.
pub fn load_features(path: &Path, format: FileFormat, role: DomainRole) -> Result<DomainDataset> {
    match format {
        FileFormat::Csv { header, labels } => load_csv(path, header, labels, role),
        FileFormat::RawBinary => load_binary(path, role),
    }
}

/// Write a dataset back to disk in the given format. CSV floats are printed
/// with the shortest round-tripping representation, so save-then-load is
/// bit-identical. The binary format never carries labels.
pub fn save_features(dataset: &DomainDataset, path: &Path, format: FileFormat) -> Result<()> {
    match format {
        FileFormat::Csv { header, labels } => save_csv(dataset, path, header, labels),
        FileFormat::RawBinary => save_binary(dataset, path),
    }
}

fn load_csv(path: &Path, header: bool, labels: bool, role: DomainRole) -> Result<DomainDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut label_vec: Vec<usize> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => {
                Error::Format(format!("{}: ragged row at record {}", path.display(), r + 1))
            }
            _ => Error::Format(format!("{}: {e}", path.display())),
        })?;
        let mut fields: Vec<&str> = record.iter().collect();
        if fields.is_empty() {
            continue;
        }
        if labels {
            let raw = fields.pop().unwrap();
            label_vec.push(parse_label(raw, r + 1)?);
        }
        let mut row = Vec::with_capacity(fields.len());
        for (c, raw) in fields.iter().enumerate() {
            let v: f64 = raw.parse().map_err(|_| {
                Error::Format(format!(
                    "{}: unparseable value '{raw}' at record {}, field {}",
                    path.display(),
                    r + 1,
                    c + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "{}: non-finite value at record {}, field {}",
                    path.display(),
                    r + 1,
                    c + 1
                )));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format(format!("{}: no data rows", path.display())));
    }
    let n = rows.len();
    let m = rows[0].len();
    if m == 0 {
        return Err(Error::Format(format!(
            "{}: rows carry no feature columns",
            path.display()
        )));
    }
    // Rows are samples on disk; transpose into columns-are-samples.
    let features = DMatrix::from_fn(m, n, |i, j| rows[j][i]);
    DomainDataset::new(features, if labels { Some(label_vec) } else { None }, role)
}

fn parse_label(raw: &str, record: usize) -> Result<usize> {
    let v: f64 = raw.parse().map_err(|_| {
        Error::Label(format!("unparseable label '{raw}' at record {record}"))
    })?;
    if !v.is_finite() || v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
        return Err(Error::Label(format!(
            "label '{raw}' at record {record} is not a positive integer"
        )));
    }
    Ok(v as usize)
}

fn save_csv(dataset: &DomainDataset, path: &Path, header: bool, labels: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let m = dataset.dim();
    let with_labels = labels && dataset.labels().is_some();
    let emit = |w: &mut BufWriter<File>, line: String| -> Result<()> {
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))
    };
    if header {
        let mut cols: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
        if with_labels {
            cols.push("label".into());
        }
        emit(&mut w, cols.join(","))?;
    }
    for j in 0..dataset.len() {
        let mut fields: Vec<String> = (0..m)
            .map(|i| format!("{}", dataset.features()[(i, j)]))
            .collect();
        if with_labels {
            fields.push(format!("{}", dataset.labels().unwrap()[j]));
        }
        emit(&mut w, fields.join(","))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn load_binary(path: &Path, role: DomainRole) -> Result<DomainDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let m = r
        .read_u64::<LittleEndian>()
        .map_err(|e| Error::io(path, e))? as usize;
    let n = r
        .read_u64::<LittleEndian>()
        .map_err(|e| Error::io(path, e))? as usize;
    if m == 0 || n == 0 || m.checked_mul(n).is_none() {
        return Err(Error::Format(format!(
            "{}: invalid dimensions {m} x {n}",
            path.display()
        )));
    }
    let mut values = vec![0.0f64; m * n];
    r.read_f64_into::<LittleEndian>(&mut values)
        .map_err(|_| Error::Format(format!("{}: truncated payload", path.display())))?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::Format(format!(
            "{}: trailing bytes after {m} x {n} payload",
            path.display()
        )));
    }
    let features = DMatrix::from_column_slice(m, n, &values);
    DomainDataset::new(features, None, role)
}

fn save_binary(dataset: &DomainDataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_u64::<LittleEndian>(dataset.dim() as u64)
        .map_err(|e| Error::io(path, e))?;
    w.write_u64::<LittleEndian>(dataset.len() as u64)
        .map_err(|e| Error::io(path, e))?;
    for v in dataset.features().iter() {
        // nalgebra iterates column-major, matching the format.
        w.write_f64::<LittleEndian>(*v).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A `(C+1) x n` matrix of per-sample class probabilities. Row `C` (0-based)
/// is the novel-class component; in the closed-set setting it is
/// structurally zero but always present.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabelMatrix {
    probs: DMatrix<f64>,
    class_count: usize,
    normalized: bool,
}

impl SoftLabelMatrix {
    /// Validate and wrap a probability matrix. Entries must be nonnegative
    /// (values above `-1e-9` are clamped to zero as solver roundoff); when
    /// `normalized` is set every column must sum to 1 within 1e-9.
    pub fn new(mut probs: DMatrix<f64>, class_count: usize, normalized: bool) -> Result<Self> {
        if probs.nrows() != class_count + 1 {
            return Err(Error::Data(format!(
                "soft label matrix has {} rows, expected C+1 = {}",
                probs.nrows(),
                class_count + 1
            )));
        }
        for j in 0..probs.ncols() {
            for i in 0..probs.nrows() {
                let v = probs[(i, j)];
                if !v.is_finite() || v < -1e-9 {
                    return Err(Error::Data(format!(
                        "invalid probability {v} at class {}, sample {j}",
                        i + 1
                    )));
                }
                if v < 0.0 {
                    probs[(i, j)] = 0.0;
                }
            }
            if normalized {
                let sum: f64 = probs.column(j).sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::Data(format!(
                        "column {j} sums to {sum}, expected 1 for a normalized matrix"
                    )));
                }
            }
        }
        Ok(SoftLabelMatrix {
            probs,
            class_count,
            normalized,
        })
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    /// Shared+novel class count `C`.
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn sample_count(&self) -> usize {
        self.probs.ncols()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Concatenate columns of two matrices with identical class counts.
    pub fn hstack(left: &SoftLabelMatrix, right: &SoftLabelMatrix) -> Result<SoftLabelMatrix> {
        if left.class_count != right.class_count {
            return Err(Error::Data(format!(
                "class count mismatch {} vs {}",
                left.class_count, right.class_count
            )));
        }
        let rows = left.probs.nrows();
        let n = left.sample_count() + right.sample_count();
        let probs = DMatrix::from_fn(rows, n, |i, j| {
            if j < left.sample_count() {
                left.probs[(i, j)]
            } else {
                right.probs[(i, j - left.sample_count())]
            }
        });
        Ok(SoftLabelMatrix {
            probs,
            class_count: left.class_count,
            normalized: left.normalized && right.normalized,
        })
    }

    /// Columns `range` as a new matrix (keeps the normalized flag).
    pub fn columns(&self, start: usize, len: usize) -> SoftLabelMatrix {
        SoftLabelMatrix {
            probs: self.probs.columns(start, len).into_owned(),
            class_count: self.class_count,
            normalized: self.normalized,
        }
    }
}

/// Expand digital labels into one-hot columns with `C+1` rows.
pub fn to_one_hot(labels: &[usize], class_count: usize) -> Result<SoftLabelMatrix> {
    let mut probs = DMatrix::zeros(class_count + 1, labels.len());
    for (j, &y) in labels.iter().enumerate() {
        if y < 1 || y > class_count + 1 {
            return Err(Error::Label(format!(
                "label {y} at sample {j} outside 1..={}",
                class_count + 1
            )));
        }
        probs[(y - 1, j)] = 1.0;
    }
    SoftLabelMatrix::new(probs, class_count, true)
}
