//! Beat datasets: CSV ingestion, stratified splitting and batch iteration.
//!
//! On disk a dataset is a header-less CSV with one beat per row: the
//! normalized samples followed by an integer class label.

mod split;
pub mod synth;

pub use split::{batches, stratified_split, Split, DEFAULT_RATIOS};

use crate::error::{EcgError, Result};
use crate::kernel::Signal;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct BeatRecord {
    pub samples: Vec<f32>,
    pub label: usize,
}

impl BeatRecord {
    pub fn signal(&self) -> Signal {
        Signal::mono(self.samples.clone()).expect("records are non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    MitBih,
    Ptb,
    Other,
}

/// Bijective class index to name mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    names: Vec<String>,
}

impl LabelMap {
    pub fn mit_bih() -> Self {
        Self::from_names(&["Normal", "Supraventricular", "Ventricular", "Fusion Beat", "Unknown"])
    }

    pub fn ptb() -> Self {
        Self::from_names(&["Normal", "Abnormal"])
    }

    /// Names must be non-empty and distinct.
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(EcgError::Data("label map needs at least one class".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(EcgError::Data(format!("duplicate class name {n:?}")));
            }
        }
        Ok(Self { names })
    }

    /// MIT-BIH names for 5 classes, PTB names for 2, `class<i>` otherwise.
    pub fn for_classes(n: usize) -> Self {
        match n {
            5 => Self::mit_bih(),
            2 => Self::ptb(),
            _ => Self {
                names: (0..n).map(|i| format!("class{i}")).collect(),
            },
        }
    }

    fn from_names(names: &[&str]) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn source(&self) -> Source {
        if *self == Self::mit_bih() {
            Source::MitBih
        } else if *self == Self::ptb() {
            Source::Ptb
        } else {
            Source::Other
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<BeatRecord>,
    labels: LabelMap,
    source: Source,
}

impl Dataset {
    /// Validates uniform record length and label range.
    pub fn new(records: Vec<BeatRecord>, labels: LabelMap) -> Result<Self> {
        let Some(first) = records.first() else {
            return Err(EcgError::Data("dataset is empty".into()));
        };
        let len = first.samples.len();
        if len == 0 {
            return Err(EcgError::Data("records have no samples".into()));
        }
        for (i, r) in records.iter().enumerate() {
            if r.samples.len() != len {
                return Err(EcgError::Data(format!(
                    "record {i} has {} samples, expected {len}",
                    r.samples.len()
                )));
            }
            if r.label >= labels.len() {
                return Err(EcgError::Data(format!(
                    "record {i} has label {} but only {} classes",
                    r.label,
                    labels.len()
                )));
            }
        }
        let source = labels.source();
        Ok(Self {
            records,
            labels,
            source,
        })
    }

    pub fn records(&self) -> &[BeatRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn sample_length(&self) -> usize {
        self.records[0].samples.len()
    }

    pub fn labels(&self) -> &LabelMap {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// Re-labels the class names; every label must stay in range.
    pub fn with_labels(self, labels: LabelMap) -> Result<Self> {
        Self::new(self.records, labels)
    }

    pub(crate) fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.records[i].clone()).collect(),
            self.labels.clone(),
        )
    }

    pub fn signals(&self) -> Vec<Signal> {
        self.records.iter().map(BeatRecord::signal).collect()
    }

    pub fn label_vec(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Counts per class index; classes with no records are absent.
    pub fn class_distribution(&self) -> BTreeMap<usize, usize> {
        class_distribution(&self.records)
    }
}

pub fn class_distribution(records: &[BeatRecord]) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.label).or_insert(0) += 1;
    }
    counts
}

/// Reads a beat CSV. With `strict`, samples outside `[0, 1]` are rejected;
/// otherwise they are clamped. Label names are inferred from the largest
/// label seen (see [`LabelMap::for_classes`]).
pub fn load_beats_csv(path: impl AsRef<Path>, expected_length: usize, strict: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| EcgError::io(path, e))?;
    read_beats(file, expected_length, strict)
        .map_err(|e| match e {
            EcgError::Data(m) => EcgError::Data(format!("{}: {m}", path.display())),
            other => other,
        })
}

pub fn read_beats(reader: impl std::io::Read, expected_length: usize, strict: bool) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| EcgError::Data(format!("row {row_no}: {e}")))?;
        if row.len() != expected_length + 1 {
            return Err(EcgError::Data(format!(
                "row {row_no}: expected {} fields, found {}",
                expected_length + 1,
                row.len()
            )));
        }
        let mut samples = Vec::with_capacity(expected_length);
        for (col, field) in row.iter().take(expected_length).enumerate() {
            let v: f32 = field.trim().parse().map_err(|_| {
                EcgError::Data(format!("row {row_no}, field {}: not a number: {field:?}", col + 1))
            })?;
            if !v.is_finite() {
                return Err(EcgError::Data(format!(
                    "row {row_no}, field {}: non-finite sample",
                    col + 1
                )));
            }
            if !(0.0..=1.0).contains(&v) {
                if strict {
                    return Err(EcgError::Data(format!(
                        "row {row_no}, field {}: sample {v} outside [0, 1]",
                        col + 1
                    )));
                }
                samples.push(v.clamp(0.0, 1.0));
            } else {
                samples.push(v);
            }
        }
        let label = parse_label(&row[expected_length])
            .ok_or_else(|| EcgError::Data(format!("row {row_no}: invalid label {:?}", &row[expected_length])))?;
        records.push(BeatRecord { samples, label });
    }
    let n_classes = records.iter().map(|r| r.label + 1).max().unwrap_or(0);
    Dataset::new(records, LabelMap::for_classes(n_classes))
}

/// Accepts `3` as well as the `3.0` spelling used by some exports.
fn parse_label(field: &str) -> Option<usize> {
    let field = field.trim();
    field.parse::<usize>().ok().or_else(|| {
        let v: f64 = field.parse().ok()?;
        (v >= 0.0 && v.fract() == 0.0 && v < u32::MAX as f64).then_some(v as usize)
    })
}

pub fn write_beats(dataset: &Dataset, writer: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let mut fields: Vec<String> = Vec::with_capacity(dataset.sample_length() + 1);
    for r in dataset.records() {
        fields.clear();
        fields.extend(r.samples.iter().map(f32::to_string));
        fields.push(r.label.to_string());
        w.write_record(&fields)
            .map_err(|e| EcgError::Data(format!("csv write failed: {e}")))?;
    }
    w.flush().map_err(|e| EcgError::Data(format!("csv flush failed: {e}")))
}

pub fn write_beats_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| EcgError::io(path, e))?;
    write_beats(dataset, std::io::BufWriter::new(file))
}
