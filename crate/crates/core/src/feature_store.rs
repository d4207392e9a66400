//! Tagged feature-vector datasets mixing real and synthetic records.
//!
//! Records are stored one JSON object per line:
//!
//! ```text
//! {"id":"r1","origin":"real","vec":[0.1,0.2],"tags":{"model":"phantom4pro"}}
//! ```
//!
//! `tags` may be omitted and defaults to an empty map. The dataset dimension is
//! inferred from the first record unless the caller pins it.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Whether a record came from the raw data or from the generating model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Real,
    Synthetic,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Real => "real",
            Origin::Synthetic => "synthetic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub id: String,
    pub origin: Origin,
    pub vec: Vec<f64>,
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
}

impl FeatureRecord {
    pub fn new(id: impl Into<String>, origin: Origin, vec: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            origin,
            vec,
            tags: BTreeMap::new(),
        }
    }

    pub fn with_tag(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.tags.insert(key.into(), value.into());
        self
    }

    pub fn is_real(&self) -> bool {
        self.origin == Origin::Real
    }
}

/// An immutable, validated collection of records sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<FeatureRecord>,
    dim: usize,
    n_real: usize,
    n_synthetic: usize,
}

impl Dataset {
    /// Validates `records` and infers the dimension from the first one.
    pub fn new(records: Vec<FeatureRecord>) -> Result<Self> {
        Self::build(records, None)
    }

    /// Like [`Dataset::new`] but every record must have dimension `dim`.
    pub fn with_dim(records: Vec<FeatureRecord>, dim: usize) -> Result<Self> {
        Self::build(records, Some(dim))
    }

    fn build(records: Vec<FeatureRecord>, expected_dim: Option<usize>) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptyDataset)?;
        let dim = expected_dim.unwrap_or(first.vec.len());
        if dim == 0 {
            return Err(Error::MalformedRecord(format!(
                "record '{}' has an empty vec",
                first.id
            )));
        }
        let mut seen = HashSet::with_capacity(records.len());
        for record in &records {
            validate_record(record, dim)?;
            if !seen.insert(record.id.as_str()) {
                return Err(Error::DuplicateId(record.id.clone()));
            }
        }
        let n_real = records.iter().filter(|r| r.is_real()).count();
        let n_synthetic = records.len() - n_real;
        Ok(Self {
            records,
            dim,
            n_real,
            n_synthetic,
        })
    }

    pub fn records(&self) -> &[FeatureRecord] {
        &self.records
    }

    pub fn record(&self, index: usize) -> &FeatureRecord {
        &self.records[index]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_real(&self) -> usize {
        self.n_real
    }

    pub fn n_synthetic(&self) -> usize {
        self.n_synthetic
    }

    /// `(n_real, n_synthetic)`.
    pub fn counts(&self) -> (usize, usize) {
        (self.n_real, self.n_synthetic)
    }

    /// Share of synthetic records over the whole dataset.
    pub fn synthetic_share(&self) -> f64 {
        self.n_synthetic as f64 / self.records.len() as f64
    }

    pub fn into_records(self) -> Vec<FeatureRecord> {
        self.records
    }

    /// Returns the same records sorted by id. Every analysis stage runs on the
    /// canonical order so results do not depend on input file order.
    pub fn canonicalized(&self) -> Dataset {
        let mut records = self.records.clone();
        records.sort_by(|a, b| a.id.cmp(&b.id));
        Dataset {
            records,
            ..*self
        }
    }

    /// SHA-256 over the canonical ndjson encoding, hex encoded.
    pub fn fingerprint(&self) -> String {
        let canonical = self.canonicalized();
        let mut hasher = Sha256::new();
        for record in canonical.records() {
            hasher.update(encode_line(record).as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    /// Serializes the dataset as ndjson, one record per line in stored order.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&encode_line(record));
            out.push('\n');
        }
        out
    }
}

fn encode_line(record: &FeatureRecord) -> String {
    // FeatureRecord only holds strings, finite floats and string maps.
    serde_json::to_string(record).expect("record serializes")
}

fn validate_record(record: &FeatureRecord, dim: usize) -> Result<()> {
    if record.vec.len() != dim {
        return Err(Error::DimMismatch {
            id: record.id.clone(),
            expected: dim,
            found: record.vec.len(),
        });
    }
    if let Some(index) = record.vec.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue {
            id: record.id.clone(),
            index,
        });
    }
    Ok(())
}

/// Concatenates `a` then `b`; dimensions must agree and ids must be disjoint.
pub fn merge(a: &Dataset, b: &Dataset) -> Result<Dataset> {
    if a.dim != b.dim {
        let offender = &b.records[0];
        return Err(Error::DimMismatch {
            id: offender.id.clone(),
            expected: a.dim,
            found: b.dim,
        });
    }
    let mut records = Vec::with_capacity(a.len() + b.len());
    records.extend_from_slice(&a.records);
    records.extend_from_slice(&b.records);
    Dataset::with_dim(records, a.dim)
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    origin: Option<String>,
    vec: Option<Vec<f64>>,
    #[serde(default)]
    tags: BTreeMap<String, String>,
}

fn parse_line(line: &str) -> Result<FeatureRecord> {
    let raw: RawRecord =
        serde_json::from_str(line).map_err(|e| Error::MalformedRecord(e.to_string()))?;
    let missing = |field: &str| Error::MalformedRecord(format!("missing field '{field}'"));
    let id = raw.id.ok_or_else(|| missing("id"))?;
    let origin = match raw.origin.as_deref() {
        Some("real") => Origin::Real,
        Some("synthetic") => Origin::Synthetic,
        Some(other) => {
            return Err(Error::MalformedRecord(format!(
                "record '{id}' has unknown origin '{other}'"
            )))
        }
        None => return Err(missing("origin")),
    };
    let vec = raw.vec.ok_or_else(|| missing("vec"))?;
    Ok(FeatureRecord {
        id,
        origin,
        vec,
        tags: raw.tags,
    })
}

/// Parses ndjson from `reader`. `source` is only used for error locations.
pub fn read_dataset<R: BufRead>(
    reader: R,
    source: &Path,
    expected_dim: Option<usize>,
) -> Result<Dataset> {
    let at = |line: usize, err: Error| Error::AtLine {
        path: source.to_path_buf(),
        line,
        source: Box::new(err),
    };

    let mut records = Vec::new();
    let mut line_of = Vec::new();
    let mut dim = expected_dim;
    let mut seen = HashSet::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_line(&line).map_err(|e| at(line_no, e))?;
        let d = *dim.get_or_insert(record.vec.len());
        validate_record(&record, d).map_err(|e| at(line_no, e))?;
        if !seen.insert(record.id.clone()) {
            return Err(at(line_no, Error::DuplicateId(record.id)));
        }
        records.push(record);
        line_of.push(line_no);
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match dim {
        Some(d) => Dataset::with_dim(records, d),
        None => Dataset::new(records),
    }
    .map_err(|e| at(line_of[0], e))
}

/// Loads and validates an ndjson dataset from disk.
pub fn load_dataset(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file), path, expected_dim)
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(dataset.to_ndjson().as_bytes())
        .map_err(|e| Error::io(path, e))
}
