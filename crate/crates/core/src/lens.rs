//! Lens (filter) functions mapping feature vectors into a low-dimensional space.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_store::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LensKind {
    AxisProjection { indices: Vec<usize> },
    L2Norm,
    Pca { components: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LensConfig {
    #[serde(flatten)]
    pub kind: LensKind,
    /// Z-score features before fitting and applying the lens.
    #[serde(default = "default_standardize")]
    pub standardize_input: bool,
}

fn default_standardize() -> bool {
    true
}

impl Default for LensConfig {
    fn default() -> Self {
        Self {
            kind: LensKind::Pca { components: 2 },
            standardize_input: true,
        }
    }
}

impl LensConfig {
    pub fn pca(components: usize) -> Self {
        Self {
            kind: LensKind::Pca { components },
            standardize_input: true,
        }
    }

    pub fn l2_norm() -> Self {
        Self {
            kind: LensKind::L2Norm,
            standardize_input: false,
        }
    }

    pub fn axis(indices: Vec<usize>) -> Self {
        Self {
            kind: LensKind::AxisProjection { indices },
            standardize_input: false,
        }
    }

    pub fn standardized(mut self, on: bool) -> Self {
        self.standardize_input = on;
        self
    }
}

/// Per-feature z-score parameters. Zero-variance features keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Feature indices left unscaled because their variance is zero.
    pub degenerate: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaParams {
    /// Mean of the (possibly standardized) training features.
    pub center: Vec<f64>,
    /// Unit-norm principal axes, strongest first, largest-magnitude entry positive.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensModel {
    pub config: LensConfig,
    pub input_dim: usize,
    pub output_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub standardization: Option<Standardization>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pca: Option<PcaParams>,
}

/// Row-major `n × k` matrix of lens images, one row per record.
#[derive(Debug, Clone, PartialEq)]
pub struct LensValues {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LensValues {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidConfig("ragged lens rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.data[i * self.cols + j])
    }
}

fn feature_mean_std(data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let d = data.dim();
    let n = data.len() as f64;
    let mut mean = vec![0.0; d];
    for record in data.records() {
        for (m, v) in mean.iter_mut().zip(&record.vec) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for record in data.records() {
        for ((s, v), m) in var.iter_mut().zip(&record.vec).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let denom = (data.len().max(2) - 1) as f64;
    let std = var.into_iter().map(|s| (s / denom).sqrt()).collect();
    (mean, std)
}

fn fit_standardization(data: &Dataset) -> Standardization {
    let (mean, std) = feature_mean_std(data);
    let mut degenerate = Vec::new();
    let scale = std
        .iter()
        .zip(&mean)
        .enumerate()
        .map(|(j, (&s, m))| {
            if s <= 16.0 * f64::EPSILON * m.abs().max(1.0) {
                degenerate.push(j);
                1.0
            } else {
                s
            }
        })
        .collect();
    if !degenerate.is_empty() {
        log::warn!(
            "{} zero-variance feature(s) left unstandardized: {:?}",
            degenerate.len(),
            degenerate
        );
    }
    Standardization {
        mean,
        scale,
        degenerate,
    }
}

fn preprocess(standardization: Option<&Standardization>, vec: &[f64]) -> Vec<f64> {
    match standardization {
        Some(s) => vec
            .iter()
            .zip(&s.mean)
            .zip(&s.scale)
            .map(|((v, m), sc)| (v - m) / sc)
            .collect(),
        None => vec.to_vec(),
    }
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn fit_pca(rows: &[Vec<f64>], k: usize) -> PcaParams {
    let n = rows.len();
    let d = rows[0].len();
    let mut center = vec![0.0; d];
    for row in rows {
        for (c, v) in center.iter_mut().zip(row) {
            *c += v;
        }
    }
    center.iter_mut().for_each(|c| *c /= n as f64);

    let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - center[j]);
    let mut cov = centered.transpose() * &centered;
    cov /= (n - 1) as f64;
    // Exact symmetry so the eigensolver sees identical input regardless of rounding.
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = avg;
            cov[(j, i)] = avg;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(k);
    let mut explained_variance = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        orient(&mut v);
        components.push(v);
        explained_variance.push(eig.eigenvalues[idx].max(0.0));
    }
    PcaParams {
        center,
        components,
        explained_variance,
    }
}

/// Fits a lens model. Output is fully determined by `config` and the record order of `data`.
pub fn fit_lens(config: &LensConfig, data: &Dataset) -> Result<LensModel> {
    let d = data.dim();
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }

    let output_dim = match &config.kind {
        LensKind::AxisProjection { indices } => {
            if indices.is_empty() {
                return Err(Error::InvalidConfig("axis projection needs an index".into()));
            }
            if let Some(bad) = indices.iter().find(|&&i| i >= d) {
                return Err(Error::InvalidConfig(format!(
                    "axis index {bad} out of range for dimension {d}"
                )));
            }
            indices.len()
        }
        LensKind::L2Norm => 1,
        LensKind::Pca { components } => {
            if n < 2 {
                return Err(Error::InsufficientData(format!(
                    "PCA needs at least 2 records, got {n}"
                )));
            }
            let max_k = d.min(n - 1);
            if *components < 1 || *components > max_k {
                return Err(Error::InvalidConfig(format!(
                    "PCA components must lie in 1..={max_k}, got {components}"
                )));
            }
            *components
        }
    };

    let standardization = config.standardize_input.then(|| fit_standardization(data));

    let pca = match &config.kind {
        LensKind::Pca { components } => {
            let rows: Vec<Vec<f64>> = data
                .records()
                .iter()
                .map(|r| preprocess(standardization.as_ref(), &r.vec))
                .collect();
            Some(fit_pca(&rows, *components))
        }
        _ => None,
    };

    Ok(LensModel {
        config: config.clone(),
        input_dim: d,
        output_dim,
        standardization,
        pca,
    })
}

impl LensModel {
    /// Lens image of a single feature vector of length `input_dim`.
    pub fn project(&self, vec: &[f64]) -> Vec<f64> {
        let z = preprocess(self.standardization.as_ref(), vec);
        match &self.config.kind {
            LensKind::AxisProjection { indices } => indices.iter().map(|&i| z[i]).collect(),
            LensKind::L2Norm => vec![z.iter().map(|x| x * x).sum::<f64>().sqrt()],
            LensKind::Pca { .. } => {
                let pca = self.pca.as_ref().expect("PCA lens carries parameters");
                pca.components
                    .iter()
                    .map(|c| {
                        z.iter()
                            .zip(&pca.center)
                            .zip(c)
                            .map(|((x, m), w)| (x - m) * w)
                            .sum()
                    })
                    .collect()
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lens model serializes")
    }
}

/// Applies a fitted lens to every record, preserving record order.
pub fn apply_lens(model: &LensModel, data: &Dataset) -> Result<LensValues> {
    if data.dim() != model.input_dim {
        return Err(Error::DimMismatch {
            id: data.records().first().map(|r| r.id.clone()).unwrap_or_default(),
            expected: model.input_dim,
            found: data.dim(),
        });
    }
    let rows = data.len();
    let cols = model.output_dim;
    let mut values = Vec::with_capacity(rows * cols);
    for record in data.records() {
        values.extend(model.project(&record.vec));
    }
    Ok(LensValues {
        rows,
        cols,
        data: values,
    })
}
