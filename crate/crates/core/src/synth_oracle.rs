//! Ground-truth-known benchmark scenarios.
//!
//! Real records are drawn from a mixture of isotropic Gaussians; synthetic
//! records from the same mixture with some components withheld. The withheld
//! components play the part of feature regions the generating model never
//! learned, so a correct gap analysis should point at their tags.
//!
//! Every record has its own random stream: a ChaCha8 generator keyed by the
//! scenario seed, with stream id `i` for real record `i` and `2^63 + j` for
//! synthetic record `j`. Output therefore depends only on the scenario.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_store::{merge, Dataset, FeatureRecord, Origin};
use crate::gap_analysis::GapReport;

const SYNTHETIC_STREAM: u64 = 1 << 63;
const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub mean: Vec<f64>,
    pub stddev: f64,
    pub tag: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleScenario {
    pub dim: usize,
    pub components: Vec<MixtureComponent>,
    #[serde(default)]
    pub withheld: Vec<usize>,
    pub n_real: usize,
    pub n_synthetic: usize,
    pub seed: u64,
    #[serde(default = "default_tag_key")]
    pub tag_key: String,
}

fn default_tag_key() -> String {
    "model".to_string()
}

impl OracleScenario {
    /// Four unit-weight components in 16 dimensions, means `3 * e_k` (pairwise
    /// distance `3 * sqrt(2)`), stddev 0.5, component 2 withheld, 800 + 800 records.
    pub fn canonical(seed: u64) -> Self {
        let dim = 16;
        let tags = ["alpha", "bravo", "charlie", "delta"];
        let components = tags
            .iter()
            .enumerate()
            .map(|(k, tag)| {
                let mut mean = vec![0.0; dim];
                mean[k] = 3.0;
                MixtureComponent {
                    mean,
                    stddev: 0.5,
                    tag: tag.to_string(),
                    weight: 0.25,
                }
            })
            .collect();
        Self {
            dim,
            components,
            withheld: vec![2],
            n_real: 800,
            n_synthetic: 800,
            seed,
            tag_key: default_tag_key(),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidScenario(msg));
        if self.dim == 0 {
            return invalid("dim must be >= 1".into());
        }
        if self.components.is_empty() {
            return invalid("at least one component is required".into());
        }
        if self.n_real + self.n_synthetic == 0 {
            return invalid("scenario generates no records".into());
        }
        for (k, c) in self.components.iter().enumerate() {
            if c.mean.len() != self.dim {
                return invalid(format!(
                    "component {k} mean has length {}, expected {}",
                    c.mean.len(),
                    self.dim
                ));
            }
            if c.mean.iter().any(|v| !v.is_finite()) {
                return invalid(format!("component {k} mean is not finite"));
            }
            if !(c.stddev > 0.0 && c.stddev.is_finite()) {
                return invalid(format!("component {k} stddev must be positive"));
            }
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return invalid(format!("component {k} weight must be positive"));
            }
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return invalid(format!("weights sum to {total}, expected 1"));
        }
        let withheld: BTreeSet<usize> = self.withheld.iter().copied().collect();
        if withheld.len() != self.withheld.len() {
            return invalid("withheld indices repeat".into());
        }
        if let Some(bad) = withheld.iter().find(|&&k| k >= self.components.len()) {
            return invalid(format!("withheld index {bad} out of range"));
        }
        if withheld.len() >= self.components.len() {
            return invalid("withheld must be a proper subset of the components".into());
        }
        Ok(())
    }

    pub fn is_withheld(&self, component: usize) -> bool {
        self.withheld.contains(&component)
    }

    pub fn withheld_tags(&self) -> BTreeSet<&str> {
        self.withheld
            .iter()
            .map(|&k| self.components[k].tag.as_str())
            .collect()
    }

    /// Synthetic-side weights, renormalized over the kept components.
    pub fn synthetic_weights(&self) -> Vec<f64> {
        let kept: f64 = self
            .components
            .iter()
            .enumerate()
            .filter(|(k, _)| !self.is_withheld(*k))
            .map(|(_, c)| c.weight)
            .sum();
        self.components
            .iter()
            .enumerate()
            .map(|(k, c)| if self.is_withheld(k) { 0.0 } else { c.weight / kept })
            .collect()
    }
}

/// Record id → mixture component that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    components: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct TruthLine {
    id: String,
    component: usize,
}

impl GroundTruth {
    pub fn component(&self, id: &str) -> Option<usize> {
        self.components.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.components.iter().map(|(id, &c)| (id.as_str(), c))
    }

    /// Sidecar ndjson, one `{"id":...,"component":...}` per line, sorted by id.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for (id, &component) in &self.components {
            let line = TruthLine {
                id: id.clone(),
                component,
            };
            out.push_str(&serde_json::to_string(&line).expect("truth line serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_ndjson(text: &str) -> Result<Self> {
        let mut components = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let entry: TruthLine = serde_json::from_str(line)?;
            components.insert(entry.id, entry.component);
        }
        Ok(Self { components })
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedScenario {
    pub real: Dataset,
    pub synthetic: Dataset,
    pub truth: GroundTruth,
}

impl GeneratedScenario {
    pub fn merged(&self) -> Dataset {
        merge(&self.real, &self.synthetic).expect("generated halves are compatible")
    }
}

fn record_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn pick(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

fn draw(scenario: &OracleScenario, weights: &[f64], rng: &mut ChaCha8Rng) -> (usize, Vec<f64>) {
    let component = pick(weights, rng.random::<f64>());
    let c = &scenario.components[component];
    let vec = c
        .mean
        .iter()
        .map(|m| m + c.stddev * rng.sample::<f64, _>(StandardNormal))
        .collect();
    (component, vec)
}

pub fn generate_scenario(scenario: &OracleScenario) -> Result<GeneratedScenario> {
    scenario.validate()?;
    let real_weights: Vec<f64> = scenario.components.iter().map(|c| c.weight).collect();
    let synth_weights = scenario.synthetic_weights();
    let mut truth = BTreeMap::new();

    let mut real = Vec::with_capacity(scenario.n_real);
    for i in 0..scenario.n_real {
        let mut rng = record_rng(scenario.seed, i as u64);
        let (component, vec) = draw(scenario, &real_weights, &mut rng);
        let id = format!("real-{i:05}");
        truth.insert(id.clone(), component);
        real.push(
            FeatureRecord::new(id, Origin::Real, vec)
                .with_tag(scenario.tag_key.clone(), scenario.components[component].tag.clone()),
        );
    }
    let mut synthetic = Vec::with_capacity(scenario.n_synthetic);
    for j in 0..scenario.n_synthetic {
        let mut rng = record_rng(scenario.seed, SYNTHETIC_STREAM | j as u64);
        let (component, vec) = draw(scenario, &synth_weights, &mut rng);
        let id = format!("synth-{j:05}");
        truth.insert(id.clone(), component);
        synthetic.push(FeatureRecord::new(id, Origin::Synthetic, vec));
    }

    let empty_side = |records: Vec<FeatureRecord>| -> Result<Dataset> {
        if records.is_empty() {
            Err(Error::InvalidScenario(
                "both real and synthetic records are required".into(),
            ))
        } else {
            Dataset::with_dim(records, scenario.dim)
        }
    };
    Ok(GeneratedScenario {
        real: empty_side(real)?,
        synthetic: empty_side(synthetic)?,
        truth: GroundTruth { components: truth },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    /// False for scenarios without withheld components.
    pub applicable: bool,
    pub withheld_real: usize,
    pub detected: usize,
    pub recall: Option<f64>,
    pub top1_tag: Option<String>,
    pub top1_correct: Option<bool>,
}

/// Recall of withheld-component real records inside the weak pool, and whether
/// the top guidance tag belongs to a withheld component.
pub fn score_detection(
    report: &GapReport,
    truth: &GroundTruth,
    scenario: &OracleScenario,
) -> Result<DetectionMetrics> {
    scenario
        .validate()
        .map_err(|e| Error::MismatchedInputs(e.to_string()))?;
    if truth.len() != scenario.n_real + scenario.n_synthetic
        || report.dataset.n_real != scenario.n_real
        || report.dataset.n_synthetic != scenario.n_synthetic
    {
        return Err(Error::MismatchedInputs(
            "report, ground truth and scenario disagree on record counts".into(),
        ));
    }
    if let Some((_, bad)) = truth.iter().find(|&(_, c)| c >= scenario.components.len()) {
        return Err(Error::MismatchedInputs(format!(
            "ground truth names component {bad}, scenario has {}",
            scenario.components.len()
        )));
    }

    let pool: BTreeSet<&str> = report
        .attribution
        .iter()
        .flat_map(|a| a.pool_ids.iter().map(String::as_str))
        .collect();
    if let Some(stray) = pool.iter().find(|id| truth.component(id).is_none()) {
        return Err(Error::MismatchedInputs(format!(
            "weak pool record '{stray}' missing from ground truth"
        )));
    }

    let top1_tag = report.guidance.first().map(|g| g.value.clone());
    if scenario.withheld.is_empty() {
        return Ok(DetectionMetrics {
            applicable: false,
            withheld_real: 0,
            detected: 0,
            recall: None,
            top1_tag,
            top1_correct: None,
        });
    }

    let withheld_real: Vec<&str> = truth
        .iter()
        .filter(|(id, c)| scenario.is_withheld(*c) && id.starts_with("real-"))
        .map(|(id, _)| id)
        .collect();
    let detected = withheld_real.iter().filter(|id| pool.contains(*id)).count();
    let recall = if withheld_real.is_empty() {
        None
    } else {
        Some(detected as f64 / withheld_real.len() as f64)
    };
    let withheld_tags = scenario.withheld_tags();
    let top1_correct = Some(
        top1_tag
            .as_deref()
            .is_some_and(|t| withheld_tags.contains(t)),
    );
    Ok(DetectionMetrics {
        applicable: true,
        withheld_real: withheld_real.len(),
        detected,
        recall,
        top1_tag,
        top1_correct,
    })
}
