//! Node classification, weak-node tag attribution and collection guidance.
//!
//! A node is classified against the threshold `tau = r * s`, where `s` is the
//! global synthetic share and `r` the configured ratio:
//!
//! | class                | rule                                   |
//! |----------------------|----------------------------------------|
//! | `MissingSynthetic`   | no synthetic members                   |
//! | `AnomalousSynthetic` | no real members                        |
//! | `Weak`               | mixed and `synth_fraction < tau`       |
//! | `Balanced`           | everything else                        |
//!
//! Real records inside `Weak` and `MissingSynthetic` nodes form the weak pool.
//! Their tag values, ranked by share of the pool, are the collection guidance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::feature_store::Dataset;
use crate::mapper::{MapperConfig, MapperGraph, NodeStats};

pub const REPORT_SCHEMA: &str = "gapreport/1";
pub const UNTAGGED: &str = "<untagged>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    #[serde(default = "default_tag_key")]
    pub tag_key: String,
    #[serde(default = "default_ratio")]
    pub weak_threshold_ratio: f64,
    #[serde(default = "default_dedupe")]
    pub dedupe: bool,
}

fn default_tag_key() -> String {
    "model".to_string()
}

fn default_ratio() -> f64 {
    0.5
}

fn default_dedupe() -> bool {
    true
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            tag_key: default_tag_key(),
            weak_threshold_ratio: default_ratio(),
            dedupe: default_dedupe(),
        }
    }
}

impl GapConfig {
    pub fn validate(&self) -> Result<()> {
        let r = self.weak_threshold_ratio;
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "weak_threshold_ratio must lie in (0, 1], got {r}"
            )));
        }
        if self.tag_key.is_empty() {
            return Err(Error::InvalidConfig("tag_key must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    MissingSynthetic,
    Balanced,
    Weak,
    AnomalousSynthetic,
}

impl NodeClass {
    pub fn of(n_real: usize, n_synthetic: usize, synth_fraction: f64, threshold: f64) -> Self {
        if n_synthetic == 0 {
            NodeClass::MissingSynthetic
        } else if n_real == 0 {
            NodeClass::AnomalousSynthetic
        } else if synth_fraction < threshold {
            NodeClass::Weak
        } else {
            NodeClass::Balanced
        }
    }

    /// Whether real members of this class feed the attribution pool.
    pub fn in_weak_pool(self) -> bool {
        matches!(self, NodeClass::Weak | NodeClass::MissingSynthetic)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::MissingSynthetic => "missing_synthetic",
            NodeClass::Balanced => "balanced",
            NodeClass::Weak => "weak",
            NodeClass::AnomalousSynthetic => "anomalous_synthetic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedNode {
    pub node_id: String,
    pub class: NodeClass,
    pub size: usize,
    pub n_real: usize,
    pub n_synthetic: usize,
    pub synth_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub missing_synthetic: usize,
    pub balanced: usize,
    pub weak: usize,
    pub anomalous_synthetic: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.missing_synthetic + self.balanced + self.weak + self.anomalous_synthetic
    }

    fn add(&mut self, class: NodeClass) {
        match class {
            NodeClass::MissingSynthetic => self.missing_synthetic += 1,
            NodeClass::Balanced => self.balanced += 1,
            NodeClass::Weak => self.weak += 1,
            NodeClass::AnomalousSynthetic => self.anomalous_synthetic += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub synthetic_share: f64,
    pub threshold: f64,
    pub nodes: Vec<ClassifiedNode>,
    pub counts: ClassCounts,
    pub weak_node_fraction: f64,
}

impl Classification {
    pub fn class_of(&self, node_id: &str) -> Option<NodeClass> {
        self.nodes
            .iter()
            .find(|n| n.node_id == node_id)
            .map(|n| n.class)
    }
}

pub fn classify_nodes(stats: &NodeStats, config: &GapConfig) -> Result<Classification> {
    config.validate()?;
    let share = stats.totals.synthetic_share;
    if !(share > 0.0 && share < 1.0) {
        return Err(Error::DegenerateDataset(share));
    }
    let threshold = config.weak_threshold_ratio * share;
    let mut counts = ClassCounts::default();
    let nodes: Vec<ClassifiedNode> = stats
        .rows
        .iter()
        .map(|row| {
            let class = NodeClass::of(row.n_real, row.n_synthetic, row.synth_fraction, threshold);
            counts.add(class);
            ClassifiedNode {
                node_id: row.node_id.clone(),
                class,
                size: row.size,
                n_real: row.n_real,
                n_synthetic: row.n_synthetic,
                synth_fraction: row.synth_fraction,
            }
        })
        .collect();
    let weak_node_fraction = if nodes.is_empty() {
        0.0
    } else {
        counts.weak as f64 / nodes.len() as f64
    };
    Ok(Classification {
        synthetic_share: share,
        threshold,
        nodes,
        counts,
        weak_node_fraction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagShare {
    pub value: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagAttribution {
    pub tag_key: String,
    pub dedupe: bool,
    /// Pool size, with multiplicity when `dedupe` is off.
    pub pool_size: usize,
    /// Shares per tag value, ordered by value.
    pub shares: Vec<TagShare>,
    /// Distinct ids of the real records in the pool, sorted.
    pub pool_ids: Vec<String>,
}

impl TagAttribution {
    /// Tag values ranked by share, descending, ties by value. `<untagged>` is not
    /// actionable and is left out.
    pub fn ranked(&self) -> Vec<&TagShare> {
        let mut ranked: Vec<&TagShare> = self.shares.iter().filter(|s| s.value != UNTAGGED).collect();
        ranked.sort_by(|a, b| {
            b.fraction
                .total_cmp(&a.fraction)
                .then_with(|| a.value.cmp(&b.value))
        });
        ranked
    }
}

fn check_consistent(graph: &MapperGraph, classification: &Classification) -> Result<()> {
    let same = graph.nodes.len() == classification.nodes.len()
        && graph
            .nodes
            .iter()
            .zip(&classification.nodes)
            .all(|(n, c)| n.node_id == c.node_id);
    if same {
        Ok(())
    } else {
        Err(Error::MismatchedInputs(
            "classification does not belong to this graph".into(),
        ))
    }
}

pub fn attribute_tags(
    graph: &MapperGraph,
    classification: &Classification,
    dataset: &Dataset,
    config: &GapConfig,
) -> Result<TagAttribution> {
    check_consistent(graph, classification)?;
    if graph.n_records != dataset.len() {
        return Err(Error::MismatchedInputs(
            "graph was built from a different dataset".into(),
        ));
    }

    let mut pool: Vec<usize> = Vec::new();
    let mut any_weak = false;
    for (node, classified) in graph.nodes.iter().zip(&classification.nodes) {
        if !classified.class.in_weak_pool() {
            continue;
        }
        any_weak = true;
        pool.extend(node.members.iter().copied().filter(|&m| dataset.record(m).is_real()));
    }
    if !any_weak || pool.is_empty() {
        return Err(Error::EmptyWeakPool);
    }
    let distinct: BTreeSet<usize> = pool.iter().copied().collect();
    if config.dedupe {
        pool = distinct.iter().copied().collect();
    }

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &m in &pool {
        let value = dataset
            .record(m)
            .tags
            .get(&config.tag_key)
            .map(String::as_str)
            .unwrap_or(UNTAGGED);
        *counts.entry(value).or_default() += 1;
    }
    if counts.len() == 1 && counts.contains_key(UNTAGGED) {
        return Err(Error::TagKeyAbsent(config.tag_key.clone()));
    }

    let pool_size = pool.len();
    let shares = counts
        .into_iter()
        .map(|(value, count)| TagShare {
            value: value.to_string(),
            count,
            fraction: count as f64 / pool_size as f64,
        })
        .collect();
    let mut pool_ids: Vec<String> = distinct.iter().map(|&m| dataset.record(m).id.clone()).collect();
    pool_ids.sort();

    Ok(TagAttribution {
        tag_key: config.tag_key.clone(),
        dedupe: config.dedupe,
        pool_size,
        shares,
        pool_ids,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    #[serde(flatten)]
    pub mapper: MapperConfig,
    pub gap: GapConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub fingerprint: String,
    pub dim: usize,
    pub n_records: usize,
    pub n_real: usize,
    pub n_synthetic: usize,
}

impl DatasetSummary {
    pub fn of(dataset: &Dataset) -> Self {
        Self {
            fingerprint: dataset.fingerprint(),
            dim: dataset.dim(),
            n_records: dataset.len(),
            n_real: dataset.n_real(),
            n_synthetic: dataset.n_synthetic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceEntry {
    pub rank: usize,
    pub value: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub schema: String,
    pub config: ReportConfig,
    pub dataset: DatasetSummary,
    pub synthetic_share: f64,
    pub threshold: f64,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub class_counts: ClassCounts,
    pub weak_node_fraction: f64,
    /// Set when a node has no synthetic or no real members: the generator is
    /// considered under-trained and the guidance is advisory.
    pub convergence_flag: bool,
    pub nodes: Vec<ClassifiedNode>,
    pub attribution: Option<TagAttribution>,
    pub guidance: Vec<GuidanceEntry>,
    /// Interval endpoints of the cover the graph was built on.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cover: Option<Cover>,
}

pub fn build_report(
    graph: &MapperGraph,
    classification: &Classification,
    attribution: Option<&TagAttribution>,
    dataset: &Dataset,
    config: ReportConfig,
) -> GapReport {
    let guidance = attribution
        .map(|a| {
            a.ranked()
                .into_iter()
                .enumerate()
                .map(|(i, share)| GuidanceEntry {
                    rank: i + 1,
                    value: share.value.clone(),
                    count: share.count,
                    fraction: share.fraction,
                })
                .collect()
        })
        .unwrap_or_default();
    let counts = classification.counts;
    GapReport {
        schema: REPORT_SCHEMA.to_string(),
        config,
        dataset: DatasetSummary::of(dataset),
        synthetic_share: classification.synthetic_share,
        threshold: classification.threshold,
        n_nodes: graph.nodes.len(),
        n_edges: graph.edges.len(),
        class_counts: counts,
        weak_node_fraction: classification.weak_node_fraction,
        convergence_flag: counts.missing_synthetic > 0 || counts.anomalous_synthetic > 0,
        nodes: classification.nodes.clone(),
        attribution: attribution.cloned(),
        guidance,
        cover: None,
    }
}

impl GapReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn top_tags(&self, n: usize) -> Vec<&str> {
        self.guidance.iter().take(n).map(|g| g.value.as_str()).collect()
    }

    /// One-line verdict printed by the CLI.
    pub fn verdict(&self) -> String {
        if self.guidance.is_empty() {
            format!(
                "weak_node_fraction={:.4}; no weak nodes at threshold {:.4}",
                self.weak_node_fraction, self.threshold
            )
        } else {
            format!(
                "weak_node_fraction={:.4}; top tags: {}",
                self.weak_node_fraction,
                self.top_tags(3).join(", ")
            )
        }
    }

    pub fn to_summary(&self) -> String {
        let mut out = String::new();
        let c = &self.class_counts;
        let _ = writeln!(out, "coverage gap report ({})", self.schema);
        let _ = writeln!(
            out,
            "records: {} ({} real, {} synthetic, dim {})",
            self.dataset.n_records, self.dataset.n_real, self.dataset.n_synthetic, self.dataset.dim
        );
        let _ = writeln!(out, "fingerprint: {}", self.dataset.fingerprint);
        let _ = writeln!(
            out,
            "graph: {} nodes, {} edges; synthetic share {:.4}, weak threshold {:.4}",
            self.n_nodes, self.n_edges, self.synthetic_share, self.threshold
        );
        let _ = writeln!(
            out,
            "classes: missing_synthetic={} weak={} balanced={} anomalous_synthetic={}",
            c.missing_synthetic, c.weak, c.balanced, c.anomalous_synthetic
        );
        let _ = writeln!(out, "weak_node_fraction: {:.4}", self.weak_node_fraction);
        let _ = writeln!(
            out,
            "convergence_flag: {}{}",
            self.convergence_flag,
            if self.convergence_flag {
                " (generator looks under-trained; guidance is advisory)"
            } else {
                ""
            }
        );
        match &self.attribution {
            Some(a) => {
                let _ = writeln!(
                    out,
                    "weak pool: {} real records (tag key '{}', dedupe {})",
                    a.pool_size, a.tag_key, a.dedupe
                );
                let _ = writeln!(out, "guidance:");
                for g in &self.guidance {
                    let _ = writeln!(
                        out,
                        "  {:>2}. {} {:.1}% ({} records)",
                        g.rank,
                        g.value,
                        100.0 * g.fraction,
                        g.count
                    );
                }
            }
            None => {
                let _ = writeln!(out, "guidance: none (no weak nodes at threshold)");
            }
        }
        out
    }
}
