//! Mapper graph: the nerve of the clustered cover, with real/synthetic counts per node.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cluster::{Cluster, ClusterConfig};
use crate::cover::CoverConfig;
use crate::error::{Error, Result};
use crate::feature_store::Dataset;
use crate::lens::LensConfig;

pub const GRAPH_SCHEMA: &str = "mappergraph/1";

/// Stage configuration echoed into exports.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MapperConfig {
    pub lens: LensConfig,
    pub cover: CoverConfig,
    pub cluster: ClusterConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperNode {
    pub node_id: String,
    pub cube: Vec<usize>,
    pub cluster: usize,
    pub members: Vec<usize>,
    pub member_ids: Vec<String>,
    pub n_real: usize,
    pub n_synthetic: usize,
    pub synth_fraction: f64,
    pub noise: bool,
}

impl MapperNode {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub shared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperGraph {
    pub schema: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<MapperConfig>,
    pub n_records: usize,
    pub n_real: usize,
    pub n_synthetic: usize,
    pub nodes: Vec<MapperNode>,
    pub edges: Vec<Edge>,
}

pub fn node_id(cube: &[usize], cluster: usize) -> String {
    let index: Vec<String> = cube.iter().map(usize::to_string).collect();
    format!("cube{}:c{}", index.join("_"), cluster)
}

/// Builds nodes from per-element clusters and links every pair of nodes sharing a record.
pub fn build_graph(
    clusters_by_element: &BTreeMap<Vec<usize>, Vec<Cluster>>,
    dataset: &Dataset,
) -> Result<MapperGraph> {
    let mut nodes = Vec::new();
    for (cube, clusters) in clusters_by_element {
        let mut clusters: Vec<&Cluster> = clusters.iter().filter(|c| !c.members.is_empty()).collect();
        clusters.sort_by_key(|c| c.members[0]);
        for (ordinal, cluster) in clusters.into_iter().enumerate() {
            let mut members = cluster.members.clone();
            members.sort_unstable();
            members.dedup();
            if let Some(&bad) = members.iter().find(|&&m| m >= dataset.len()) {
                return Err(Error::MismatchedInputs(format!(
                    "cluster member {bad} out of range for {} records",
                    dataset.len()
                )));
            }
            let n_real = members.iter().filter(|&&m| dataset.record(m).is_real()).count();
            let n_synthetic = members.len() - n_real;
            nodes.push(MapperNode {
                node_id: node_id(cube, ordinal),
                cube: cube.clone(),
                cluster: ordinal,
                member_ids: members.iter().map(|&m| dataset.record(m).id.clone()).collect(),
                synth_fraction: n_synthetic as f64 / members.len() as f64,
                n_real,
                n_synthetic,
                members,
                noise: cluster.noise,
            });
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptyClustering);
    }

    let mut nodes_of_record: Vec<Vec<usize>> = vec![Vec::new(); dataset.len()];
    for (index, node) in nodes.iter().enumerate() {
        for &m in &node.members {
            nodes_of_record[m].push(index);
        }
    }
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for containing in &nodes_of_record {
        for (i, &a) in containing.iter().enumerate() {
            for &b in &containing[i + 1..] {
                *shared.entry((a, b)).or_default() += 1;
            }
        }
    }
    let mut edges: Vec<Edge> = shared
        .into_iter()
        .map(|((a, b), count)| {
            let (a, b) = (&nodes[a].node_id, &nodes[b].node_id);
            let (source, target) = if a < b { (a, b) } else { (b, a) };
            Edge {
                source: source.clone(),
                target: target.clone(),
                shared: count,
            }
        })
        .collect();
    edges.sort();

    Ok(MapperGraph {
        schema: GRAPH_SCHEMA.to_string(),
        config: None,
        n_records: dataset.len(),
        n_real: dataset.n_real(),
        n_synthetic: dataset.n_synthetic(),
        nodes,
        edges,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeStatsRow {
    pub node_id: String,
    pub size: usize,
    pub n_real: usize,
    pub n_synthetic: usize,
    pub synth_fraction: f64,
}

/// Dataset-level totals. Member slots count multi-membership; record counts do not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsTotals {
    pub n_nodes: usize,
    pub n_records: usize,
    pub n_real: usize,
    pub n_synthetic: usize,
    pub synthetic_share: f64,
    pub real_slots: usize,
    pub synthetic_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub rows: Vec<NodeStatsRow>,
    pub totals: StatsTotals,
}

pub fn node_stats(graph: &MapperGraph) -> NodeStats {
    let rows: Vec<NodeStatsRow> = graph
        .nodes
        .iter()
        .map(|n| NodeStatsRow {
            node_id: n.node_id.clone(),
            size: n.size(),
            n_real: n.n_real,
            n_synthetic: n.n_synthetic,
            synth_fraction: n.synth_fraction,
        })
        .collect();
    let totals = StatsTotals {
        n_nodes: rows.len(),
        n_records: graph.n_records,
        n_real: graph.n_real,
        n_synthetic: graph.n_synthetic,
        synthetic_share: if graph.n_records == 0 {
            0.0
        } else {
            graph.n_synthetic as f64 / graph.n_records as f64
        },
        real_slots: rows.iter().map(|r| r.n_real).sum(),
        synthetic_slots: rows.iter().map(|r| r.n_synthetic).sum(),
    };
    NodeStats { rows, totals }
}

impl MapperGraph {
    pub fn with_config(mut self, config: MapperConfig) -> Self {
        self.config = Some(config);
        self
    }

    pub fn node(&self, node_id: &str) -> Option<&MapperNode> {
        self.nodes.iter().find(|n| n.node_id == node_id)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("graph serializes");
        out.push('\n');
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("graph mapper {\n");
        out.push_str("  // fill: synthetic fraction in five bands, dark blue = no synthetic data\n");
        out.push_str("  node [shape=circle, style=filled, fontsize=10];\n");
        for node in &self.nodes {
            let width = 0.3 + 0.1 * (node.size() as f64).sqrt();
            let _ = writeln!(
                out,
                "  \"{}\" [label=\"R:{}/S:{}\", fillcolor=\"{}\", width={:.3}];",
                node.node_id,
                node.n_real,
                node.n_synthetic,
                fraction_color(node.synth_fraction),
                width
            );
        }
        for edge in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\" [weight={}];",
                edge.source, edge.target, edge.shared
            );
        }
        out.push_str("}\n");
        out
    }
}

pub const FRACTION_BANDS: [&str; 5] = ["#08306b", "#2171b5", "#6baed6", "#fc9272", "#cb181d"];

/// Fill color for a synthetic fraction: band `floor(5 * f)`, top band closed at 1.
pub fn fraction_color(fraction: f64) -> &'static str {
    let band = ((fraction * 5.0).floor().max(0.0) as usize).min(4);
    FRACTION_BANDS[band]
}
