//! Single-linkage clustering of cover-element preimages in feature space.
//!
//! A preimage is split into the connected components of its eps-graph (pairs
//! at Euclidean distance `<= eps`). When no eps is configured it is estimated
//! per preimage from the histogram of minimum-spanning-tree edge lengths.

mod union_find;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use union_find::DisjointSet;

use crate::cover::Membership;
use crate::error::{Error, Result};
use crate::feature_store::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsHeuristic {
    FirstHistogramGap { bins: usize },
}

impl Default for EpsHeuristic {
    fn default() -> Self {
        EpsHeuristic::FirstHistogramGap { bins: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    #[serde(default)]
    pub metric: Metric,
    /// Fixed single-linkage cut distance; estimated per preimage when absent.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub eps_heuristic: EpsHeuristic,
    #[serde(default = "default_min_cluster_size")]
    pub min_cluster_size: usize,
}

fn default_min_cluster_size() -> usize {
    1
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            metric: Metric::Euclidean,
            eps: None,
            eps_heuristic: EpsHeuristic::default(),
            min_cluster_size: 1,
        }
    }
}

impl ClusterConfig {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps: Some(eps),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidConfig(format!("eps must be positive, got {eps}")));
            }
        }
        let EpsHeuristic::FirstHistogramGap { bins } = self.eps_heuristic;
        if bins < 2 {
            return Err(Error::InvalidConfig(format!("bins must be >= 2, got {bins}")));
        }
        if self.min_cluster_size < 1 {
            return Err(Error::InvalidConfig("min_cluster_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// One single-linkage component. Components below `min_cluster_size` are kept
/// and flagged as noise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub noise: bool,
}

fn canonical_rows(rows: &[usize]) -> Vec<usize> {
    let mut rows = rows.to_vec();
    rows.sort_unstable();
    rows.dedup();
    rows
}

/// Edge lengths of the Euclidean minimum spanning tree over `rows` (Prim, O(n^2)).
pub fn mst_edge_lengths(rows: &[usize], data: &Dataset, metric: Metric) -> Vec<f64> {
    let n = rows.len();
    if n < 2 {
        return Vec::new();
    }
    let point = |i: usize| data.record(rows[i]).vec.as_slice();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = metric.distance(point(current), point(j));
            if d < best[j] {
                best[j] = d;
            }
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push(best[next]);
        current = next;
    }
    edges
}

/// Left edge of the first empty bin in the histogram of `lengths`, or the
/// maximum length when every bin is occupied.
pub(crate) fn first_gap(lengths: &[f64], bins: usize) -> f64 {
    let lo = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lengths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = if hi > lo {
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &x in lengths {
            let bin = (((x - lo) / width).floor() as usize).min(bins - 1);
            counts[bin] += 1;
        }
        match counts.iter().position(|&c| c == 0) {
            Some(bin) => lo + bin as f64 * width,
            None => hi,
        }
    } else {
        hi
    };
    // All points coincide: link exact duplicates only.
    if eps > 0.0 {
        eps
    } else {
        f64::MIN_POSITIVE
    }
}

/// Estimates a cut distance for one preimage from its MST edge-length histogram.
pub fn estimate_eps(rows: &[usize], data: &Dataset, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!("bins must be >= 2, got {bins}")));
    }
    let rows = canonical_rows(rows);
    if rows.len() < 2 {
        return Err(Error::InsufficientData(
            "eps estimation needs at least 2 rows".into(),
        ));
    }
    Ok(first_gap(&mst_edge_lengths(&rows, data, Metric::Euclidean), bins))
}

/// Connected components of the eps-graph over `rows`, ordered by smallest member.
pub fn components_at(rows: &[usize], data: &Dataset, metric: Metric, eps: f64) -> Vec<Vec<usize>> {
    let rows = canonical_rows(rows);
    let n = rows.len();
    let mut sets = DisjointSet::new(n);
    for i in 0..n {
        let a = data.record(rows[i]).vec.as_slice();
        for j in (i + 1)..n {
            if metric.distance(a, &data.record(rows[j]).vec) <= eps {
                sets.union(i, j);
            }
        }
    }
    sets.groups()
        .into_iter()
        .map(|g| g.into_iter().map(|local| rows[local]).collect())
        .collect()
}

pub fn cluster_preimage(rows: &[usize], data: &Dataset, config: &ClusterConfig) -> Vec<Cluster> {
    let rows = canonical_rows(rows);
    let eps = match config.eps {
        Some(eps) => eps,
        None if rows.len() < 2 => f64::MIN_POSITIVE,
        None => {
            let EpsHeuristic::FirstHistogramGap { bins } = config.eps_heuristic;
            first_gap(&mst_edge_lengths(&rows, data, config.metric), bins)
        }
    };
    components_at(&rows, data, config.metric, eps)
        .into_iter()
        .map(|members| Cluster {
            noise: members.len() < config.min_cluster_size,
            members,
        })
        .collect()
}

/// Clusters every preimage of `membership`. Elements run in parallel on the
/// current rayon pool; the result is keyed by multi-index so it is deterministic.
pub fn cluster_cover(
    membership: &Membership,
    data: &Dataset,
    config: &ClusterConfig,
) -> Result<BTreeMap<Vec<usize>, Vec<Cluster>>> {
    config.validate()?;
    let entries: Vec<(&Vec<usize>, &Vec<usize>)> = membership.iter().collect();
    Ok(entries
        .into_par_iter()
        .map(|(element, rows)| (element.clone(), cluster_preimage(rows, data, config)))
        .collect())
}
