//! Independent reference implementations used as test oracles. Nothing here
//! calls into the code paths it checks.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use mappergap::feature_store::{Dataset, FeatureRecord, Origin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Random real/synthetic dataset; ids are zero-padded so id order is generation order.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, dim: usize, scale: f64) -> Dataset {
    let records = (0..n)
        .map(|i| {
            let origin = if rng.random_bool(0.5) {
                Origin::Real
            } else {
                Origin::Synthetic
            };
            let vec = (0..dim).map(|_| scale * gaussian(rng)).collect();
            let record = FeatureRecord::new(format!("p{i:04}"), origin, vec);
            if origin == Origin::Real {
                let tag = ["a", "b", "c"][rng.random_range(0..3)];
                record.with_tag("model", tag)
            } else {
                record
            }
        })
        .collect();
    Dataset::new(records).unwrap()
}

/// Sample covariance with `n - 1` denominator, computed by plain loops.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for row in rows {
        for j in 0..d {
            mean[j] += row[j] / n as f64;
        }
    }
    let mut cov = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            let mut s = 0.0;
            for row in rows {
                s += (row[a] - mean[a]) * (row[b] - mean[b]);
            }
            cov[a][b] = s / (n - 1) as f64;
        }
    }
    cov
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// `(eigenvalue, unit eigenvector)` pairs sorted by eigenvalue descending.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let n = matrix.len();
    let mut a = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|i| (a[i][i], v.iter().map(|row| row[i]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    pairs
}

/// Largest absolute difference between `a` and `b` after aligning sign.
pub fn diff_up_to_sign(a: &[f64], b: &[f64]) -> f64 {
    let same = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let flip = a.iter().zip(b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
    same.min(flip)
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Connected components of the eps-graph by breadth-first search over the full
/// adjacency matrix. Components and members ascend by record index.
pub fn brute_components(rows: &[usize], data: &Dataset, eps: f64) -> Vec<Vec<usize>> {
    let mut rows: Vec<usize> = rows.to_vec();
    rows.sort_unstable();
    rows.dedup();
    let n = rows.len();
    let adjacent: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| euclid(&data.record(rows[i]).vec, &data.record(rows[j]).vec) <= eps)
                .collect()
        })
        .collect();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut component = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            component.push(rows[i]);
            for j in 0..n {
                if adjacent[i][j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        component.sort_unstable();
        out.push(component);
    }
    out.sort();
    out
}

/// MST edge lengths by Kruskal over every pair, sorted ascending.
pub fn kruskal_mst(rows: &[usize], data: &Dataset) -> Vec<f64> {
    let n = rows.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((euclid(&data.record(rows[i]).vec, &data.record(rows[j]).vec), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut label: Vec<usize> = (0..n).collect();
    let mut lengths = Vec::new();
    for (d, i, j) in pairs {
        let (li, lj) = (label[i], label[j]);
        if li != lj {
            for l in label.iter_mut() {
                if *l == lj {
                    *l = li;
                }
            }
            lengths.push(d);
        }
    }
    lengths
}

/// Histogram rule recomputed directly: left edge of the first empty bin, or
/// the maximum length when all bins are occupied.
pub fn histogram_gap(lengths: &[f64], bins: usize) -> f64 {
    let lo = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lengths.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return hi;
    }
    let width = (hi - lo) / bins as f64;
    for b in 0..bins {
        let left = lo + b as f64 * width;
        let right = lo + (b + 1) as f64 * width;
        let occupied = lengths.iter().any(|&x| {
            if b == bins - 1 {
                x >= left
            } else {
                x >= left && x < right
            }
        });
        if !occupied {
            return left;
        }
    }
    hi
}

/// Every unordered pair of member lists with a non-empty intersection, as
/// `(smaller id, larger id, intersection size)`.
pub fn brute_edges(nodes: &[(String, Vec<usize>)]) -> BTreeSet<(String, String, usize)> {
    let mut out = BTreeSet::new();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let shared = nodes[i].1.iter().filter(|m| nodes[j].1.contains(m)).count();
            if shared > 0 {
                let (a, b) = if nodes[i].0 < nodes[j].0 {
                    (&nodes[i].0, &nodes[j].0)
                } else {
                    (&nodes[j].0, &nodes[i].0)
                };
                out.insert((a.clone(), b.clone(), shared));
            }
        }
    }
    out
}
