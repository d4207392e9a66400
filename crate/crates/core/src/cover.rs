//! Overlapping axis-aligned interval covers of lens space.
//!
//! Each lens dimension with data range `[lo, hi]` is split into `n` intervals
//! with fixed centers `lo + (i + 0.5) * step`, `step = (hi - lo) / n`, and width
//! `step * (1 + overlap)`. A cover element is the product of one interval per
//! dimension and is identified by its multi-index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lens::LensValues;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverConfig {
    pub n_intervals: usize,
    pub overlap: f64,
}

impl Default for CoverConfig {
    fn default() -> Self {
        Self {
            n_intervals: 10,
            overlap: 0.3,
        }
    }
}

impl CoverConfig {
    pub fn new(n_intervals: usize, overlap: f64) -> Self {
        Self {
            n_intervals,
            overlap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_intervals < 1 {
            return Err(Error::InvalidConfig("n_intervals must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::InvalidConfig(format!(
                "overlap must lie in [0, 1), got {}",
                self.overlap
            )));
        }
        Ok(())
    }
}

/// Closed interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    fn distance(&self, x: f64) -> f64 {
        if x < self.lower {
            self.lower - x
        } else if x > self.upper {
            x - self.upper
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionCover {
    pub lo: f64,
    pub hi: f64,
    /// Zero for a degenerate (constant) dimension.
    pub step: f64,
    pub intervals: Vec<Interval>,
}

impl DimensionCover {
    fn containing(&self, x: f64) -> Vec<usize> {
        let n = self.intervals.len();
        let guess = if self.step > 0.0 {
            (((x - self.lo) / self.step).floor().max(0.0) as usize).min(n - 1)
        } else {
            0
        };
        let first = guess.saturating_sub(1);
        let last = (guess + 1).min(n - 1);
        let hits: Vec<usize> = (first..=last)
            .filter(|&i| self.intervals[i].contains(x))
            .collect();
        if !hits.is_empty() {
            return hits;
        }
        // Rounding can open a one-ulp gap between abutting intervals when overlap is 0.
        let nearest = (0..n)
            .min_by(|&a, &b| {
                self.intervals[a]
                    .distance(x)
                    .total_cmp(&self.intervals[b].distance(x))
            })
            .expect("at least one interval");
        vec![nearest]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub config: CoverConfig,
    pub dims: Vec<DimensionCover>,
}

/// Cover element multi-index → ascending row indices of its preimage.
pub type Membership = BTreeMap<Vec<usize>, Vec<usize>>;

fn dimension_cover(values: impl Iterator<Item = f64>, config: &CoverConfig) -> DimensionCover {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi == lo {
        return DimensionCover {
            lo,
            hi,
            step: 0.0,
            intervals: vec![Interval {
                lower: lo - 0.5,
                upper: lo + 0.5,
            }],
        };
    }
    let n = config.n_intervals;
    let step = (hi - lo) / n as f64;
    let half_width = 0.5 * step * (1.0 + config.overlap);
    let mut intervals: Vec<Interval> = (0..n)
        .map(|i| {
            let center = lo + (i as f64 + 0.5) * step;
            Interval {
                lower: center - half_width,
                upper: center + half_width,
            }
        })
        .collect();
    // The outer endpoints must reach the data range exactly despite rounding.
    intervals[0].lower = intervals[0].lower.min(lo);
    intervals[n - 1].upper = intervals[n - 1].upper.max(hi);
    DimensionCover {
        lo,
        hi,
        step,
        intervals,
    }
}

pub fn build_cover(lens_values: &LensValues, config: &CoverConfig) -> Result<Cover> {
    config.validate()?;
    if lens_values.is_empty() || lens_values.cols() == 0 {
        return Err(Error::EmptyInput("cover needs at least one lens point".into()));
    }
    if lens_values.iter_rows().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("lens values must be finite".into()));
    }
    let dims = (0..lens_values.cols())
        .map(|j| dimension_cover(lens_values.column(j), config))
        .collect();
    Ok(Cover {
        config: config.clone(),
        dims,
    })
}

impl Cover {
    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    /// Multi-indices of every element containing `point`.
    pub fn elements_containing(&self, point: &[f64]) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for (dim, &x) in self.dims.iter().zip(point) {
            let hits = dim.containing(x);
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    hits.iter().map(move |&h| {
                        let mut idx = prefix.clone();
                        idx.push(h);
                        idx
                    })
                })
                .collect();
        }
        out
    }
}

/// Assigns every lens row to all cover elements containing it.
pub fn assign(cover: &Cover, lens_values: &LensValues) -> Result<Membership> {
    if lens_values.cols() != cover.n_dims() {
        return Err(Error::DimMismatch {
            id: "lens".into(),
            expected: cover.n_dims(),
            found: lens_values.cols(),
        });
    }
    let mut membership = Membership::new();
    for (row, point) in lens_values.iter_rows().enumerate() {
        for element in cover.elements_containing(point) {
            membership.entry(element).or_default().push(row);
        }
    }
    Ok(membership)
}
