//! Coverage-gap analysis between a real dataset and a model-generated one.
//!
//! Both datasets are mapped into feature space and summarized by a Mapper
//! graph. Nodes where synthetic data is missing or scarce mark regions the
//! generator failed to learn, and the tags of the real records there rank
//! what to collect next.
//!
//! Stages, in pipeline order:
//!
//! - [`feature_store`]: ndjson record loading, validation and merging
//! - [`lens`]: projection into lens space (PCA, norm, axis)
//! - [`cover`]: overlapping interval cover and point assignment
//! - [`cluster`]: single-linkage clustering of each preimage
//! - [`mapper`]: nerve graph, node statistics, JSON/DOT export
//! - [`gap_analysis`]: node classes, tag attribution, guidance report
//! - [`synth_oracle`]: Gaussian-mixture scenarios with known gaps
//! - [`pipeline`]: end-to-end orchestration and run configuration

pub mod cluster;
pub mod cover;
pub mod error;
pub mod feature_store;
pub mod gap_analysis;
pub mod lens;
pub mod mapper;
pub mod pipeline;
pub mod synth_oracle;

pub use error::{Error, Result};
