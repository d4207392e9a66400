//! End-to-end orchestration: ingest, lens, cover, cluster, graph, gap report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_cover, ClusterConfig};
use crate::cover::{assign, build_cover, Cover, CoverConfig};
use crate::error::{Error, Result};
use crate::feature_store::{load_dataset, merge, Dataset};
use crate::gap_analysis::{
    attribute_tags, build_report, classify_nodes, Classification, GapConfig, GapReport,
    ReportConfig, TagAttribution,
};
use crate::lens::{apply_lens, fit_lens, LensConfig, LensModel};
use crate::mapper::{build_graph, node_stats, MapperConfig, MapperGraph};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub lens: LensConfig,
    pub cover: CoverConfig,
    pub cluster: ClusterConfig,
    pub gap: GapConfig,
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        self.cover.validate()?;
        self.cluster.validate()?;
        self.gap.validate()
    }

    fn mapper(&self) -> MapperConfig {
        MapperConfig {
            lens: self.lens.clone(),
            cover: self.cover.clone(),
            cluster: self.cluster.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    /// Input records in canonical (id-sorted) order; graph members index this.
    pub dataset: Dataset,
    pub lens: LensModel,
    pub cover: Cover,
    pub graph: MapperGraph,
    pub classification: Classification,
    pub attribution: Option<TagAttribution>,
    pub report: GapReport,
}

impl Analysis {
    /// True when the analysis ran but found no weak or missing-synthetic node.
    pub fn weak_pool_empty(&self) -> bool {
        self.attribution.is_none()
    }
}

/// Runs the whole pipeline on a merged real/synthetic dataset. Record order of
/// the input does not affect any output.
pub fn analyze(dataset: &Dataset, config: &AnalysisConfig) -> Result<Analysis> {
    config.validate()?;
    let dataset = dataset.canonicalized();
    let lens = fit_lens(&config.lens, &dataset)?;
    let lens_values = apply_lens(&lens, &dataset)?;
    let cover = build_cover(&lens_values, &config.cover)?;
    let membership = assign(&cover, &lens_values)?;
    let clusters = cluster_cover(&membership, &dataset, &config.cluster)?;
    let graph = build_graph(&clusters, &dataset)?.with_config(config.mapper());
    let stats = node_stats(&graph);
    let classification = classify_nodes(&stats, &config.gap)?;
    let attribution = match attribute_tags(&graph, &classification, &dataset, &config.gap) {
        Ok(a) => Some(a),
        Err(Error::EmptyWeakPool) => None,
        Err(e) => return Err(e),
    };
    let mut report = build_report(
        &graph,
        &classification,
        attribution.as_ref(),
        &dataset,
        ReportConfig {
            mapper: config.mapper(),
            gap: config.gap.clone(),
        },
    );
    report.cover = Some(cover.clone());
    Ok(Analysis {
        dataset,
        lens,
        cover,
        graph,
        classification,
        attribution,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Exports {
    pub graph_json: bool,
    pub dot: bool,
    pub summary: bool,
}

impl Default for Exports {
    fn default() -> Self {
        Self {
            graph_json: true,
            dot: true,
            summary: true,
        }
    }
}

/// Declarative run description, usually read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub real: Option<PathBuf>,
    pub synthetic: Option<PathBuf>,
    /// Single file already holding both origins.
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    #[serde(flatten)]
    pub analysis: AnalysisConfig,
    pub exports: Exports,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            real: None,
            synthetic: None,
            input: None,
            out: PathBuf::from("mappergap-out"),
            analysis: AnalysisConfig::default(),
            exports: Exports::default(),
            seed: None,
        }
    }
}

impl RunConfig {
    /// Reads a JSON config; relative paths inside it resolve against its directory.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        config.real.iter_mut().for_each(resolve);
        config.synthetic.iter_mut().for_each(resolve);
        config.input.iter_mut().for_each(resolve);
        resolve(&mut config.out);
        Ok(config)
    }

    pub fn load_inputs(&self) -> Result<Dataset> {
        let mut parts = Vec::new();
        for path in [&self.input, &self.real, &self.synthetic].into_iter().flatten() {
            parts.push(load_dataset(path, None)?);
        }
        let mut parts = parts.into_iter();
        let first = parts
            .next()
            .ok_or_else(|| Error::InvalidConfig("no input dataset given".into()))?;
        parts.try_fold(first, |acc, next| merge(&acc, &next))
    }
}

/// Output files keyed by file name, rendered fully before anything is written.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Artifacts {
    pub files: BTreeMap<String, String>,
}

impl Artifacts {
    pub fn render(analysis: &Analysis, exports: &Exports) -> Self {
        let mut files = BTreeMap::new();
        files.insert("gapreport.json".to_string(), analysis.report.to_json());
        files.insert("lens.json".to_string(), analysis.lens.to_json() + "\n");
        if exports.graph_json {
            files.insert("graph.json".to_string(), analysis.graph.to_json());
        }
        if exports.dot {
            files.insert("graph.dot".to_string(), analysis.graph.to_dot());
        }
        if exports.summary {
            files.insert("summary.txt".to_string(), analysis.report.to_summary());
        }
        Self { files }
    }

    pub fn insert(&mut self, name: impl Into<String>, contents: impl Into<String>) {
        self.files.insert(name.into(), contents.into());
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
