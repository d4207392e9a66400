use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use mappergap::lens::LensKind;
use mappergap::pipeline::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "mappergap", version, about = "Find feature-space regions a generator failed to cover")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the Mapper graph of real + synthetic features and report weak regions.
    Analyze(AnalyzeArgs),
    /// Generate a Gaussian-mixture scenario with known withheld components.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub real: Option<PathBuf>,
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    /// One ndjson file holding both origins.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// pca2 (or pcaK), norm, or axis:I[,J...]
    #[arg(long)]
    pub lens: Option<String>,
    #[arg(long)]
    pub intervals: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub overlap: Option<f64>,
    /// Fixed single-linkage cut distance (default: per-preimage estimate).
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tag_key: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub weak_ratio: Option<f64>,
    #[arg(long)]
    pub no_dot: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Scenario JSON file.
    pub scenario: PathBuf,
    /// Output directory for real.ndjson, synthetic.ndjson and truth.ndjson.
    pub out_dir: PathBuf,
}

pub fn parse_lens(spec: &str) -> anyhow::Result<LensKind> {
    if spec == "norm" {
        return Ok(LensKind::L2Norm);
    }
    if let Some(k) = spec.strip_prefix("pca") {
        let components = k.parse().with_context(|| format!("bad PCA lens '{spec}'"))?;
        return Ok(LensKind::Pca { components });
    }
    if let Some(list) = spec.strip_prefix("axis:") {
        let indices = list
            .split(',')
            .map(|i| i.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("bad axis lens '{spec}'"))?;
        return Ok(LensKind::AxisProjection { indices });
    }
    bail!("unknown lens '{spec}' (expected pca2, norm or axis:I)")
}

impl AnalyzeArgs {
    pub fn run_config(&self) -> anyhow::Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_json_file(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => RunConfig::default(),
        };
        if self.real.is_some() || self.synthetic.is_some() || self.input.is_some() {
            config.real = self.real.clone();
            config.synthetic = self.synthetic.clone();
            config.input = self.input.clone();
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        let analysis = &mut config.analysis;
        if let Some(lens) = &self.lens {
            analysis.lens.kind = parse_lens(lens)?;
        }
        if let Some(n) = self.intervals {
            analysis.cover.n_intervals = n;
        }
        if let Some(p) = self.overlap {
            analysis.cover.overlap = p;
        }
        if let Some(eps) = self.eps {
            analysis.cluster.eps = Some(eps);
        }
        if let Some(key) = &self.tag_key {
            analysis.gap.tag_key = key.clone();
        }
        if let Some(r) = self.weak_ratio {
            analysis.gap.weak_threshold_ratio = r;
        }
        if self.no_dot {
            config.exports.dot = false;
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lens_specs() {
        assert_eq!(parse_lens("pca2").unwrap(), LensKind::Pca { components: 2 });
        assert_eq!(parse_lens("norm").unwrap(), LensKind::L2Norm);
        assert_eq!(
            parse_lens("axis:3").unwrap(),
            LensKind::AxisProjection { indices: vec![3] }
        );
        assert_eq!(
            parse_lens("axis:0,2").unwrap(),
            LensKind::AxisProjection { indices: vec![0, 2] }
        );
        assert!(parse_lens("umap").is_err());
        assert!(parse_lens("axis:x").is_err());
    }

    #[test]
    fn flags_override_defaults() {
        let cli = Cli::parse_from([
            "mappergap", "analyze", "--real", "r.ndjson", "--synthetic", "s.ndjson",
            "--intervals", "6", "--overlap", "0.4", "--eps", "1.5", "--weak-ratio", "0.3",
            "--tag-key", "class", "--lens", "norm", "--no-dot",
        ]);
        let Command::Analyze(args) = cli.command else {
            panic!("expected analyze");
        };
        let config = args.run_config().unwrap();
        assert_eq!(config.analysis.cover.n_intervals, 6);
        assert_eq!(config.analysis.cover.overlap, 0.4);
        assert_eq!(config.analysis.cluster.eps, Some(1.5));
        assert_eq!(config.analysis.gap.weak_threshold_ratio, 0.3);
        assert_eq!(config.analysis.gap.tag_key, "class");
        assert_eq!(config.analysis.lens.kind, LensKind::L2Norm);
        assert!(!config.exports.dot);
        assert_eq!(config.real, Some(PathBuf::from("r.ndjson")));
    }
}
