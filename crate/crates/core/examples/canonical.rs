//! Runs the canonical withheld-component scenario and prints detection metrics.

use std::time::Instant;

use mappergap::pipeline::{analyze, AnalysisConfig};
use mappergap::synth_oracle::{generate_scenario, score_detection, OracleScenario};

fn main() -> mappergap::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_240_917);
    let scenario = OracleScenario::canonical(seed);
    let generated = generate_scenario(&scenario)?;
    let start = Instant::now();
    let analysis = analyze(&generated.merged(), &AnalysisConfig::default())?;
    let elapsed = start.elapsed();
    let metrics = score_detection(&analysis.report, &generated.truth, &scenario)?;
    print!("{}", analysis.report.to_summary());
    println!("recall: {:?}", metrics.recall);
    println!("top-1: {:?} correct={:?}", metrics.top1_tag, metrics.top1_correct);
    println!("analysis time: {elapsed:?}");
    Ok(())
}
