mod args;

use std::fs;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::Parser;
use mappergap::pipeline::{analyze, Artifacts};
use mappergap::synth_oracle::{generate_scenario, OracleScenario};

use crate::args::{AnalyzeArgs, Cli, Command, OracleArgs};

const THREADS_ENV: &str = "MAPPERGAP_THREADS";

enum Outcome {
    Success,
    NothingToCollect,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build_global()
        .context("configuring worker threads")?;
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> anyhow::Result<Outcome> {
    let config = args.run_config()?;
    let dataset = config.load_inputs()?;
    let analysis = analyze(&dataset, &config.analysis)?;

    let mut artifacts = Artifacts::render(&analysis, &config.exports);
    let finished = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or_default();
    let meta = serde_json::json!({
        "tool": "mappergap",
        "version": env!("CARGO_PKG_VERSION"),
        "finished_unix": finished,
        "threads": rayon::current_num_threads(),
        "seed": config.seed,
    });
    artifacts.insert("run_meta.json", format!("{meta:#}\n"));
    artifacts.write_to(&config.out)?;

    println!("{}", analysis.report.verdict());
    if analysis.weak_pool_empty() {
        println!("no weak nodes at threshold: nothing to collect");
        Ok(Outcome::NothingToCollect)
    } else {
        Ok(Outcome::Success)
    }
}

fn cmd_oracle(args: &OracleArgs) -> anyhow::Result<Outcome> {
    let scenario = OracleScenario::from_json_file(&args.scenario)
        .with_context(|| format!("reading scenario {}", args.scenario.display()))?;
    let generated = generate_scenario(&scenario)?;
    let out = &args.out_dir;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (name, contents) in [
        ("real.ndjson", generated.real.to_ndjson()),
        ("synthetic.ndjson", generated.synthetic.to_ndjson()),
        ("truth.ndjson", generated.truth.to_ndjson()),
    ] {
        let path = out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "wrote {} real and {} synthetic records to {}",
        generated.real.len(),
        generated.synthetic.len(),
        out.display()
    );
    Ok(Outcome::Success)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // Exit code 2 is reserved for "nothing to collect".
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Oracle(args) => cmd_oracle(args),
    });
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::NothingToCollect) => ExitCode::from(2),
        Err(err) => {
            log::debug!("{err:?}");
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
