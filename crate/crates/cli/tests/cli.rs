use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mappergap::feature_store::{Dataset, FeatureRecord, Origin};
use mappergap::synth_oracle::OracleScenario;

fn mappergap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mappergap"))
        .args(args)
        .env("MAPPERGAP_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &Path, scenario: &OracleScenario) -> String {
    let path = dir.join("scenario.json");
    fs::write(&path, serde_json::to_string_pretty(scenario).unwrap()).unwrap();
    path.display().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn oracle_outputs_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &OracleScenario::canonical(5));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let run = mappergap(&["oracle", &scenario, out.to_str().unwrap()]);
        assert!(run.status.success(), "{}", stderr(&run));
    }
    for name in ["real.ndjson", "synthetic.ndjson", "truth.ndjson"] {
        let first = fs::read(a.join(name)).unwrap();
        assert!(!first.is_empty());
        assert_eq!(first, fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn oracle_rejects_invalid_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad_weights = OracleScenario::canonical(1);
    bad_weights.components[0].weight = 0.5;
    let path = write_scenario(dir.path(), &bad_weights);
    let run = mappergap(&["oracle", &path, dir.path().join("o").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("invalid scenario"), "{}", stderr(&run));

    let mut withhold_all = OracleScenario::canonical(1);
    withhold_all.withheld = vec![0, 1, 2, 3];
    let path = write_scenario(dir.path(), &withhold_all);
    let run = mappergap(&["oracle", &path, dir.path().join("o").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("proper subset"), "{}", stderr(&run));
}

#[test]
fn analyze_canonical_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let scenario = write_scenario(dir.path(), &OracleScenario::canonical(20_240_917));
    assert!(mappergap(&["oracle", &scenario, data.to_str().unwrap()]).status.success());

    let out = dir.path().join("out");
    let run = mappergap(&[
        "analyze",
        "--real",
        data.join("real.ndjson").to_str().unwrap(),
        "--synthetic",
        data.join("synthetic.ndjson").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    assert!(stdout(&run).contains("top tags: charlie"), "{}", stdout(&run));
    for name in ["graph.json", "graph.dot", "gapreport.json", "summary.txt", "lens.json", "run_meta.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains(" 1. charlie"), "{summary}");

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("gapreport.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "gapreport/1");
    assert_eq!(report["guidance"][0]["value"], "charlie");
    assert_eq!(report["config"]["lens"]["kind"], "pca");
    assert_eq!(report["config"]["cover"]["n_intervals"], 10);
    assert!(report["cover"]["dims"][0]["intervals"].as_array().unwrap().len() == 10);
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.ndjson");
    let out = dir.path().join("out");
    let run = mappergap(&[
        "analyze",
        "--input",
        missing.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("nope.ndjson"), "{}", stderr(&run));
    assert!(!out.exists(), "no partial artifacts on failure");
}

#[test]
fn malformed_input_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ndjson");
    fs::write(
        &path,
        "{\"id\":\"a\",\"origin\":\"real\",\"vec\":[1,2]}\n{\"id\":\"b\",\"origin\":\"real\",\"vec\":[1]}\n",
    )
    .unwrap();
    let run = mappergap(&["analyze", "--input", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("bad.ndjson:2"), "{}", stderr(&run));
}

fn twin_dataset() -> Dataset {
    let mut records = Vec::new();
    for i in 0..40 {
        let v = vec![(i % 7) as f64, (i / 7) as f64 * 0.5, ((i * 3) % 5) as f64];
        records.push(FeatureRecord::new(format!("r{i:03}"), Origin::Real, v.clone()).with_tag("model", "m"));
        records.push(FeatureRecord::new(format!("s{i:03}"), Origin::Synthetic, v));
    }
    Dataset::new(records).unwrap()
}

#[test]
fn balanced_data_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("twins.ndjson");
    fs::write(&input, twin_dataset().to_ndjson()).unwrap();
    let out = dir.path().join("out");
    let run = mappergap(&["analyze", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2), "{}", stderr(&run));
    assert!(stdout(&run).contains("no weak nodes at threshold"));
    assert!(out.join("gapreport.json").exists());
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("twins.ndjson"), twin_dataset().to_ndjson()).unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"input": "twins.ndjson", "out": "from-config", "cover": {"n_intervals": 4, "overlap": 0.2}}"#,
    )
    .unwrap();
    let config = dir.path().join("run.json");

    let run = mappergap(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2), "{}", stderr(&run));
    let report = fs::read_to_string(dir.path().join("from-config/gapreport.json")).unwrap();
    assert!(report.contains("\"n_intervals\": 4"));
    assert!(dir.path().join("from-config/graph.dot").exists());

    let out = dir.path().join("flags");
    let run = mappergap(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--intervals",
        "3",
        "--no-dot",
    ]);
    assert_eq!(run.status.code(), Some(2), "{}", stderr(&run));
    let report = fs::read_to_string(out.join("gapreport.json")).unwrap();
    assert!(report.contains("\"n_intervals\": 3"));
    assert!(report.contains("\"overlap\": 0.2"));
    assert!(!out.join("graph.dot").exists());
}

#[test]
fn bad_flag_values_fail() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("twins.ndjson");
    fs::write(&input, twin_dataset().to_ndjson()).unwrap();
    for extra in [["--overlap", "1.5"], ["--weak-ratio", "0"], ["--lens", "tsne"], ["--eps", "-1"]] {
        let mut args = vec!["analyze", "--input", input.to_str().unwrap(), "--out"];
        let out = dir.path().join("o");
        let out = out.to_str().unwrap().to_string();
        args.push(&out);
        args.extend(extra);
        let run = mappergap(&args);
        assert_eq!(run.status.code(), Some(1), "{extra:?}");
    }
}
