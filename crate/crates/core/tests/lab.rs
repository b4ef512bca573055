use cllab::lab::{
    emit, read_table_csv, report_json, run, ExperimentConfig, ExperimentKind, RunContext,
};
use cllab::Exec;
use std::fs;

fn small_ks() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(ExperimentKind::Ks);
    cfg.resolutions = vec![1, 2];
    cfg
}

fn small_mesh() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(ExperimentKind::Mesh);
    cfg.resolutions = vec![2, 4];
    cfg
}

#[test]
fn emitted_tables_read_back_identically() {
    let report = run(&small_ks(), &RunContext::new(Exec::default(), None)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit(&report, dir.path(), true, true).unwrap();
    assert_eq!(written.len(), 2 + report.tables.len());
    for t in &report.tables {
        let f = fs::File::open(dir.path().join(format!("ks.{}.csv", t.name))).unwrap();
        assert_eq!(&read_table_csv(&t.name, f).unwrap(), t);
    }
    let json = fs::read_to_string(dir.path().join("ks.json")).unwrap();
    assert_eq!(json, report_json(&report).unwrap());
    assert!(!json.contains("timings"));
    assert!(dir.path().join("ks.timings.json").exists());
}

#[test]
fn emit_respects_output_switches() {
    let report = run(&small_ks(), &RunContext::new(Exec::default(), None)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit(&report, dir.path(), false, true).unwrap();
    assert!(written
        .iter()
        .all(|p| p.extension().is_some_and(|e| e == "csv")));
    assert!(emit(&report, dir.path(), false, false).unwrap().is_empty());
}

#[test]
fn sequential_and_parallel_runs_agree_bytewise() {
    for cfg in [small_ks(), small_mesh()] {
        let a = run(&cfg, &RunContext::new(Exec::default(), None)).unwrap();
        let b = run(&cfg, &RunContext::new(Exec::Sequential, None)).unwrap();
        assert_eq!(report_json(&a).unwrap(), report_json(&b).unwrap());
    }
}

#[test]
fn cached_meshes_give_the_same_report() {
    let cache = tempfile::tempdir().unwrap();
    let ctx = RunContext::new(Exec::default(), Some(cache.path().to_path_buf()));
    let cold = run(&small_mesh(), &ctx).unwrap();
    assert!(fs::read_dir(cache.path()).unwrap().count() > 0);
    let warm = run(&small_mesh(), &ctx).unwrap();
    let uncached = run(&small_mesh(), &RunContext::new(Exec::default(), None)).unwrap();
    assert_eq!(report_json(&cold).unwrap(), report_json(&warm).unwrap());
    assert_eq!(report_json(&cold).unwrap(), report_json(&uncached).unwrap());
}

#[test]
fn invalid_configs_are_rejected_before_running() {
    let mut cfg = small_ks();
    cfg.domains = vec!["torus:r=2".into()];
    assert!(run(&cfg, &RunContext::new(Exec::default(), None)).is_err());
    assert!(ExperimentConfig::from_toml_str("experiment = \"ks\"\nresolutions = []\n").is_err());
    assert!(ExperimentConfig::from_toml_str("experiment = \"nope\"\n").is_err());
}
