use std::path::Path;
use std::process::Command;

use privoffload::io::{
    config_to_toml, emit_plot_data, load_config, metrics_csv, parse_metrics_csv, write_metrics_csv, RunManifest,
    CSV_HEADER, MANIFEST_FILE, PLOT_INDEX,
};
use privoffload::sim::experiment::CellLabel;
use privoffload::sim::{run, run_experiment, ExperimentCell, ExperimentKind, ExperimentTable, ScenarioConfig};
use privoffload::Error;

fn tiny() -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.scenario.vehicle_count = 6;
    c.scenario.horizon_steps = 12;
    c
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn config_files_load_with_defaults_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(load_config(&write(dir.path(), "empty.toml", "")).unwrap(), ScenarioConfig::default());
    match load_config(&write(dir.path(), "neg.toml", "[scenario]\nroad_length_m = -5\n")) {
        Err(Error::ConfigRange { key, constraint }) => {
            assert_eq!(key, "scenario.road_length_m");
            assert!(constraint.contains("positive"));
        }
        other => panic!("unexpected {other:?}"),
    }
    match load_config(&write(dir.path(), "unk.toml", "[optimizer]\nm = 3\nfancy = true\n")) {
        Err(Error::UnknownKey(k)) => assert_eq!(k, "optimizer.fancy"),
        other => panic!("unexpected {other:?}"),
    }
    match load_config(&write(dir.path(), "syn.toml", "seed = 1\nseed = 2\n")) {
        Err(Error::ConfigParse { line, .. }) => assert_eq!(line, 2),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(load_config(&dir.path().join("missing.toml")), Err(Error::Io { .. })));
}

#[test]
fn config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = "seed = 42\n[privacy]\nmode = \"rr\"\nepsilon = 0.5\n[task]\nlambda = [0.3, 0.6]\n[channel]\nfading = \"rayleigh\"\n";
    let first = load_config(&write(dir.path(), "a.toml", text)).unwrap();
    let again = load_config(&write(dir.path(), "b.toml", &config_to_toml(&first).unwrap())).unwrap();
    assert_eq!(first, again);
    assert_eq!(first.seed, 42);
}

#[test]
fn empty_table_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    write_metrics_csv(&ExperimentTable::default(), &p).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), format!("{CSV_HEADER}\n"));
    assert!(emit_plot_data(&ExperimentTable::default(), dir.path()).is_err());
}

#[test]
fn csv_is_deterministic_and_parses_back() {
    let cfg = tiny();
    let table = |series| ExperimentTable {
        kind: None,
        cells: vec![ExperimentCell { label: CellLabel::of("run", &cfg), config: cfg.clone(), series }],
    };
    let a = metrics_csv(&table(run(&cfg).unwrap()));
    let series = run(&cfg).unwrap();
    assert_eq!(a, metrics_csv(&table(series.clone())));
    let rows = parse_metrics_csv(&a).unwrap();
    assert_eq!(rows.len(), series.records.len());
    for (row, rec) in rows.iter().zip(&series.records) {
        assert_eq!(row.step, rec.step);
        assert_eq!(row.completed_tasks, rec.completed_tasks);
        for (got, want) in [(row.avg_reduction_rate, rec.avg_reduction_rate), (row.task_multiplier, rec.task_multiplier)] {
            match (got, want) {
                (None, None) => {}
                (Some(g), Some(w)) => assert!((g - w).abs() <= 5e-9 * w.abs(), "{g} vs {w}"),
                other => panic!("presence mismatch {other:?}"),
            }
        }
    }
}

#[test]
fn budget_sweep_csv_has_every_series_sorted() {
    let t = run_experiment(ExperimentKind::BudgetSweep, &tiny(), &[0, 1]).unwrap();
    let rows = parse_metrics_csv(&metrics_csv(&t)).unwrap();
    let mut series: Vec<(String, String, u64, u64)> = Vec::new();
    for r in &rows {
        let key = (r.privacy.clone(), format!("{}", r.epsilon), r.seed, 0);
        if !series.iter().any(|s| (s.0.as_str(), s.1.as_str(), s.2) == (key.0.as_str(), key.1.as_str(), key.2)) {
            series.push(key);
        }
    }
    assert_eq!(series.len(), 16);
    let expected_rows: usize = t.cells.iter().map(|c| c.series.records.len()).sum();
    assert_eq!(rows.len(), expected_rows);
    let key = |r: &privoffload::io::CsvRow| (r.experiment.clone(), r.algorithm.clone(), r.privacy.clone(), r.epsilon, r.seed, r.step);
    for w in rows.windows(2) {
        let (a, b) = (key(&w[0]), key(&w[1]));
        assert!(a.partial_cmp(&b).unwrap().is_lt(), "{a:?} then {b:?}");
    }
}

#[test]
fn plot_files_per_experiment() {
    for (kind, n) in [
        (ExperimentKind::PrivacyModes, 6),
        (ExperimentKind::Algorithms, 8),
        (ExperimentKind::BudgetSweep, 16),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let t = run_experiment(kind, &tiny(), &[0]).unwrap();
        let names = emit_plot_data(&t, dir.path()).unwrap();
        assert_eq!(names.len(), n + 1);
        assert_eq!(names.last().unwrap(), PLOT_INDEX);
        let index = std::fs::read_to_string(dir.path().join(PLOT_INDEX)).unwrap();
        assert_eq!(index.lines().count(), n);
        for name in &names[..n] {
            assert!(name.starts_with("fig") && name.ends_with(".dat"));
            let body = std::fs::read_to_string(dir.path().join(name)).unwrap();
            for line in body.lines().skip(1) {
                let cols: Vec<&str> = line.split(' ').collect();
                assert_eq!(cols.len(), 2);
                cols[0].parse::<u64>().unwrap();
                cols[1].parse::<f64>().unwrap();
            }
        }
    }
}

#[test]
fn manifest_replay_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let m = RunManifest::for_experiment(ExperimentKind::PrivacyModes, tiny(), vec![0, 1]).unwrap();
    m.execute(a.path()).unwrap();
    let loaded = RunManifest::load(&a.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(loaded, m);
    loaded.execute(b.path()).unwrap();
    for name in m.outputs.iter().chain([&MANIFEST_FILE.to_string()]) {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

fn cli(args: &[&str], cwd: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_privoffload")).args(args).current_dir(cwd).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn cli_exit_codes_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "ok.toml", "seed = 5\n[scenario]\nvehicle_count = 6\nhorizon_steps = 12\n");
    write(d, "bad.toml", "[scenario]\nroad_length_m = -5\n");
    write(d, "unknown.toml", "[scenario]\nroad_length = 5\n");

    assert_eq!(cli(&["run", "--config", "ok.toml", "--out", "r1", "--privacy", "rr", "--epsilon", "2"], d).0, 0);
    assert!(d.join("r1/metrics.csv").exists() && d.join("r1").join(MANIFEST_FILE).exists());
    assert_eq!(cli(&["replay", "--manifest", "r1/manifest.json", "--out", "r2"], d).0, 0);
    for f in std::fs::read_dir(d.join("r1")).unwrap() {
        let name = f.unwrap().file_name();
        assert_eq!(std::fs::read(d.join("r1").join(&name)).unwrap(), std::fs::read(d.join("r2").join(&name)).unwrap());
    }

    let (code, err) = cli(&["run", "--config", "bad.toml"], d);
    assert_eq!(code, 2);
    assert!(err.contains("scenario.road_length_m"));
    let (code, err) = cli(&["run", "--config", "unknown.toml"], d);
    assert_eq!(code, 2);
    assert!(err.contains("scenario.road_length"));
    assert_eq!(cli(&["experiment", "--kind", "4", "--config", "ok.toml"], d).0, 2);
    assert_eq!(cli(&["run", "--algorithm", "greedy"], d).0, 2);
    assert_eq!(cli(&["oracle", "--instances", "25"], d).0, 0);
    assert_eq!(cli(&["experiment", "--kind", "2", "--seeds", "1", "--config", "ok.toml", "--out", "e2"], d).0, 0);
    assert_eq!(std::fs::read_dir(d.join("e2")).unwrap().count(), 1 + 1 + 8 + 1);
}
