mod common;

use std::path::Path;
use std::process::Command;

use bdi::bidirectional::LossMode;
use bdi::harness::{
    ablate, run_all, run_once, summarize, sweep, trace_csv, ConfigOverrides, Document, RunConfig,
    RunReport, SeedList, SweepParam, Variant, RUN_REPORT_SCHEMA,
};
use bdi::tasks::{generate_offline, read_csv, Task, TaskKind, TaskSpec};
use bdi::Error;
use serde_json::Value;

fn small(task: TaskKind) -> RunConfig {
    RunConfig {
        task,
        dim: if task == TaskKind::Discrete8 {
            None
        } else {
            Some(5)
        },
        n: 120,
        steps: 15,
        ..RunConfig::default()
    }
}

fn schema() -> Value {
    serde_json::from_str(RUN_REPORT_SCHEMA).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bdi"))
}

#[test]
fn zero_steps_report_the_initial_design() {
    let cfg = RunConfig {
        task: TaskKind::QuadBowl,
        dim: Some(10),
        mode: LossMode::Forward,
        steps: 0,
        ..RunConfig::default()
    };
    let report = run_once(&cfg, 0).unwrap();
    let task = Task::new(TaskSpec::new(TaskKind::QuadBowl, Some(10), 0)).unwrap();
    let data = generate_offline(&task, cfg.n, cfg.keep_fraction).unwrap();
    let best = data.raw.argmax().0;
    let init: Vec<f64> = data.task_designs.row(best).iter().copied().collect();
    for (a, b) in report.result.design.iter().zip(&init) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
    assert!((report.result.score_raw - task.oracle(&report.result.design).unwrap()).abs() < 1e-12);
    assert!((report.result.score_normalized - report.dataset.best_normalized).abs() < 1e-9);
    assert!(report.trace.is_empty());
}

#[test]
fn trace_length_and_normalized_roundtrip() {
    for task in [TaskKind::QuadBowl, TaskKind::Discrete8] {
        let cfg = small(task);
        let r = run_once(&cfg, 2).unwrap();
        assert_eq!(r.trace.len(), cfg.steps);
        assert!(r.trace.iter().enumerate().all(|(i, t)| t.step == i));
        let again = (r.result.score_raw - r.task.y_min) / (r.task.y_max - r.task.y_min);
        assert_eq!(again.to_bits(), r.result.score_normalized.to_bits());
        assert_eq!(r.config.seed, SeedList::single(2));
    }
}

#[test]
fn reports_validate_against_the_published_schema() {
    let s = schema();
    let multi = RunConfig {
        m: 3,
        top_k: 3,
        ..small(TaskKind::NegStyblinskiTang)
    };
    let rbf = RunConfig {
        kernel: bdi::harness::KernelKind::Rbf,
        ..small(TaskKind::NegAckley)
    };
    for cfg in [
        small(TaskKind::QuadBowl),
        small(TaskKind::Discrete8),
        multi,
        rbf,
    ] {
        let r = run_once(&cfg, 1).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        common::schema::validate(&s, &v).unwrap_or_else(|e| panic!("{}: {e}", cfg.task));
        assert_eq!(r.top_k.len(), cfg.top_k);
    }

    let good = serde_json::to_value(run_once(&small(TaskKind::QuadBowl), 0).unwrap()).unwrap();
    let mut extra = good.clone();
    extra["surprise"] = Value::from(1);
    assert!(common::schema::validate(&s, &extra).is_err());
    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("trace");
    assert!(common::schema::validate(&s, &missing).is_err());
    let mut wrong = good;
    wrong["result"]["score_raw"] = Value::from("high");
    assert!(common::schema::validate(&s, &wrong).is_err());
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let cfg = small(TaskKind::NegAckley);
    let a = run_once(&cfg, 4).unwrap().canonical_json().unwrap();
    let b = run_once(&cfg, 4).unwrap().canonical_json().unwrap();
    assert_eq!(a, b);

    let many = RunConfig {
        seed: SeedList::range(0, 3),
        ..cfg.clone()
    };
    let parallel = run_all(&many).unwrap();
    for r in &parallel {
        let solo = run_once(&cfg, r.seed).unwrap();
        assert_eq!(r.canonical_json().unwrap(), solo.canonical_json().unwrap());
    }
}

#[test]
fn full_with_zero_lambda_matches_forward_only() {
    let base = small(TaskKind::QuadBowl);
    let full = run_once(
        &RunConfig {
            lambda: 0.0,
            ..base.clone()
        },
        3,
    )
    .unwrap();
    let fwd = run_once(
        &RunConfig {
            mode: LossMode::Forward,
            ..base
        },
        3,
    )
    .unwrap();
    assert_eq!(full.result, fwd.result);
    assert_eq!(full.trace, fwd.trace);
    assert_eq!(full.similarity, fwd.similarity);
}

#[test]
fn rbf_variant_uses_rbf_everywhere() {
    let base = RunConfig {
        seed: SeedList::range(0, 1),
        steps: 5,
        ..small(TaskKind::QuadBowl)
    };
    let table = ablate(&base).unwrap();
    assert_eq!(table.variants.len(), 4);
    let rbf = table.variant(Variant::Ntk2Rbf).unwrap();
    for r in &rbf.reports {
        assert!(r.kernel.is_rbf());
        assert_eq!(r.config.kernel, bdi::harness::KernelKind::Rbf);
        // RBF similarities are bounded by one; NTK values on these designs are not
        assert!(r.similarity.initial <= 1.0 && r.similarity.final_ <= 1.0);
    }
    let full = table.variant(Variant::Full).unwrap();
    assert!(full.reports.iter().all(|r| !r.kernel.is_rbf()));
    assert!(full.reports.iter().any(|r| r.similarity.final_ > 1.0));
    for v in &table.variants {
        let seeds: Vec<u64> = v.reports.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![0, 1]);
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[test]
fn report_aggregates_mean_and_standard_error() {
    let cfg = RunConfig {
        seed: SeedList::range(0, 7),
        ..small(TaskKind::QuadBowl)
    };
    let reports = run_all(&cfg).unwrap();
    let docs: Vec<Document> = reports
        .iter()
        .map(|r| Document::parse(&serde_json::to_string(r).unwrap()).unwrap())
        .collect();
    let summary = summarize(&docs).unwrap();
    assert_eq!(summary.settings.len(), 1);
    let s = &summary.settings[0];
    let scores: Vec<f64> = reports.iter().map(|r| r.result.score_normalized).collect();
    assert_eq!(s.runs, 8);
    assert!((s.mean - scores.iter().sum::<f64>() / 8.0).abs() < 1e-12);
    assert!((s.stderr - sample_std(&scores) / 8f64.sqrt()).abs() < 1e-12);

    let one = summarize(&docs[..1]).unwrap();
    assert_eq!(one.settings[0].mean, scores[0]);
    assert_eq!(one.settings[0].stderr, 0.0);
    let twice = summarize(&[docs[0].clone(), docs[0].clone()]).unwrap();
    assert_eq!(twice.settings[0].stderr, 0.0);

    let csv = trace_csv(&docs).unwrap();
    assert!(csv.starts_with("setting,seed,step,l2h,h2l,total\n"));
    assert_eq!(csv.lines().count(), 1 + 8 * cfg.steps);
    assert!(summary.render().contains("quadbowl"));
}

#[test]
fn report_rejects_schema_mismatch() {
    let r = run_once(&small(TaskKind::QuadBowl), 0).unwrap();
    let mut v = serde_json::to_value(&r).unwrap();
    v["schema"] = Value::from(2);
    assert!(matches!(
        Document::parse(&v.to_string()),
        Err(Error::SchemaMismatch(_))
    ));
    v.as_object_mut().unwrap().remove("schema");
    assert!(matches!(
        Document::parse(&v.to_string()),
        Err(Error::SchemaMismatch(_))
    ));
    let mut broken = serde_json::to_value(&r).unwrap();
    broken.as_object_mut().unwrap().remove("result");
    assert!(matches!(
        Document::parse(&broken.to_string()),
        Err(Error::SchemaMismatch(_))
    ));
}

#[test]
fn sweep_edge_cases() {
    let base = small(TaskKind::QuadBowl);
    let t = sweep(&base, SweepParam::Yh, &[10.0]).unwrap();
    assert_eq!(t.points.len(), 1);
    assert_eq!(t.points[0].ratio, 1.0);
    assert!(matches!(
        sweep(&base, SweepParam::Yh, &[]),
        Err(Error::Empty(_))
    ));
    assert!(bdi::harness::parse_grid("").is_err());
    assert_eq!(
        bdi::harness::parse_grid("5, 10,15").unwrap(),
        vec![5.0, 10.0, 15.0]
    );

    let steps = sweep(&base, SweepParam::Steps, &[0.0, 5.0]).unwrap();
    assert_eq!(steps.reference_value, base.steps as f64);
    assert!(sweep(&base, SweepParam::Steps, &[2.5]).is_err());
}

#[test]
fn invalid_configs_are_rejected_before_running() {
    let bad = [
        RunConfig {
            n: 5,
            ..RunConfig::default()
        },
        RunConfig {
            beta: 0.0,
            ..RunConfig::default()
        },
        RunConfig {
            keep_fraction: 0.0,
            ..RunConfig::default()
        },
        RunConfig {
            m: 0,
            ..RunConfig::default()
        },
        RunConfig {
            top_k: 2,
            ..RunConfig::default()
        },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?}");
        assert!(run_once(&cfg, 0).is_err());
    }
    let mut o = ConfigOverrides::default();
    assert!(o.set("task", "rosenbrock").is_err());
    assert!(o.set("steps", "-3").is_err());
    assert!(o.set("colour", "red").is_err());
}

/// `(key, file value, flag value)` for every configurable field.
const FIELDS: &[(&str, &str, &str)] = &[
    ("task", "negackley", "discrete8"),
    ("dim", "7", "9"),
    ("n", "300", "400"),
    ("keep_fraction", "0.3", "0.4"),
    ("kernel", "rbf", "ntk"),
    ("depth", "3", "4"),
    ("weight_variance", "1.5", "2.5"),
    ("bias_variance", "0.2", "0.3"),
    ("bandwidth", "0.5", "0.7"),
    ("mode", "backward", "forward"),
    ("yh", "20", "30"),
    ("alpha", "0.1", "0.2"),
    ("beta", "0.0001", "0.00001"),
    ("lambda", "0.5", "2"),
    ("steps", "50", "60"),
    ("lr", "0.01", "0.02"),
    ("m", "4", "5"),
    ("m_mode", "one", "all"),
    ("seed", "5", "0..2"),
    ("grad", "fd", "analytic"),
    ("top_k", "2", "3"),
    ("out", "from-file.json", "from-flag.json"),
];

fn field(cfg: &RunConfig, key: &str) -> Value {
    if key == "out" {
        return Value::from(cfg.out.as_ref().map(|p| p.display().to_string()));
    }
    serde_json::to_value(cfg).unwrap()[key].clone()
}

fn expected(key: &str, text: &str) -> Value {
    let mut o = ConfigOverrides::default();
    o.set(key, text).unwrap();
    let mut cfg = RunConfig::default();
    o.apply(&mut cfg);
    field(&cfg, key)
}

#[test]
fn flags_override_file_override_defaults_for_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let defaults = RunConfig::default();
    let mut all_file = String::from("# every field\n");
    let mut all_flags = ConfigOverrides::default();
    for (key, file_value, flag_value) in FIELDS {
        let path = dir.path().join(format!("{key}.cfg"));
        // top-k may not exceed the number of optimized designs
        let context = if *key == "top_k" { "m = 5\n" } else { "" };
        std::fs::write(&path, format!("{context}{key} = {file_value}\n")).unwrap();
        all_file.push_str(&format!("{} = {file_value}\n", key.replace('_', "-")));
        all_flags.set(key, flag_value).unwrap();

        let none = RunConfig::resolve(&ConfigOverrides::default()).unwrap();
        assert_eq!(field(&none, key), field(&defaults, key), "{key}: default");

        let file_only = RunConfig::resolve(&ConfigOverrides {
            config: Some(path.clone()),
            ..ConfigOverrides::default()
        })
        .unwrap();
        assert_eq!(
            field(&file_only, key),
            expected(key, file_value),
            "{key}: file"
        );
        assert_ne!(
            field(&file_only, key),
            field(&defaults, key),
            "{key}: file equals default"
        );

        let mut both = ConfigOverrides {
            config: Some(path),
            ..ConfigOverrides::default()
        };
        both.set(key, flag_value).unwrap();
        let resolved = RunConfig::resolve(&both).unwrap();
        assert_eq!(
            field(&resolved, key),
            expected(key, flag_value),
            "{key}: flag"
        );
        assert_ne!(
            field(&resolved, key),
            field(&file_only, key),
            "{key}: flag equals file"
        );
    }

    let path = dir.path().join("all.cfg");
    std::fs::write(&path, all_file).unwrap();
    let file_cfg = RunConfig::resolve(&ConfigOverrides {
        config: Some(path.clone()),
        ..ConfigOverrides::default()
    })
    .unwrap();
    all_flags.config = Some(path);
    let flag_cfg = RunConfig::resolve(&all_flags).unwrap();
    for (key, file_value, flag_value) in FIELDS {
        assert_eq!(field(&file_cfg, key), expected(key, file_value), "{key}");
        assert_eq!(field(&flag_cfg, key), expected(key, flag_value), "{key}");
    }
}

fn run_cli(args: &[&str]) -> (bool, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn cli_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let (ok, _, err) = run_cli(&["run", "--task", "rosenbrock"]);
    assert!(!ok && err.contains("rosenbrock"), "{err}");
    let (ok, _, _) = run_cli(&["run", "--steps", "-1"]);
    assert!(!ok);
    let (ok, _, err) = run_cli(&["run", "--n", "5"]);
    assert!(!ok && err.starts_with("error:"), "{err}");

    let run = d.join("run.json");
    let (ok, _, err) = run_cli(&[
        "run",
        "--task",
        "quadbowl",
        "--dim",
        "10",
        "--mode",
        "forward",
        "--steps",
        "0",
        "--n",
        "100",
        "--out",
        p(&run),
    ]);
    assert!(ok, "{err}");
    let text = std::fs::read_to_string(&run).unwrap();
    common::schema::validate(&schema(), &serde_json::from_str(&text).unwrap()).unwrap();
    let report: RunReport = serde_json::from_str(&text).unwrap();
    assert!(report.trace.is_empty());

    let cfg_file = d.join("exp.cfg");
    std::fs::write(&cfg_file, "task = negackley\ndim = 4\nn = 60\nsteps = 7\n").unwrap();
    let (ok, stdout, err) = run_cli(&[
        "run",
        "--config",
        p(&cfg_file),
        "--steps",
        "3",
        "--seed",
        "0..1",
    ]);
    assert!(ok, "{err}");
    let lines: Vec<RunReport> = stdout
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert!(lines
        .iter()
        .all(|r| r.trace.len() == 3 && r.task.name == "negackley"));

    let seeds = d.join("seeds");
    let (ok, _, err) = run_cli(&[
        "run",
        "--config",
        p(&cfg_file),
        "--seed",
        "1,4",
        "--out",
        p(&seeds),
    ]);
    assert!(ok, "{err}");
    assert!(seeds.join("seed-1.json").exists() && seeds.join("seed-4.json").exists());

    let csv = d.join("data.csv");
    let (ok, _, err) = run_cli(&[
        "gen-data",
        "--task",
        "quadbowl",
        "--dim",
        "3",
        "--n",
        "50",
        "--out",
        p(&csv),
    ]);
    assert!(ok, "{err}");
    let records = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(records.designs.shape(), (25, 3));

    let sw = d.join("sweep.json");
    let (ok, _, err) = run_cli(&[
        "sweep",
        "--param",
        "yh",
        "--grid",
        "10",
        "--config",
        p(&cfg_file),
        "--out",
        p(&sw),
    ]);
    assert!(ok, "{err}");
    let (ok, _, _) = run_cli(&[
        "sweep",
        "--param",
        "yh",
        "--grid",
        "",
        "--config",
        p(&cfg_file),
    ]);
    assert!(!ok);

    let ab = d.join("ablate.json");
    let (ok, _, err) = run_cli(&[
        "ablate",
        "--config",
        p(&cfg_file),
        "--steps",
        "2",
        "--out",
        p(&ab),
    ]);
    assert!(ok, "{err}");

    let summary_dir = d.join("summary");
    let (ok, stdout, err) = run_cli(&[
        "report",
        p(&run),
        p(&sw),
        p(&ab),
        p(&seeds.join("seed-1.json")),
        "--out",
        p(&summary_dir),
    ]);
    assert!(ok, "{err}");
    assert!(stdout.contains("quadbowl") && stdout.contains("negackley"));
    for f in ["summary.json", "traces.csv", "sweeps.csv"] {
        assert!(summary_dir.join(f).exists(), "{f}");
    }
    let sweeps = std::fs::read_to_string(summary_dir.join("sweeps.csv")).unwrap();
    assert!(sweeps.lines().count() >= 2);

    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["schema"] = Value::from(7);
    let bad = d.join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let (ok, _, err) = run_cli(&["report", p(&run), p(&bad)]);
    assert!(!ok && err.contains("schema"), "{err}");
}
