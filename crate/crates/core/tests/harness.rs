use std::process::Command;

use padam::harness::{
    aggregate, parse_config, run_experiment, run_single, series_to_csv, ConfigOverrides,
    ErrorValue, OptimizerKind, RunConfig, CSV_HEADER,
};
use padam::optim::{evaluate_and_select, padam3_channels, padam_step, ChannelKind, PadamState};
use padam::problems::{QuadraticProblem, StochasticObjective};
use padam::{derive_stream, Error};

fn small(problem: &str, optimizer: &str) -> RunConfig {
    ConfigOverrides {
        problem: Some(problem.into()),
        optimizer: Some(optimizer.into()),
        steps: Some(1000),
        seeds: Some(2),
        mc_samples: Some(2000),
        ..ConfigOverrides::default()
    }
    .resolve()
    .unwrap()
}

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padam-bench"))
}

#[test]
fn identical_inputs_give_identical_csv() {
    for optimizer in [
        "sgd", "momentum", "adam", "adamw", "adam_ema", "padam3", "padam10",
    ] {
        let cfg = small("quadratic", optimizer);
        let a = series_to_csv(&run_single(&cfg, 7).unwrap());
        let b = series_to_csv(&run_single(&cfg, 7).unwrap());
        assert_eq!(a, b, "{optimizer}");
        assert!(a.starts_with(CSV_HEADER));
        assert_ne!(a, series_to_csv(&run_single(&cfg, 8).unwrap()));
    }
}

#[test]
fn logging_cadence() {
    let mut cfg = small("quadratic", "adam");
    cfg.steps = 1050;
    cfg.eval_every = 100;
    let steps: Vec<u64> = run_single(&cfg, 0)
        .unwrap()
        .rows_for("adam")
        .map(|r| r.step)
        .collect();
    let mut expected: Vec<u64> = (0..=10).map(|k| k * 100).collect();
    expected.push(1050);
    assert_eq!(steps, expected);

    let cfg = small("quadratic", "adam");
    let result = run_experiment(&cfg).unwrap();
    assert_eq!(
        result.aggregate.per_step_mean_error.len() as u64,
        cfg.steps / cfg.eval_every + 1
    );
}

#[test]
fn adam_ema_reports_channel_minus_one() {
    let series = run_single(&small("polyreg", "adam_ema"), 1).unwrap();
    assert!(series.rows_for("adam_ema").all(|r| r.channel == -1));
    assert!(series.rows_for("adam").count() == 0);
}

#[test]
fn padam_reports_the_channel_from_the_last_selection() {
    let mut cfg = small("quadratic", "padam3");
    cfg.n_t = 200;
    cfg.eval_every = 50;
    let series = run_single(&cfg, 4).unwrap();

    // replay the selection schedule by hand
    let problem = QuadraticProblem::new(cfg.problem.dim);
    let theta0 = problem.init_params(&mut derive_stream(4, 0));
    let mut state = PadamState::new(theta0, padam3_channels(cfg.steps).unwrap()).unwrap();
    let mut train = derive_stream(4, 1);
    let mut selection = derive_stream(4, 2);
    let mut chosen = vec![(0u64, 1usize)];
    for step in 1..=cfg.steps {
        let g = problem
            .grad(state.raw(), &problem.sample_batch(&mut train, cfg.batch))
            .unwrap();
        padam_step(&mut state, &g, &cfg.hyper).unwrap();
        if step % cfg.n_t == 0 {
            evaluate_and_select(&mut state, &problem, &mut selection, cfg.batch).unwrap();
            chosen.push((step, state.best_index()));
        }
    }
    for row in series.rows_for("padam3") {
        let expected = chosen.iter().rev().find(|(s, _)| *s <= row.step).unwrap().1;
        assert_eq!(row.channel, expected as i64, "step {}", row.step);
    }
    assert!(series.rows_for("padam3_raw").all(|r| r.channel == 0));
}

#[test]
fn zero_delta_padam_matches_adam() {
    let adam = small("polyreg", "adam");
    let mut padam = small("polyreg", "padam3");
    padam.channels = Some(vec![ChannelKind::Constant { c: 0.0 }; 3]);
    let a: Vec<_> = run_single(&adam, 2)
        .unwrap()
        .rows_for("adam")
        .map(|r| r.error)
        .collect();
    let p: Vec<_> = run_single(&padam, 2)
        .unwrap()
        .rows_for("padam3")
        .map(|r| r.error)
        .collect();
    assert_eq!(a, p);
}

#[test]
fn diverged_seeds_leave_the_final_mean() {
    let mut cfg = small("quadratic", "sgd");
    cfg.hyper.lr = 10.0;
    let runs: Vec<_> = (0..2).map(|s| run_single(&cfg, s).unwrap()).collect();
    assert!(runs.iter().all(|r| r.diverged()));
    assert_eq!(runs[0].rows.last().unwrap().error, ErrorValue::Diverged);
    let agg = aggregate(&cfg, &runs, "sgd");
    assert_eq!(agg.diverged_seed_count, 2);
    assert_eq!(agg.final_mean_error, None);
    assert!(agg.per_step_mean_error.iter().all(|(_, e)| e.is_finite()));
}

#[test]
fn config_resolution_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"preset": "quadratic-desk", "optimizer": "adam", "steps": 123, "lr": 0.5}"#,
    )
    .unwrap();
    let cli = ConfigOverrides {
        lr: Some(0.25),
        ..ConfigOverrides::default()
    };
    let cfg = parse_config(Some(&path), cli).unwrap();
    assert_eq!(cfg.steps, 123);
    assert_eq!(cfg.hyper.lr, 0.25);
    assert_eq!(cfg.seeds, 20);
    assert_eq!(cfg.optimizer, OptimizerKind::Adam);

    std::fs::write(
        &path,
        r#"{"problem": "quadratic", "optimizer": "adam", "stepz": 1}"#,
    )
    .unwrap();
    assert!(parse_config(Some(&path), ConfigOverrides::default()).is_err());
    let missing = ConfigOverrides {
        problem: Some("quadratic".into()),
        ..ConfigOverrides::default()
    };
    assert!(matches!(missing.resolve(), Err(Error::Usage(_))));
}

#[test]
fn cli_lists_presets_and_passes_selftest() {
    let out = bench().arg("list-presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "quadratic",
        "quadratic-desk",
        "polyreg-desk",
        "gauss-density-desk",
        "heat-dkm-desk",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    let out = bench().arg("selftest").output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn cli_usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec![
            "run".into(),
            "--problem".into(),
            "quadratic".into(),
            "--optimizer".into(),
            "adam".into(),
        ],
        vec![
            "run".into(),
            "--problem".into(),
            "nope".into(),
            "--optimizer".into(),
            "adam".into(),
            "--out".into(),
            dir.path().display().to_string(),
        ],
        vec![
            "run".into(),
            "--problem".into(),
            "quadratic".into(),
            "--optimizer".into(),
            "adam".into(),
            "--steps".into(),
            "0".into(),
            "--out".into(),
            dir.path().display().to_string(),
        ],
        vec!["frobnicate".into()],
    ];
    for args in cases {
        let status = bench().args(&args).output().unwrap().status;
        assert_eq!(status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn cli_writes_csv_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let status = bench()
        .args([
            "run",
            "--problem",
            "polyreg",
            "--optimizer",
            "padam10",
            "--steps",
            "500",
            "--seeds",
            "2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("padam10_seed0.csv")).unwrap();
    assert!(csv.starts_with("optimizer,seed,step,error,channel\n"));
    assert!(!csv.contains('\r'));
    let row = csv.lines().nth(1).unwrap();
    assert_eq!(row.split(',').count(), 5);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("padam10_aggregate.json")).unwrap())
            .unwrap();
    assert_eq!(json["diverged_seed_count"], 0);
    assert!(json["final_mean_error"].as_f64().unwrap() > 0.0);
    assert!(json["config_echo"].get("out").is_none());
    assert!(out.join("padam10_raw_aggregate.json").exists());
}
