use otfs_jtsce::harness::{
    emit_csv, load_config, run_experiment, save_config, ExperimentConfig, ExperimentKind,
    MetricRecords, Profile, RunOptions, BER_HEADER, MSE_HEADER, SNAPSHOT_HEADER, SYNC_HEADER,
};

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let patch = "trials = 6\n[ber]\nmin_errors = 1\nmin_frames = 4\nmax_frames = 8\nbatch = 4\n";
    ExperimentConfig::preset(kind, Profile::Ci)
        .overlay(patch)
        .unwrap()
}

fn csv(cfg: &ExperimentConfig, workers: usize) -> String {
    run_experiment(
        cfg,
        &RunOptions {
            workers: Some(workers),
        },
    )
    .unwrap()
    .to_csv_string()
    .unwrap()
}

#[test]
fn output_does_not_depend_on_worker_count() {
    for kind in ExperimentKind::ALL {
        let cfg = small(kind);
        assert_eq!(csv(&cfg, 1), csv(&cfg, 3), "{kind}");
    }
}

#[test]
fn seeds_change_the_draws() {
    let a = small(ExperimentKind::Mse);
    let mut b = a.clone();
    b.seed = 99;
    assert_ne!(csv(&a, 1), csv(&b, 1));
}

#[test]
fn row_counts_and_headers_follow_the_grid() {
    for kind in ExperimentKind::ALL {
        let cfg = small(kind);
        let out = run_experiment(&cfg, &RunOptions { workers: Some(2) }).unwrap();
        let (d, m, t) = (
            cfg.snr_data_db.len(),
            cfg.snr_mls_db.len(),
            cfg.thresholds.len(),
        );
        let (rows, header) = match &out {
            MetricRecords::Snapshot(_) => (out.len(), SNAPSHOT_HEADER),
            MetricRecords::Sync(_) => (d * m * t, SYNC_HEADER),
            MetricRecords::Mse(_) => (d * m, MSE_HEADER),
            MetricRecords::Ber(_) => (d * (1 + 2 * m), BER_HEADER),
        };
        assert!(rows > 0);
        assert_eq!(out.len(), rows, "{kind}");
        let text = out.to_csv_string().unwrap();
        assert_eq!(text.lines().next().unwrap(), header);
        assert_eq!(text.lines().count(), rows + 1);
    }
}

#[test]
fn ber_frames_respect_the_stopping_rule() {
    let cfg = small(ExperimentKind::Ber);
    let MetricRecords::Ber(rows) = run_experiment(&cfg, &RunOptions::default()).unwrap() else {
        panic!("wrong record kind");
    };
    for r in rows {
        assert!(r.frames >= 4 && r.frames <= 8);
        assert_eq!(r.frames % 4, 0);
        assert!(r.ber >= 0.0 && r.ber <= 1.0);
    }
}

#[test]
fn config_and_csv_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentKind::ThresholdSweep);
    let path = dir.path().join("sweep.toml");
    save_config(&cfg, &path).unwrap();
    assert_eq!(load_config(&path).unwrap(), cfg);

    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let csv_path = dir.path().join("sweep.csv");
    emit_csv(&out, &csv_path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&csv_path).unwrap(),
        out.to_csv_string().unwrap()
    );
}
