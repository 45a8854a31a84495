use tsreduce::bench::{
    forecast_splits, generate_synthetic, run_experiment, synthetic_config, DataSource, ExperimentConfig, ModelSpec,
    SplitConfig, SyntheticSpec,
};
use tsreduce::metrics::MetricSpace;
use tsreduce::reducer::ReducerSpec;
use tsreduce::series::SplitSpec;
use tsreduce::windowing::Task;

fn small(length: usize, window: usize, horizons: Vec<usize>, reducers: Vec<ReducerSpec>) -> ExperimentConfig {
    let mut c = synthetic_config(horizons, reducers);
    c.data = DataSource::Synthetic(SyntheticSpec {
        length,
        ..SyntheticSpec::benchmark()
    });
    c.window = Some(window);
    c.repeat = 1;
    c
}

#[test]
fn four_reducers_four_rows_four_stages() {
    let reducers = vec![
        ReducerSpec::None,
        ReducerSpec::Pca { k: 48 },
        ReducerSpec::Truncate { k: 48 },
        ReducerSpec::Downsample { stride: 7 },
    ];
    let mut config = small(3000, 336, vec![96], reducers);
    config.repeat = 3;
    let report = run_experiment(&config).unwrap();
    assert_eq!(report.rows.len(), 4);
    for row in &report.rows {
        let t = row.times;
        for s in [t.reduce_fit_s, t.reduce_apply_s, t.train_s, t.infer_s] {
            assert!(s >= 0.0 && s.is_finite());
        }
        assert_eq!(row.horizon, Some(96));
        assert_eq!(row.metrics.space, MetricSpace::Zscore);
    }
    assert_eq!(report.rows.iter().map(|r| r.width).collect::<Vec<_>>(), [336, 48, 48, 48]);
    assert_eq!(report.rows[1].feature_bytes, report.rows[0].feature_bytes / 7);
}

#[test]
fn reducers_never_see_test_data() {
    let series = generate_synthetic(&SyntheticSpec {
        length: 2000,
        ..SyntheticSpec::benchmark()
    })
    .unwrap();
    let split = SplitSpec::default();
    let (train_end, _) = split.boundaries(series.len());

    // corrupting everything after the training segment leaves every fitted
    // parameter, including the normalization, unchanged
    let mut tampered = series.values.clone();
    for v in &mut tampered[train_end..] {
        *v = -*v * 50.0 + 7.0;
    }
    let a = forecast_splits(&series.values, &split, true, 96, 24, 1).unwrap();
    let b = forecast_splits(&tampered, &split, true, 96, 24, 1).unwrap();
    assert_eq!(a.zscore, b.zscore);
    assert_eq!(a.train, b.train);
    assert_ne!(a.test, b.test);
    for spec in [
        ReducerSpec::Pca { k: 8 },
        ReducerSpec::PcaRand {
            k: 8,
            seed: Some(3),
            oversample: 8,
            power_iters: 2,
        },
        ReducerSpec::Fft {
            k: 8,
            mode: Default::default(),
        },
        ReducerSpec::Dwt { k: 8 },
    ] {
        assert_eq!(spec.fit(&a.train.features, 0).unwrap(), spec.fit(&b.train.features, 0).unwrap());
    }
}

#[test]
fn identical_configs_identical_metrics() {
    let config = small(
        2000,
        96,
        vec![24],
        vec![
            ReducerSpec::Pca { k: 8 },
            ReducerSpec::PcaRand {
                k: 8,
                seed: None,
                oversample: 4,
                power_iters: 1,
            },
        ],
    );
    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&config).unwrap();
    let metrics = |r: &tsreduce::bench::BenchReport| r.rows.iter().map(|x| x.metrics.clone()).collect::<Vec<_>>();
    assert_eq!(metrics(&a), metrics(&b));

    // exact PCA ignores the seed
    let mut other = config.clone();
    other.seed = 7;
    let c = run_experiment(&other).unwrap();
    assert_eq!(metrics(&a)[0], metrics(&c)[0]);
}

#[test]
fn raw_space_when_not_normalized() {
    let mut config = small(1500, 48, vec![12], vec![ReducerSpec::None]);
    config.normalize = false;
    let report = run_experiment(&config).unwrap();
    assert_eq!(report.rows[0].metrics.space, MetricSpace::Raw);
}

#[test]
fn reduced_training_is_faster_on_large_inputs() {
    // a 0.8 train fraction leaves over 10,000 training windows
    let mut config = synthetic_config(vec![96], vec![ReducerSpec::None, ReducerSpec::Pca { k: 48 }]);
    config.split = SplitConfig::Fractions(SplitSpec::new(0.8, 0.05, 0.15).unwrap());
    let report = run_experiment(&config).unwrap();
    let full = &report.rows[0];
    let reduced = &report.rows[1];
    assert!(full.metrics.n > 0);
    assert!(reduced.times.train_s < full.times.train_s, "{:?} vs {:?}", reduced.times, full.times);
}

#[test]
fn errors_name_their_grid_cell() {
    // a training segment too short for the longest horizon
    let config = small(600, 48, vec![8, 400], vec![ReducerSpec::Pca { k: 4 }]);
    let err = run_experiment(&config).unwrap_err().to_string();
    assert!(err.contains("horizon 400, reducer pca4"), "{err}");
}

fn write_archive(path: &std::path::Path, rows: &[(String, Vec<f64>)]) {
    let text: String = rows
        .iter()
        .map(|(t, v)| {
            let vals: Vec<String> = v.iter().map(f64::to_string).collect();
            format!("{t},{}\n", vals.join(","))
        })
        .collect();
    std::fs::write(path, text).unwrap();
}

#[test]
fn classification_and_extrinsic_regression() {
    let dir = tempfile::tempdir().unwrap();
    // two classes: sine vs square-ish waves of random phase
    let mut rows = Vec::new();
    for i in 0..80 {
        let phase = i as f64 * 0.37;
        let label = i % 2;
        let v: Vec<f64> = (0..64)
            .map(|t| {
                let s = (t as f64 * 0.3 + phase).sin();
                if label == 0 {
                    s
                } else {
                    s.signum() * 1.5 + 0.5
                }
            })
            .collect();
        rows.push((format!("{}", label + 1), v));
    }
    let path = dir.path().join("train.tsv");
    write_archive(&path, &rows);

    for model in [ModelSpec::NearestCentroid, ModelSpec::Logistic] {
        let config = ExperimentConfig {
            task: Task::Tsc,
            data: DataSource::Archive {
                path: path.clone(),
                test_path: None,
                has_header: false,
            },
            window: None,
            horizons: vec![],
            reducers: vec![ReducerSpec::None, ReducerSpec::Pca { k: 8 }],
            model,
            split: SplitConfig::default(),
            stride: 1,
            seed: 1,
            repeat: 1,
            normalize: true,
            output: None,
        };
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert_eq!(row.horizon, None);
            assert!(row.metrics.accuracy.unwrap() >= 0.9, "{model:?} {row:?}");
            assert!(row.metrics.mse.is_none());
        }
    }

    // regression target: the mean level of each sample
    let rows: Vec<(String, Vec<f64>)> = (0..60)
        .map(|i| {
            let level = (i % 7) as f64;
            let v: Vec<f64> = (0..32).map(|t| level + 0.1 * (t as f64 * 0.5 + i as f64).sin()).collect();
            (level.to_string(), v)
        })
        .collect();
    let reg = dir.path().join("reg.csv");
    write_archive(&reg, &rows);
    let config = ExperimentConfig {
        task: Task::Tser,
        data: DataSource::Archive {
            path: reg.clone(),
            test_path: Some(reg),
            has_header: false,
        },
        window: Some(32),
        horizons: vec![],
        reducers: vec![ReducerSpec::Pca { k: 4 }],
        model: ModelSpec::default(),
        split: SplitConfig::default(),
        stride: 1,
        seed: 0,
        repeat: 1,
        normalize: false,
        output: None,
    };
    let report = run_experiment(&config).unwrap();
    assert!(report.rows[0].metrics.mse.unwrap() < 1e-3);
}
