//! The experiment runner: config → ingest → split → window → reduce → train
//! → evaluate, with wall-clock times for every stage.

pub mod cli;
mod report;
mod synthetic;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::{MetricReport, MetricSpace};
use crate::models::{classify_fit, ridge_fit, ClassifierKind, DEFAULT_LAMBDA};
use crate::reducer::{Reducer, ReducerSpec};
use crate::series::{load_csv, zscore_fit, ColumnSelector, SplitSpec, ZScoreParams};
use crate::windowing::{load_archive, make_forecast_windows, SplitTag, Targets, Task, TaskDataset, WindowMatrix};

pub use report::{read_report_csv, read_report_json, summary_table, write_report, ReportFormat, ReportRecord, CSV_HEADER};
pub use synthetic::{generate_synthetic, Sinusoid, SyntheticSpec};

/// Environment variable capping the number of grid cells run concurrently.
pub const THREADS_ENV: &str = "TSREDUCE_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// One column of a CSV file, for forecasting.
    Csv {
        path: PathBuf,
        column: ColumnSelector,
        #[serde(default = "yes")]
        has_header: bool,
    },
    Synthetic(SyntheticSpec),
    /// Per-sample archive files for classification or extrinsic regression.
    /// Without `test_path` the samples are shuffled with the config seed and
    /// split by the split fractions.
    Archive {
        path: PathBuf,
        #[serde(default)]
        test_path: Option<PathBuf>,
        #[serde(default)]
        has_header: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelSpec {
    Ridge {
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    NearestCentroid,
    Logistic,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Ridge {
            lambda: DEFAULT_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitPreset {
    /// 70/10/20.
    Default,
    /// 60/20/20.
    Ett,
}

/// Either a named preset or explicit fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SplitConfig {
    Preset(SplitPreset),
    Fractions(SplitSpec),
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig::Preset(SplitPreset::Default)
    }
}

impl SplitConfig {
    pub fn spec(&self) -> SplitSpec {
        match *self {
            SplitConfig::Preset(SplitPreset::Default) => SplitSpec::default(),
            SplitConfig::Preset(SplitPreset::Ett) => SplitSpec::ett(),
            SplitConfig::Fractions(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub data: DataSource,
    /// Window length `L`. Required for forecasting; for archives it defaults
    /// to the sample length.
    #[serde(default, alias = "L")]
    pub window: Option<usize>,
    /// Forecast horizons; forecasting only.
    #[serde(default)]
    pub horizons: Vec<usize>,
    pub reducers: Vec<ReducerSpec>,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub seed: u64,
    /// Runs per grid cell; stage times are the median.
    #[serde(default = "three")]
    pub repeat: usize,
    /// Z-score with training-segment statistics.
    #[serde(default = "yes")]
    pub normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn three() -> usize {
    3
}
fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

impl ExperimentConfig {
    /// Reads a JSON config. Relative data and output paths are taken relative
    /// to the config file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut config.data {
            DataSource::Csv { path, .. } => resolve(path),
            DataSource::Archive { path, test_path, .. } => {
                resolve(path);
                if let Some(t) = test_path {
                    resolve(t);
                }
            }
            DataSource::Synthetic(_) => {}
        }
        if let Some(out) = &mut config.output {
            resolve(out);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeat == 0 {
            return Err(Error::invalid("repeat must be at least 1"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride must be at least 1"));
        }
        self.split.spec().validate()?;
        if let ModelSpec::Ridge { lambda } = self.model {
            if !lambda.is_finite() || lambda < 0.0 {
                return Err(Error::invalid(format!("ridge lambda {lambda} must be finite and >= 0")));
            }
        }
        match self.task {
            Task::Tsf => {
                let window = self.window.ok_or_else(|| Error::invalid("forecasting needs a window length"))?;
                if self.horizons.is_empty() {
                    return Err(Error::invalid("forecasting needs at least one horizon"));
                }
                if self.horizons.contains(&0) {
                    return Err(Error::invalid("horizons must be at least 1"));
                }
                if matches!(self.data, DataSource::Archive { .. }) {
                    return Err(Error::invalid("forecasting reads a csv or synthetic series, not an archive"));
                }
                if !matches!(self.model, ModelSpec::Ridge { .. }) {
                    return Err(Error::invalid("forecasting uses the ridge model"));
                }
                for r in &self.reducers {
                    r.output_width(window)?;
                }
            }
            Task::Tsc | Task::Tser => {
                if !self.horizons.is_empty() {
                    return Err(Error::invalid("horizons apply to forecasting only"));
                }
                if !matches!(self.data, DataSource::Archive { .. }) {
                    return Err(Error::invalid(format!("task {} reads an archive data source", self.task)));
                }
                let ridge = matches!(self.model, ModelSpec::Ridge { .. });
                if (self.task == Task::Tsc) == ridge {
                    return Err(Error::invalid(
                        "classification uses nearest_centroid or logistic; regression uses ridge",
                    ));
                }
                if let Some(window) = self.window {
                    for r in &self.reducers {
                        r.output_width(window)?;
                    }
                }
            }
        }
        if let DataSource::Synthetic(spec) = &self.data {
            spec.validate()?;
        }
        Ok(())
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimes {
    pub reduce_fit_s: f64,
    pub reduce_apply_s: f64,
    pub train_s: f64,
    pub infer_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub task: Task,
    pub horizon: Option<usize>,
    pub reducer: String,
    pub k: Option<usize>,
    pub metrics: MetricReport,
    pub times: StageTimes,
    /// Features per sample handed to the model.
    pub width: usize,
    pub seed: u64,
    /// Size of the reduced train and test feature matrices, in bytes.
    pub feature_bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: ExperimentConfig,
    /// Seconds since the Unix epoch when the run finished.
    pub timestamp: u64,
    pub rows: Vec<BenchRow>,
}

/// Windows and targets of one forecasting horizon.
#[derive(Debug, Clone)]
pub struct ForecastSplits {
    pub zscore: ZScoreParams,
    pub train: TaskDataset,
    /// Absent when the validation segment is too short for a single target.
    pub val: Option<TaskDataset>,
    pub test: TaskDataset,
}

/// Normalizes with training statistics, then cuts windows per segment.
///
/// Validation and test windows take their first inputs from the end of the
/// preceding segment, so every target in a segment gets a prediction and no
/// target ever comes from an earlier segment.
pub fn forecast_splits(
    values: &[f64],
    split: &SplitSpec,
    normalize: bool,
    window: usize,
    horizon: usize,
    stride: usize,
) -> Result<ForecastSplits> {
    split.validate()?;
    let n = values.len();
    let (a, b) = split.boundaries(n);
    if a < window + horizon {
        return Err(Error::SeriesTooShort {
            required: window + horizon,
            actual: a,
        }
        .context("training segment"));
    }
    let zscore = if normalize {
        zscore_fit(&values[..a])?
    } else {
        ZScoreParams::IDENTITY
    };
    let z = zscore.apply(values);
    let dataset = |range: std::ops::Range<usize>, tag: SplitTag| -> Result<TaskDataset> {
        let (x, y) = make_forecast_windows(&z[range], window, horizon, stride)?;
        TaskDataset::new(x, Targets::Future(y), tag)
    };
    let train = dataset(0..a, SplitTag::Train)?;
    let val = if b - a >= horizon {
        Some(dataset(a - window..b, SplitTag::Val)?)
    } else {
        None
    };
    let test = dataset(b - window..n, SplitTag::Test).map_err(|e| e.context("test segment"))?;
    Ok(ForecastSplits { zscore, train, val, test })
}

/// Worker count from the environment; one unless set.
pub fn worker_threads() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::invalid(format!("{THREADS_ENV}={s:?} is not a positive integer"))),
        },
    }
}

enum Prepared {
    Series { values: Vec<f64>, split: SplitSpec },
    Samples { train: TaskDataset, test: TaskDataset },
}

fn load_data(config: &ExperimentConfig) -> Result<Prepared> {
    match &config.data {
        DataSource::Csv {
            path,
            column,
            has_header,
        } => Ok(Prepared::Series {
            values: load_csv(path, column, *has_header)?.values,
            split: config.split.spec(),
        }),
        DataSource::Synthetic(spec) => Ok(Prepared::Series {
            values: generate_synthetic(spec)?.values,
            split: config.split.spec(),
        }),
        DataSource::Archive {
            path,
            test_path,
            has_header,
        } => {
            let train = load_archive(path, config.task, *has_header)?;
            let (train, test) = match test_path {
                Some(tp) => {
                    let test = load_archive(tp, config.task, *has_header)?;
                    if test.class_names != train.class_names && config.task == Task::Tsc {
                        return Err(Error::invalid(format!(
                            "{} and {} have different class sets",
                            path.display(),
                            tp.display()
                        )));
                    }
                    (train.dataset, test.dataset)
                }
                None => {
                    let data = train.dataset;
                    let mut idx: Vec<usize> = (0..data.len()).collect();
                    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
                    let split = config.split.spec();
                    let (a, b) = split.boundaries(idx.len());
                    if a == 0 || b == idx.len() {
                        return Err(Error::invalid(format!(
                            "{} samples are too few to split",
                            idx.len()
                        )));
                    }
                    (data.select(&idx[..a], SplitTag::Train)?, data.select(&idx[b..], SplitTag::Test)?)
                }
            };
            let len = train.features.window_len();
            if test.features.window_len() != len {
                return Err(Error::invalid(format!(
                    "train samples have length {len}, test samples {}",
                    test.features.window_len()
                )));
            }
            if let Some(w) = config.window {
                if w != len {
                    return Err(Error::invalid(format!("window {w} differs from sample length {len}")));
                }
            }
            for r in &config.reducers {
                r.output_width(len)?;
            }
            let (train, test) = if config.normalize {
                let z = zscore_fit(train.features.data())?;
                let norm = |d: TaskDataset| -> Result<TaskDataset> {
                    let x = d.features.into_matrix().map(|v| (v - z.mean) / z.std);
                    TaskDataset::new(WindowMatrix::new(x)?, d.targets, d.split)
                };
                (norm(train)?, norm(test)?)
            } else {
                (train, test)
            };
            Ok(Prepared::Samples { train, test })
        }
    }
}

struct Run {
    times: StageTimes,
    metrics: MetricReport,
    width: usize,
    feature_bytes: usize,
}

fn run_once(
    config: &ExperimentConfig,
    spec: &ReducerSpec,
    train: &TaskDataset,
    others: &[&TaskDataset],
    test: &TaskDataset,
    space: MetricSpace,
) -> Result<Run> {
    let t = Instant::now();
    let reducer = spec.fit(&train.features, config.seed)?;
    let reduce_fit_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let f_train = reducer.transform(&train.features)?;
    for d in others {
        reducer.transform(&d.features)?;
    }
    let f_test = reducer.transform(&test.features)?;
    let reduce_apply_s = t.elapsed().as_secs_f64();

    let width = f_train.cols();
    let feature_bytes = (f_train.rows() + f_test.rows()) * width * std::mem::size_of::<f64>();

    let (train_s, infer_s, metrics) = match (&train.targets, &test.targets, config.model) {
        (Targets::Future(y), Targets::Future(truth), ModelSpec::Ridge { lambda }) => {
            let t = Instant::now();
            let model = ridge_fit(&f_train, y, lambda)?;
            let train_s = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let pred = model.predict(&f_test)?;
            let infer_s = t.elapsed().as_secs_f64();
            (train_s, infer_s, MetricReport::regression(&pred, truth, space)?)
        }
        (Targets::Scalars(y), Targets::Scalars(truth), ModelSpec::Ridge { lambda }) => {
            let y = Matrix::from_vec(y.len(), 1, y.clone())?;
            let truth = Matrix::from_vec(truth.len(), 1, truth.clone())?;
            let t = Instant::now();
            let model = ridge_fit(&f_train, &y, lambda)?;
            let train_s = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let pred = model.predict(&f_test)?;
            let infer_s = t.elapsed().as_secs_f64();
            (train_s, infer_s, MetricReport::regression(&pred, &truth, MetricSpace::Raw)?)
        }
        (Targets::Labels { labels, .. }, Targets::Labels { labels: truth, .. }, model) => {
            let kind = match model {
                ModelSpec::Logistic => ClassifierKind::Logistic,
                _ => ClassifierKind::NearestCentroid,
            };
            let t = Instant::now();
            let model = classify_fit(&f_train, labels, kind)?;
            let train_s = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let pred = model.predict(&f_test)?;
            let infer_s = t.elapsed().as_secs_f64();
            (train_s, infer_s, MetricReport::classification(&pred, truth)?)
        }
        _ => return Err(Error::invalid("model does not fit the task's targets")),
    };
    Ok(Run {
        times: StageTimes {
            reduce_fit_s,
            reduce_apply_s,
            train_s,
            infer_s,
        },
        metrics,
        width,
        feature_bytes,
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

fn run_cell(
    config: &ExperimentConfig,
    data: &Prepared,
    horizon: Option<usize>,
    spec: &ReducerSpec,
) -> Result<BenchRow> {
    let space = if config.normalize {
        MetricSpace::Zscore
    } else {
        MetricSpace::Raw
    };
    let owned;
    let (train, others, test): (&TaskDataset, Vec<&TaskDataset>, &TaskDataset) = match data {
        Prepared::Series { values, split } => {
            let window = config.window.expect("validated");
            let h = horizon.expect("forecasting rows have a horizon");
            owned = forecast_splits(values, split, config.normalize, window, h, config.stride)?;
            (&owned.train, owned.val.iter().collect(), &owned.test)
        }
        Prepared::Samples { train, test } => (train, Vec::new(), test),
    };

    let mut runs = Vec::with_capacity(config.repeat);
    for _ in 0..config.repeat {
        runs.push(run_once(config, spec, train, &others, test, space)?);
    }
    let stage = |f: fn(&StageTimes) -> f64| median(runs.iter().map(|r| f(&r.times)).collect());
    let times = StageTimes {
        reduce_fit_s: stage(|t| t.reduce_fit_s),
        reduce_apply_s: stage(|t| t.reduce_apply_s),
        train_s: stage(|t| t.train_s),
        infer_s: stage(|t| t.infer_s),
    };
    let first = runs.swap_remove(0);
    Ok(BenchRow {
        task: config.task,
        horizon,
        reducer: spec.label(),
        k: spec.k(),
        metrics: first.metrics,
        times,
        width: first.width,
        seed: config.seed,
        feature_bytes: first.feature_bytes,
    })
}

/// Runs every (horizon × reducer) cell of the grid.
///
/// Each cell re-fits its reducer on training windows only. Metrics come from
/// the first repeat; stage times are medians over all repeats. Cells run on
/// up to `TSREDUCE_THREADS` workers, but each cell's stages run on a single
/// worker, and rows come back in grid order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<BenchReport> {
    config.validate()?;
    let data = load_data(config)?;
    let horizons: Vec<Option<usize>> = if config.task == Task::Tsf {
        config.horizons.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let cells: Vec<(Option<usize>, &ReducerSpec)> = horizons
        .iter()
        .flat_map(|&h| config.reducers.iter().map(move |r| (h, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads()?)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(h, spec)| {
                run_cell(config, &data, h, spec).map_err(|e| {
                    let at = match h {
                        Some(h) => format!("horizon {h}, reducer {}", spec.label()),
                        None => format!("reducer {}", spec.label()),
                    };
                    e.context(at)
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(BenchReport {
        config: config.clone(),
        timestamp,
        rows,
    })
}

/// A bench over the bundled synthetic series with the usual forecasting
/// protocol: `L = 336`, ridge downstream.
pub fn synthetic_config(horizons: Vec<usize>, reducers: Vec<ReducerSpec>) -> ExperimentConfig {
    ExperimentConfig {
        task: Task::Tsf,
        data: DataSource::Synthetic(SyntheticSpec::benchmark()),
        window: Some(336),
        horizons,
        reducers,
        model: ModelSpec::default(),
        split: SplitConfig::default(),
        stride: 1,
        seed: 42,
        repeat: 3,
        normalize: true,
        output: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(reducers: Vec<ReducerSpec>) -> ExperimentConfig {
        let mut c = synthetic_config(vec![8], reducers);
        c.data = DataSource::Synthetic(SyntheticSpec {
            length: 600,
            ..SyntheticSpec::benchmark()
        });
        c.window = Some(48);
        c.repeat = 1;
        c
    }

    #[test]
    fn config_json_defaults() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"task": "tsf", "data": {"synthetic": {"length": 500, "components": [{"period": 24, "amplitude": 1}]}},
                "L": 96, "horizons": [24], "reducers": [{"kind": "none"}, {"kind": "pca", "k": 8}], "split": "ett"}"#,
        )
        .unwrap();
        assert_eq!(c.window, Some(96));
        assert_eq!(c.repeat, 3);
        assert_eq!(c.stride, 1);
        assert_eq!(c.model, ModelSpec::Ridge { lambda: DEFAULT_LAMBDA });
        assert_eq!(c.split.spec(), SplitSpec::ett());
        c.validate().unwrap();

        let fractions: SplitConfig = serde_json::from_str(r#"{"train": 0.5, "val": 0.25, "test": 0.25}"#).unwrap();
        assert_eq!(fractions.spec().train, 0.5);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"task": "tsf", "bogus": 1}"#).is_err());
    }

    #[test]
    fn invalid_configs() {
        let mut c = small(vec![ReducerSpec::Pca { k: 100 }]);
        assert!(c.validate().unwrap_err().to_string().contains("k exceeds window length"));
        c.reducers = vec![];
        c.repeat = 0;
        assert!(c.validate().is_err());
        c.repeat = 1;
        c.horizons = vec![];
        assert!(c.validate().is_err());
        c.horizons = vec![0];
        assert!(c.validate().is_err());
        c.horizons = vec![4];
        c.model = ModelSpec::Logistic;
        assert!(c.validate().is_err());
    }

    #[test]
    fn segments_respect_boundaries() {
        let values: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let s = forecast_splits(&values, &SplitSpec::default(), false, 10, 5, 1).unwrap();
        // train targets stay inside 0..70, test targets cover exactly 80..100
        assert_eq!(s.train.len(), 70 - 15 + 1);
        let Targets::Future(y) = &s.test.targets else { panic!() };
        assert_eq!(y[(0, 0)], 80.0);
        assert_eq!(y[(y.rows() - 1, 4)], 99.0);
        assert_eq!(s.test.features[(0, 0)], 70.0);
        let val = s.val.unwrap();
        let Targets::Future(yv) = &val.targets else { panic!() };
        assert_eq!((yv[(0, 0)], yv[(yv.rows() - 1, 4)]), (70.0, 79.0));
    }

    #[test]
    fn zscore_uses_training_segment_only() {
        let mut values: Vec<f64> = (0..100).map(|i| (i as f64 * 0.3).sin()).collect();
        let a = forecast_splits(&values, &SplitSpec::default(), true, 10, 2, 1).unwrap().zscore;
        for v in &mut values[70..] {
            *v += 1000.0;
        }
        let b = forecast_splits(&values, &SplitSpec::default(), true, 10, 2, 1).unwrap().zscore;
        assert_eq!(a, b);
    }

    #[test]
    fn grid_rows_in_order() {
        let mut c = small(vec![ReducerSpec::None, ReducerSpec::Pca { k: 8 }, ReducerSpec::Truncate { k: 8 }]);
        c.horizons = vec![4, 8];
        let report = run_experiment(&c).unwrap();
        let labels: Vec<(Option<usize>, &str)> =
            report.rows.iter().map(|r| (r.horizon, r.reducer.as_str())).collect();
        assert_eq!(
            labels,
            [
                (Some(4), "none"),
                (Some(4), "pca8"),
                (Some(4), "truncate8"),
                (Some(8), "none"),
                (Some(8), "pca8"),
                (Some(8), "truncate8")
            ]
        );
        for r in &report.rows {
            assert!(r.metrics.mse.unwrap() >= 0.0);
            assert_eq!(r.metrics.space, MetricSpace::Zscore);
            let t = r.times;
            assert!(t.reduce_fit_s >= 0.0 && t.reduce_apply_s >= 0.0 && t.train_s >= 0.0 && t.infer_s >= 0.0);
        }
        assert_eq!(report.rows[0].width, 48);
        assert_eq!(report.rows[1].width, 8);
    }

    #[test]
    fn median_of_repeats() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0]), 2.5);
    }
}
