//! Sample matrices for the three task types.
//!
//! Forecasting slides a length-`L` window (plus a length-`T` target) along a
//! single series. Classification and extrinsic regression take one sample per
//! archive row instead, without any sub-windowing.

use std::collections::BTreeSet;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// `n × L` matrix of historical windows, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowMatrix(Matrix);

impl WindowMatrix {
    pub fn new(x: Matrix) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::Empty("window matrix"));
        }
        if x.cols() == 0 {
            return Err(Error::invalid("window length must be at least 1"));
        }
        if let Some(pos) = x.data().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / x.cols(),
                col: pos % x.cols(),
            });
        }
        Ok(WindowMatrix(x))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        WindowMatrix::new(Matrix::from_rows(rows)?)
    }

    /// Window length `L`.
    pub fn window_len(&self) -> usize {
        self.0.cols()
    }

    /// Number of windows `n`.
    pub fn count(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl Deref for WindowMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl AsRef<Matrix> for WindowMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Classification.
    Tsc,
    /// Forecasting.
    Tsf,
    /// Extrinsic regression.
    Tser,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Tsc => "tsc",
            Task::Tsf => "tsf",
            Task::Tser => "tser",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Val,
    Test,
    Whole,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// `n × T` future values.
    Future(Matrix),
    /// Dense class ids in `0..num_classes`.
    Labels { labels: Vec<usize>, num_classes: usize },
    Scalars(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Future(m) => m.rows(),
            Targets::Labels { labels, .. } => labels.len(),
            Targets::Scalars(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Targets::Future(_) => Task::Tsf,
            Targets::Labels { .. } => Task::Tsc,
            Targets::Scalars(_) => Task::Tser,
        }
    }

    /// Keeps the listed samples.
    pub fn select(&self, idx: &[usize]) -> Targets {
        match self {
            Targets::Future(m) => Targets::Future(m.select_rows(idx)),
            Targets::Labels {
                labels,
                num_classes,
            } => Targets::Labels {
                labels: idx.iter().map(|&i| labels[i]).collect(),
                num_classes: *num_classes,
            },
            Targets::Scalars(v) => Targets::Scalars(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Features paired with their targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub task: Task,
    pub features: WindowMatrix,
    pub targets: Targets,
    pub split: SplitTag,
}

impl TaskDataset {
    pub fn new(features: WindowMatrix, targets: Targets, split: SplitTag) -> Result<Self> {
        if features.count() != targets.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} targets",
                features.count(),
                targets.len()
            )));
        }
        match &targets {
            Targets::Future(m) if m.cols() == 0 => {
                return Err(Error::invalid("forecast horizon must be at least 1"))
            }
            Targets::Labels {
                labels,
                num_classes,
            } => {
                if let Some(bad) = labels.iter().find(|&&l| l >= *num_classes) {
                    return Err(Error::invalid(format!(
                        "label {bad} outside 0..{num_classes}"
                    )));
                }
            }
            _ => {}
        }
        Ok(TaskDataset {
            task: targets.task(),
            features,
            targets,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.features.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Keeps the listed samples, in the order given.
    pub fn select(&self, idx: &[usize], split: SplitTag) -> Result<TaskDataset> {
        TaskDataset::new(
            WindowMatrix::new(self.features.select_rows(idx))?,
            self.targets.select(idx),
            split,
        )
    }
}

/// Sliding windows with no targets, e.g. for fitting or applying a reducer
/// to a whole series.
pub fn sliding_windows(series: &[f64], window: usize, stride: usize) -> Result<WindowMatrix> {
    if window == 0 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    if stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    if series.len() < window {
        return Err(Error::SeriesTooShort {
            required: window,
            actual: series.len(),
        });
    }
    let count = (series.len() - window) / stride + 1;
    let mut data = Vec::with_capacity(count * window);
    for i in 0..count {
        let t = i * stride;
        data.extend_from_slice(&series[t..t + window]);
    }
    WindowMatrix::new(Matrix::from_vec(count, window, data)?)
}

/// Input windows of length `window` and the `horizon` values that follow each.
///
/// Windows start at `0, stride, 2·stride, …`; there are
/// `(N − window − horizon) / stride + 1` of them.
pub fn make_forecast_windows(
    series: &[f64],
    window: usize,
    horizon: usize,
    stride: usize,
) -> Result<(WindowMatrix, Matrix)> {
    if window == 0 || horizon == 0 {
        return Err(Error::invalid("window length and horizon must be at least 1"));
    }
    if stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    let required = window + horizon;
    if series.len() < required {
        return Err(Error::SeriesTooShort {
            required,
            actual: series.len(),
        });
    }
    let count = (series.len() - required) / stride + 1;
    let mut x = Vec::with_capacity(count * window);
    let mut y = Vec::with_capacity(count * horizon);
    for i in 0..count {
        let t = i * stride;
        x.extend_from_slice(&series[t..t + window]);
        y.extend_from_slice(&series[t + window..t + required]);
    }
    Ok((
        WindowMatrix::new(Matrix::from_vec(count, window, x)?)?,
        Matrix::from_vec(count, horizon, y)?,
    ))
}

/// Target values for per-sample datasets.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleTargets {
    Labels(Vec<usize>),
    Scalars(Vec<f64>),
}

/// Stacks equal-length samples into a classification or regression dataset.
pub fn make_sample_matrix(samples: &[Vec<f64>], targets: SampleTargets) -> Result<TaskDataset> {
    let first = samples.first().ok_or(Error::Empty("sample list"))?;
    if let Some((i, s)) = samples.iter().enumerate().find(|(_, s)| s.len() != first.len()) {
        return Err(Error::Ragged {
            index: i,
            expected: first.len(),
            actual: s.len(),
        });
    }
    let features = WindowMatrix::from_rows(samples)?;
    let targets = match targets {
        SampleTargets::Labels(labels) => {
            let num_classes = labels.iter().max().map_or(0, |m| m + 1);
            Targets::Labels {
                labels,
                num_classes,
            }
        }
        SampleTargets::Scalars(v) => {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row: i, col: 0 });
            }
            Targets::Scalars(v)
        }
    };
    TaskDataset::new(features, targets, SplitTag::Whole)
}

/// An archive loaded from disk: one sample per line, target first.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub dataset: TaskDataset,
    /// Original label text for each dense class id (classification only).
    pub class_names: Vec<String>,
}

/// Reads a UCR-style archive file: each line holds the target followed by the
/// sample's values, separated by commas or tabs.
///
/// For classification the label strings are mapped to dense ids in sorted
/// order (numerically when every label parses as a number).
pub fn load_archive(path: impl AsRef<Path>, task: Task, has_header: bool) -> Result<Archive> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut raw_targets = Vec::new();
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate().skip(usize::from(has_header)) {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split([',', '\t']).map(str::trim);
        let target = cells.next().unwrap_or_default().to_string();
        let values = cells
            .map(|c| {
                c.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row: line_no,
                        message: format!("cannot parse {c:?} as a number"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        raw_targets.push((line_no, target));
        samples.push(values);
    }

    let (targets, class_names) = match task {
        Task::Tsc => {
            let unique: BTreeSet<&str> = raw_targets.iter().map(|(_, t)| t.as_str()).collect();
            let mut names: Vec<String> = unique.into_iter().map(String::from).collect();
            if names.iter().all(|n| n.parse::<f64>().is_ok()) {
                names.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
            }
            let labels = raw_targets
                .iter()
                .map(|(_, t)| names.iter().position(|n| n == t).unwrap())
                .collect();
            (SampleTargets::Labels(labels), names)
        }
        Task::Tser => {
            let values = raw_targets
                .iter()
                .map(|(line, t)| {
                    t.parse::<f64>().map_err(|_| Error::Parse {
                        row: *line,
                        message: format!("cannot parse target {t:?} as a number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            (SampleTargets::Scalars(values), Vec::new())
        }
        Task::Tsf => {
            return Err(Error::invalid(
                "archives hold per-sample targets; forecasting reads a single series",
            ))
        }
    };
    let dataset = make_sample_matrix(&samples, targets)
        .map_err(|e| e.context(path.display().to_string()))?;
    Ok(Archive {
        dataset,
        class_names,
    })
}
