//! Loading, normalizing and chronologically splitting univariate series.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to the fitted standard deviation.
pub const ZSCORE_EPS: f64 = 1e-8;

/// A named univariate series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub name: String,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("time series"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        Ok(TimeSeries {
            name: name.into(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which CSV column to read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl ColumnSelector {
    /// Interprets an all-digit string as an index, anything else as a name.
    /// A header that happens to be numeric still wins at load time.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        }
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(n) => f.write_str(n),
        }
    }
}

/// Reads one column of a comma-separated file.
///
/// Parse errors report the 1-based line number in the file, counting the
/// header line when there is one.
pub fn load_csv(path: impl AsRef<Path>, column: &ColumnSelector, has_header: bool) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let idx = if has_header {
        let headers = reader.headers()?.clone();
        let by_name = |name: &str| headers.iter().position(|h| h == name);
        match column {
            ColumnSelector::Name(name) => {
                by_name(name).ok_or_else(|| Error::ColumnNotFound(name.clone()))?
            }
            ColumnSelector::Index(i) => match by_name(&i.to_string()) {
                Some(j) => j,
                None if *i < headers.len() => *i,
                None => return Err(Error::ColumnNotFound(i.to_string())),
            },
        }
    } else {
        match column {
            ColumnSelector::Index(i) => *i,
            ColumnSelector::Name(name) => return Err(Error::ColumnNotFound(name.clone())),
        }
    };

    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let cell = record.get(idx).ok_or_else(|| Error::Parse {
            row: line,
            message: format!("missing column {column}"),
        })?;
        let v: f64 = cell.parse().map_err(|_| Error::Parse {
            row: line,
            message: format!("cannot parse {cell:?} as a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                row: line,
                message: format!("non-finite value {cell:?}"),
            });
        }
        values.push(v);
    }
    let name = format!(
        "{}:{}",
        path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default(),
        column
    );
    TimeSeries::new(name, values).map_err(|e| e.context(path.display().to_string()))
}

/// Mean and (population) standard deviation of a training segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZScoreParams {
    pub mean: f64,
    pub std: f64,
}

impl ZScoreParams {
    pub const IDENTITY: ZScoreParams = ZScoreParams { mean: 0.0, std: 1.0 };

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|v| (v - self.mean) / self.std).collect()
    }

    pub fn invert(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|v| v * self.std + self.mean).collect()
    }
}

pub fn zscore_fit(train: &[f64]) -> Result<ZScoreParams> {
    if train.is_empty() {
        return Err(Error::Empty("zscore_fit"));
    }
    let n = train.len() as f64;
    let mean = train.iter().sum::<f64>() / n;
    let var = train.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(ZScoreParams {
        mean,
        std: var.sqrt().max(ZSCORE_EPS),
    })
}

pub fn zscore_apply(params: &ZScoreParams, values: &[f64]) -> Vec<f64> {
    params.apply(values)
}

/// Train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.7,
            val: 0.1,
            test: 0.2,
        }
    }
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let spec = SplitSpec { train, val, test };
        spec.validate()?;
        Ok(spec)
    }

    /// The 60/20/20 split conventionally used with the ETT benchmarks.
    pub fn ett() -> Self {
        SplitSpec {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("train", self.train), ("val", self.val), ("test", self.test)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::invalid(format!("{name} fraction {f} not in (0, 1)")));
            }
        }
        let sum = self.train + self.val + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("split fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Segment boundaries `(train_end, val_end)` for a length-`n` sequence.
    pub fn boundaries(&self, n: usize) -> (usize, usize) {
        // the slack absorbs representation error such as 0.7 + 0.1 < 0.8
        let cut = |f: f64| ((n as f64 * f + 1e-9).floor() as usize).min(n);
        (cut(self.train), cut(self.train + self.val))
    }
}

/// Contiguous train/validation/test segments, in time order.
pub fn chrono_split(series: &TimeSeries, spec: &SplitSpec) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    spec.validate()?;
    let n = series.len();
    let (a, b) = spec.boundaries(n);
    for (name, len) in [("train", a), ("val", b - a), ("test", n - b)] {
        if len == 0 {
            return Err(Error::invalid(format!(
                "{name} segment is empty for a series of length {n}"
            )));
        }
    }
    let seg = |suffix: &str, r: std::ops::Range<usize>| TimeSeries {
        name: format!("{}/{suffix}", series.name),
        values: series.values[r].to_vec(),
    };
    Ok((seg("train", 0..a), seg("val", a..b), seg("test", b..n)))
}
