use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BenchReport, BenchRow};
use crate::error::{Error, Result};
use crate::windowing::Task;

/// Column order of CSV reports.
pub const CSV_HEADER: [&str; 14] = [
    "task",
    "horizon",
    "reducer",
    "k",
    "metric_mse",
    "metric_mae",
    "metric_rmse",
    "accuracy",
    "reduce_fit_s",
    "reduce_apply_s",
    "train_s",
    "infer_s",
    "width",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

/// One CSV line. Missing values are empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub task: Task,
    pub horizon: Option<usize>,
    pub reducer: String,
    pub k: Option<usize>,
    pub metric_mse: Option<f64>,
    pub metric_mae: Option<f64>,
    pub metric_rmse: Option<f64>,
    pub accuracy: Option<f64>,
    pub reduce_fit_s: f64,
    pub reduce_apply_s: f64,
    pub train_s: f64,
    pub infer_s: f64,
    pub width: usize,
    pub seed: u64,
}

impl From<&BenchRow> for ReportRecord {
    fn from(r: &BenchRow) -> Self {
        ReportRecord {
            task: r.task,
            horizon: r.horizon,
            reducer: r.reducer.clone(),
            k: r.k,
            metric_mse: r.metrics.mse,
            metric_mae: r.metrics.mae,
            metric_rmse: r.metrics.rmse,
            accuracy: r.metrics.accuracy,
            reduce_fit_s: r.times.reduce_fit_s,
            reduce_apply_s: r.times.reduce_apply_s,
            train_s: r.times.train_s,
            infer_s: r.times.infer_s,
            width: r.width,
            seed: r.seed,
        }
    }
}

pub(crate) fn write_csv<W: Write>(report: &BenchReport, out: W) -> Result<()> {
    // headers are written by hand so an empty grid still gets them
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &report.rows {
        w.serialize(ReportRecord::from(row))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_report(report: &BenchReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        ReportFormat::Csv => write_csv(report, &mut out)?,
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<BenchReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))
}

/// Reads a CSV report back, checking the header.
pub fn read_report_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if !header.iter().eq(CSV_HEADER) {
        return Err(Error::invalid(format!("{}: unexpected report header", path.display())));
    }
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

/// A plain-text table of each row against the full-window row of the same
/// horizon: error ratio and training speed-up.
pub fn summary_table(report: &BenchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>7}  {:<16} {:>5}  {:>10}  {:>8}  {:>10}  {:>8}",
        "horizon", "reducer", "width", "metric", "vs none", "train_s", "speedup"
    );
    for row in &report.rows {
        let base = report
            .rows
            .iter()
            .find(|b| b.horizon == row.horizon && b.reducer == "none");
        let (metric, base_metric) = match row.metrics.mse {
            Some(m) => (m, base.and_then(|b| b.metrics.mse)),
            None => (
                row.metrics.accuracy.unwrap_or(f64::NAN),
                base.and_then(|b| b.metrics.accuracy),
            ),
        };
        let ratio = base_metric.map_or("-".to_string(), |b| format!("{:.3}", metric / b));
        let speedup = base.map_or("-".to_string(), |b| {
            format!("{:.1}x", b.times.train_s / row.times.train_s.max(1e-12))
        });
        let horizon = row.horizon.map_or("-".to_string(), |h| h.to_string());
        let _ = writeln!(
            s,
            "{:>7}  {:<16} {:>5}  {:>10.5}  {:>8}  {:>10.4}  {:>8}",
            horizon, row.reducer, row.width, metric, ratio, row.times.train_s, speedup
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{synthetic_config, StageTimes};
    use crate::metrics::{MetricReport, MetricSpace};

    fn report(rows: usize) -> BenchReport {
        BenchReport {
            config: synthetic_config(vec![96], vec![]),
            timestamp: 1_700_000_000,
            rows: (0..rows)
                .map(|i| BenchRow {
                    task: Task::Tsf,
                    horizon: Some(96),
                    reducer: if i == 0 { "none".into() } else { format!("pca{i}") },
                    k: (i > 0).then_some(i),
                    metrics: MetricReport {
                        mse: Some(0.1 * (i + 1) as f64),
                        mae: Some(0.3),
                        rmse: Some((0.1 * (i + 1) as f64).sqrt()),
                        accuracy: None,
                        n: 10,
                        space: MetricSpace::Zscore,
                    },
                    times: StageTimes {
                        reduce_fit_s: 0.25,
                        reduce_apply_s: 1e-5,
                        train_s: 1.0 / 3.0,
                        infer_s: 0.0,
                    },
                    width: 336,
                    seed: 42,
                    feature_bytes: 100,
                })
                .collect(),
        }
    }

    #[test]
    fn empty_grid_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&report(0), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn four_rows_five_lines() {
        let mut buf = Vec::new();
        write_csv(&report(4), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        // the baseline row has no k and no accuracy
        assert!(text.lines().nth(1).unwrap().starts_with("tsf,96,none,,0.1,"));
    }

    #[test]
    fn json_and_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = report(3);
        let json = dir.path().join("r.json");
        write_report(&r, &json, ReportFormat::from_path(&json)).unwrap();
        assert_eq!(read_report_json(&json).unwrap(), r);

        let csv = dir.path().join("r.csv");
        write_report(&r, &csv, ReportFormat::Csv).unwrap();
        let back = read_report_csv(&csv).unwrap();
        let expected: Vec<ReportRecord> = r.rows.iter().map(ReportRecord::from).collect();
        assert_eq!(back, expected);
    }

    #[test]
    fn summary_has_ratios() {
        let s = summary_table(&report(2));
        assert!(s.contains("2.000"), "{s}");
        assert!(s.contains("1.0x"), "{s}");
    }
}
