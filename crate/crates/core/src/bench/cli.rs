//! The `tsreduce` command line.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 when a
//! valid request fails while running.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::{run_experiment, summary_table, write_report, ExperimentConfig, ReportFormat};
use crate::baselines::{FftMode, SpectralModel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pca::PcaFile;
use crate::reducer::{FittedReducer, Reducer, ReducerSpec};
use crate::series::{chrono_split, load_csv, zscore_fit, ColumnSelector, SplitSpec, ZScoreParams};
use crate::windowing::sliding_windows;

#[derive(Debug, Parser)]
#[command(name = "tsreduce", version, about = "Temporal dimension reduction for time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a benchmark grid from a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Report path; `.json` selects JSON, anything else CSV. Overrides
        /// the config's `output`. Without either the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the summary table on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Fit a reducer on the training segment of one CSV column.
    Fit {
        #[arg(long, value_enum, default_value_t = ReducerArg::Pca)]
        reducer: ReducerArg,
        #[arg(long)]
        input: PathBuf,
        /// Column name or zero-based index; defaults to the last column.
        #[arg(long)]
        column: Option<String>,
        #[arg(long)]
        window: usize,
        #[arg(short = 'k', long = "k")]
        k: usize,
        #[arg(long)]
        out: PathBuf,
        /// Which chronological segment to fit on: the train part of a
        /// 70/10/20 (`default`) or 60/20/20 (`ett`) split, or the whole series.
        #[arg(long, value_enum, default_value_t = SplitArg::Default)]
        split: SplitArg,
        /// Z-score with training statistics and store them in the model.
        #[arg(long)]
        zscore: bool,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_header: bool,
    },
    /// Reduce every window of a CSV column with a fitted model.
    Transform {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        no_header: bool,
    },
    /// Print the explained variance ratio of a PCA model.
    Evr {
        #[arg(long)]
        model: PathBuf,
        /// Number of leading components; all prefixes up to k when omitted.
        #[arg(long)]
        upto: Option<usize>,
    },
    /// Write original and reconstructed windows side by side.
    DumpRecon {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        max_windows: Option<usize>,
        #[arg(long)]
        no_header: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReducerArg {
    Pca,
    PcaRand,
    Fft,
    Dwt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Default,
    Ett,
    None,
}

struct Failure {
    code: i32,
    error: Error,
}

fn usage(error: Error) -> Failure {
    Failure { code: 1, error }
}

fn runtime(error: Error) -> Failure {
    Failure { code: 2, error }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.code
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Bench { config, out, quiet } => bench(&config, out, quiet),
        Command::Fit {
            reducer,
            input,
            column,
            window,
            k,
            out,
            split,
            zscore,
            stride,
            seed,
            no_header,
        } => {
            let spec = match reducer {
                ReducerArg::Pca => ReducerSpec::Pca { k },
                ReducerArg::PcaRand => ReducerSpec::PcaRand {
                    k,
                    seed: Some(seed),
                    oversample: crate::pca::DEFAULT_OVERSAMPLE,
                    power_iters: crate::pca::DEFAULT_POWER_ITERS,
                },
                ReducerArg::Fft => ReducerSpec::Fft {
                    k,
                    mode: FftMode::Complex,
                },
                ReducerArg::Dwt => ReducerSpec::Dwt { k },
            };
            spec.output_width(window).map_err(usage)?;
            if stride == 0 {
                return Err(usage(Error::invalid("stride must be at least 1")));
            }
            if zscore && matches!(reducer, ReducerArg::Fft | ReducerArg::Dwt) {
                return Err(usage(Error::invalid(
                    "--zscore parameters are stored in PCA model files only",
                )));
            }
            let series = read_series(&input, column.as_deref(), !no_header)?;
            let train = match split {
                SplitArg::None => series,
                SplitArg::Default => chrono_split(&series, &SplitSpec::default()).map_err(runtime)?.0,
                SplitArg::Ett => chrono_split(&series, &SplitSpec::ett()).map_err(runtime)?.0,
            };
            let z = if zscore {
                Some(zscore_fit(&train.values).map_err(runtime)?)
            } else {
                None
            };
            let values = z.map_or(train.values.clone(), |z| z.apply(&train.values));
            let windows = sliding_windows(&values, window, stride).map_err(runtime)?;
            let fitted = spec.fit(&windows, seed).map_err(runtime)?;
            let stored = match fitted {
                FittedReducer::Pca(model) => StoredModel::Pca(PcaFile { model, zscore: z }),
                FittedReducer::Spectral(m) => StoredModel::Spectral(m),
                _ => unreachable!("fit builds PCA or spectral reducers only"),
            };
            stored.save(&out).map_err(runtime)?;
            println!(
                "fitted {} on {} windows of length {window} -> {}",
                spec.label(),
                windows.count(),
                out.display()
            );
            Ok(())
        }
        Command::Transform {
            model,
            input,
            column,
            out,
            stride,
            no_header,
        } => {
            let model = StoredModel::load(&model).map_err(usage)?;
            let windows = model_windows(&model, &input, column.as_deref(), !no_header, stride)?;
            let scores = model.reducer().transform(&windows).map_err(runtime)?;
            let header: Vec<String> = (0..scores.cols()).map(|j| format!("f{j}")).collect();
            write_matrix(&out, &header, &scores).map_err(runtime)
        }
        Command::Evr { model, upto } => {
            let StoredModel::Pca(file) = StoredModel::load(&model).map_err(usage)? else {
                return Err(usage(Error::invalid(format!(
                    "{} is not a PCA model",
                    model.display()
                ))));
            };
            let pca = &file.model;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            match upto {
                Some(u) => {
                    let r = pca.explained_variance_ratio(u).map_err(usage)?;
                    let _ = writeln!(out, "{r}");
                }
                None => {
                    let _ = writeln!(out, "upto\tratio");
                    for u in 1..=pca.k() {
                        let r = pca.explained_variance_ratio(u).map_err(runtime)?;
                        let _ = writeln!(out, "{u}\t{r}");
                    }
                }
            }
            Ok(())
        }
        Command::DumpRecon {
            model,
            input,
            column,
            out,
            stride,
            max_windows,
            no_header,
        } => {
            let model = StoredModel::load(&model).map_err(usage)?;
            let mut windows = model_windows(&model, &input, column.as_deref(), !no_header, stride)?;
            if let Some(m) = max_windows {
                if m < windows.rows() {
                    windows = windows.select_rows(&(0..m).collect::<Vec<_>>());
                }
            }
            let recon = model.reconstruct(&windows).map_err(runtime)?;
            let z = model.zscore();
            let file = std::fs::File::create(&out).map_err(|e| runtime(Error::io(&out, e)))?;
            let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
            let mut write = || -> Result<()> {
                w.write_record(["window", "offset", "original", "reconstruction"])?;
                for i in 0..windows.rows() {
                    let orig = z.invert(windows.row(i));
                    let rec = z.invert(recon.row(i));
                    for (t, (o, r)) in orig.iter().zip(&rec).enumerate() {
                        w.write_record([i.to_string(), t.to_string(), o.to_string(), r.to_string()])?;
                    }
                }
                w.flush().map_err(csv::Error::from)?;
                Ok(())
            };
            write().map_err(runtime)
        }
    }
}

fn bench(config_path: &Path, out: Option<PathBuf>, quiet: bool) -> CliResult<()> {
    let config = ExperimentConfig::from_file(config_path).map_err(usage)?;
    let report = run_experiment(&config).map_err(runtime)?;
    match out.or_else(|| config.output.clone()) {
        Some(path) => {
            write_report(&report, &path, ReportFormat::from_path(&path)).map_err(runtime)?;
            if !quiet {
                eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
            }
        }
        None => super::report::write_csv(&report, std::io::stdout().lock()).map_err(runtime)?,
    }
    if !quiet {
        eprint!("{}", summary_table(&report));
    }
    Ok(())
}

/// A reducer as stored on disk by `fit`.
enum StoredModel {
    Pca(PcaFile),
    Spectral(SpectralModel),
}

impl StoredModel {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let parsed = if value.get("kind").is_some() {
            SpectralModel::from_json(&text).map(StoredModel::Spectral)
        } else {
            PcaFile::from_json(&text).map(StoredModel::Pca)
        };
        parsed.map_err(|e| e.context(path.display().to_string()))
    }

    fn save(&self, path: &Path) -> Result<()> {
        match self {
            StoredModel::Pca(f) => f.save(path),
            StoredModel::Spectral(m) => m.save(path),
        }
    }

    fn reducer(&self) -> &dyn Reducer {
        match self {
            StoredModel::Pca(f) => &f.model,
            StoredModel::Spectral(m) => m,
        }
    }

    fn zscore(&self) -> ZScoreParams {
        match self {
            StoredModel::Pca(f) => f.zscore.unwrap_or(ZScoreParams::IDENTITY),
            StoredModel::Spectral(_) => ZScoreParams::IDENTITY,
        }
    }

    fn reconstruct(&self, windows: &Matrix) -> Result<Matrix> {
        match self {
            StoredModel::Pca(f) => Ok(f.model.inverse_transform(&f.model.transform(windows)?)?.into_matrix()),
            StoredModel::Spectral(m) => m.inverse_transform(&m.transform(windows)?),
        }
    }
}

fn read_series(path: &Path, column: Option<&str>, has_header: bool) -> CliResult<crate::series::TimeSeries> {
    let selector = match column {
        Some(c) => ColumnSelector::parse(c),
        None => last_column(path, has_header).map_err(runtime)?,
    };
    load_csv(path, &selector, has_header).map_err(runtime)
}

fn last_column(path: &Path, has_header: bool) -> Result<ColumnSelector> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut first = csv::StringRecord::new();
    if !r.read_record(&mut first)? || first.is_empty() {
        return Err(Error::Empty("csv file"));
    }
    Ok(if has_header {
        ColumnSelector::Name(first[first.len() - 1].trim().to_string())
    } else {
        ColumnSelector::Index(first.len() - 1)
    })
}

fn model_windows(
    model: &StoredModel,
    input: &Path,
    column: Option<&str>,
    has_header: bool,
    stride: usize,
) -> CliResult<Matrix> {
    if stride == 0 {
        return Err(usage(Error::invalid("stride must be at least 1")));
    }
    let series = read_series(input, column, has_header)?;
    let values = model.zscore().apply(&series.values);
    let windows = sliding_windows(&values, model.reducer().input_len(), stride).map_err(runtime)?;
    Ok(windows.into_matrix())
}

fn write_matrix(path: &Path, header: &[String], m: &Matrix) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(header)?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
