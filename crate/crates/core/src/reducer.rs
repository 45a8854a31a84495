//! One fit/transform contract for every temporal reducer.

use serde::{Deserialize, Serialize};

use crate::baselines::{self, FftMode, SpectralModel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pca::{PatchBasis, PatchPcaModel, PcaModel, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS};
use crate::windowing::WindowMatrix;

/// A fitted map from length-`L` windows to `output_width()` features.
pub trait Reducer: Send + Sync {
    fn input_len(&self) -> usize;
    fn output_width(&self) -> usize;
    fn transform(&self, x: &Matrix) -> Result<Matrix>;
}

impl Reducer for PcaModel {
    fn input_len(&self) -> usize {
        self.window_len()
    }
    fn output_width(&self) -> usize {
        self.k()
    }
    fn transform(&self, x: &Matrix) -> Result<Matrix> {
        PcaModel::transform(self, x)
    }
}

impl Reducer for PatchPcaModel {
    fn input_len(&self) -> usize {
        self.window_len()
    }
    fn output_width(&self) -> usize {
        PatchPcaModel::output_width(self)
    }
    fn transform(&self, x: &Matrix) -> Result<Matrix> {
        PatchPcaModel::transform(self, x)
    }
}

impl Reducer for SpectralModel {
    fn input_len(&self) -> usize {
        self.len
    }
    fn output_width(&self) -> usize {
        self.k
    }
    fn transform(&self, x: &Matrix) -> Result<Matrix> {
        SpectralModel::transform(self, x)
    }
}

/// Reducer configuration, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ReducerSpec {
    /// Full-window baseline.
    None,
    Pca {
        k: usize,
    },
    PcaRand {
        k: usize,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_oversample")]
        oversample: usize,
        #[serde(default = "default_power_iters")]
        power_iters: usize,
    },
    PatchPca {
        patch_len: usize,
        k: usize,
        #[serde(default)]
        basis: PatchBasis,
    },
    Truncate {
        k: usize,
    },
    Downsample {
        stride: usize,
    },
    Fft {
        k: usize,
        #[serde(default)]
        mode: FftMode,
    },
    Dwt {
        k: usize,
    },
}

fn default_oversample() -> usize {
    DEFAULT_OVERSAMPLE
}

fn default_power_iters() -> usize {
    DEFAULT_POWER_ITERS
}

impl ReducerSpec {
    /// Short name used in reports, e.g. `pca48` or `downsample7`.
    pub fn label(&self) -> String {
        match self {
            ReducerSpec::None => "none".into(),
            ReducerSpec::Pca { k } => format!("pca{k}"),
            ReducerSpec::PcaRand { k, .. } => format!("pca_rand{k}"),
            ReducerSpec::PatchPca { patch_len, k, basis } => match basis {
                PatchBasis::Shared => format!("patch_pca{patch_len}x{k}"),
                PatchBasis::PerPosition => format!("patch_pca_pos{patch_len}x{k}"),
            },
            ReducerSpec::Truncate { k } => format!("truncate{k}"),
            ReducerSpec::Downsample { stride } => format!("downsample{stride}"),
            ReducerSpec::Fft { k, mode } => match mode {
                FftMode::Complex => format!("fft{k}"),
                FftMode::Magnitude => format!("fft_mag{k}"),
            },
            ReducerSpec::Dwt { k } => format!("dwt{k}"),
        }
    }

    /// The reducer's `k` parameter, where it has one.
    pub fn k(&self) -> Option<usize> {
        match self {
            ReducerSpec::None | ReducerSpec::Downsample { .. } => None,
            ReducerSpec::Pca { k }
            | ReducerSpec::PcaRand { k, .. }
            | ReducerSpec::PatchPca { k, .. }
            | ReducerSpec::Truncate { k }
            | ReducerSpec::Fft { k, .. }
            | ReducerSpec::Dwt { k } => Some(*k),
        }
    }

    /// Output width for windows of length `len`, or an error when the
    /// parameters do not fit that length.
    pub fn output_width(&self, len: usize) -> Result<usize> {
        let in_range = |k: usize, what: &str| {
            if k == 0 {
                Err(Error::invalid(format!("{}: {what} must be at least 1", self.label())))
            } else if k > len {
                Err(Error::invalid(format!("{}: {what} exceeds window length ({k} > {len})", self.label())))
            } else {
                Ok(k)
            }
        };
        match *self {
            ReducerSpec::None => Ok(len),
            ReducerSpec::Pca { k } | ReducerSpec::Truncate { k } | ReducerSpec::Dwt { k } => in_range(k, "k"),
            ReducerSpec::PcaRand { k, oversample, .. } => {
                in_range(k + oversample, "k + oversample")?;
                Ok(k)
            }
            ReducerSpec::PatchPca { patch_len, k, .. } => {
                if patch_len == 0 || !len.is_multiple_of(patch_len) {
                    return Err(Error::invalid(format!(
                        "{}: window length {len} is not divisible by patch length {patch_len}",
                        self.label()
                    )));
                }
                if k == 0 || k > patch_len {
                    return Err(Error::invalid(format!("{}: k exceeds patch length", self.label())));
                }
                Ok(len / patch_len * k)
            }
            ReducerSpec::Downsample { stride } => {
                in_range(stride, "stride")?;
                Ok(len / stride)
            }
            ReducerSpec::Fft { k, mode } => {
                in_range(k, "k")?;
                match mode {
                    FftMode::Complex if !k.is_multiple_of(2) => {
                        Err(Error::invalid(format!("{}: k must be even", self.label())))
                    }
                    FftMode::Magnitude => Ok(k.min(len / 2 + 1)),
                    FftMode::Complex => Ok(k),
                }
            }
        }
    }

    /// Fits on training windows. `seed` is used by randomized PCA when the
    /// spec does not carry its own.
    pub fn fit(&self, train: &WindowMatrix, seed: u64) -> Result<FittedReducer> {
        let len = train.window_len();
        self.output_width(len)?;
        Ok(match *self {
            ReducerSpec::None => FittedReducer::Identity { len },
            ReducerSpec::Pca { k } => FittedReducer::Pca(PcaModel::fit(train, k)?),
            ReducerSpec::PcaRand {
                k,
                seed: own,
                oversample,
                power_iters,
            } => FittedReducer::Pca(PcaModel::fit_randomized(
                train,
                k,
                oversample,
                power_iters,
                own.unwrap_or(seed),
            )?),
            ReducerSpec::PatchPca { patch_len, k, basis } => {
                FittedReducer::PatchPca(PatchPcaModel::fit(train, patch_len, k, basis)?)
            }
            ReducerSpec::Truncate { k } => FittedReducer::Truncate { k, len },
            ReducerSpec::Downsample { stride } => FittedReducer::Downsample { stride, len },
            ReducerSpec::Fft { k, mode } => {
                FittedReducer::Spectral(baselines::fft_fit_with_mode(train, k, mode)?)
            }
            ReducerSpec::Dwt { k } => FittedReducer::Spectral(baselines::dwt_fit(train, k)?),
        })
    }
}

/// A reducer fitted on training windows.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedReducer {
    Identity { len: usize },
    Pca(PcaModel),
    PatchPca(PatchPcaModel),
    Truncate { k: usize, len: usize },
    Downsample { stride: usize, len: usize },
    Spectral(SpectralModel),
}

impl Reducer for FittedReducer {
    fn input_len(&self) -> usize {
        match self {
            FittedReducer::Identity { len }
            | FittedReducer::Truncate { len, .. }
            | FittedReducer::Downsample { len, .. } => *len,
            FittedReducer::Pca(m) => m.window_len(),
            FittedReducer::PatchPca(m) => m.window_len(),
            FittedReducer::Spectral(m) => m.len,
        }
    }

    fn output_width(&self) -> usize {
        match self {
            FittedReducer::Identity { len } => *len,
            FittedReducer::Truncate { k, .. } => *k,
            FittedReducer::Downsample { stride, len } => len / stride,
            FittedReducer::Pca(m) => m.k(),
            FittedReducer::PatchPca(m) => m.output_width(),
            FittedReducer::Spectral(m) => m.k,
        }
    }

    fn transform(&self, x: &Matrix) -> Result<Matrix> {
        let len = self.input_len();
        if x.cols() != len {
            return Err(Error::invalid(format!(
                "window length {} does not match reducer length {len}",
                x.cols()
            )));
        }
        match self {
            FittedReducer::Identity { .. } => Ok(x.clone()),
            FittedReducer::Truncate { k, len } => Ok(x.columns(len - k, *len)),
            FittedReducer::Downsample { stride, len } => {
                let idx: Vec<usize> = (1..=len / stride).map(|b| b * stride - 1).collect();
                Ok(x.select_columns(&idx))
            }
            FittedReducer::Pca(m) => m.transform(x),
            FittedReducer::PatchPca(m) => m.transform(x),
            FittedReducer::Spectral(m) => m.transform(x),
        }
    }
}
