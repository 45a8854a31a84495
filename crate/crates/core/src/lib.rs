//! Temporal-dimension reduction for time series.
//!
//! Each historical window of length `L` is treated as a point in `R^L`, PCA is
//! fitted on the training windows only, and the top-`k` scores replace the raw
//! window as the input to a downstream model. Baseline reducers (truncation,
//! downsampling, FFT and Haar-DWT coefficient selection) share the same
//! fit/transform contract so they can be compared inside one benchmark harness.
//!
//! ```
//! use tsreduce::pca::PcaModel;
//! use tsreduce::windowing::make_forecast_windows;
//!
//! let series: Vec<f64> = (0..400).map(|t| (t as f64 / 10.0).sin()).collect();
//! let (windows, _targets) = make_forecast_windows(&series, 64, 8, 1).unwrap();
//! let model = PcaModel::fit(&windows, 4).unwrap();
//! let scores = model.transform(&windows).unwrap();
//! assert_eq!(scores.cols(), 4);
//! assert!(model.explained_variance_ratio(2).unwrap() > 0.99);
//! ```

pub mod baselines;
pub mod bench;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod pca;
pub mod reducer;
pub mod series;
pub mod windowing;

pub use error::{Error, Result};
pub use linalg::Matrix;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/pca.md")]
    pub mod pca {}
    #[doc = include_str!("../../../book/src/eigensolver.md")]
    pub mod eigensolver {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    pub mod baselines {}
    #[doc = include_str!("../../../book/src/forecasting.md")]
    pub mod forecasting {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    pub mod benchmarks {}
}
