//! PCA over the time axis of historical windows.
//!
//! Every time step of a window is a feature. Fitting centers the training
//! windows column by column, forms the sample covariance
//! `C = Xcᵀ·Xc / (n − 1)`, and keeps the leading `k` unit eigenvectors of `C`
//! as the columns of `V_k`. A window `x` then reduces to `(x − μ)·V_k`.
//!
//! A model is fitted once, on the training split, and applied unchanged to
//! everything else.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, gram, matmul, matmul_tn, orthonormalize_columns, randomized_range, Matrix};
use crate::series::ZScoreParams;
use crate::windowing::WindowMatrix;

/// Version written to and required from model files.
pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_OVERSAMPLE: usize = 8;
pub const DEFAULT_POWER_ITERS: usize = 2;

/// Components must be orthonormal to this tolerance, both after fitting and
/// when read back from disk.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-7;

/// A fitted PCA reducer.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    eigenvalues: Vec<f64>,
    components: Matrix,
}

impl PcaModel {
    /// Exact fit through the covariance eigendecomposition.
    pub fn fit(train: &WindowMatrix, k: usize) -> Result<Self> {
        let (n, len) = train.shape();
        check_fit_args(n, len, k)?;
        let mean = train.column_means();
        let centered = train.sub_row_vector(&mean);
        let cov = gram(&centered, 1.0 / (n as f64 - 1.0))?;
        let eig = linalg::sym_eig(&cov)?;
        let eigenvalues = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        Ok(PcaModel {
            mean,
            eigenvalues,
            components: eig.eigenvectors.columns(0, k),
        })
    }

    /// Approximate fit through a randomized range finder.
    ///
    /// The centered data is sketched onto `k + oversample` directions, the
    /// small projected problem is solved exactly, and its top `k` right
    /// singular vectors become the components. Eigenvalues beyond the sketch
    /// width are not estimated individually; they share the remaining
    /// variance `trace(C) − Σ estimated` evenly, capped at the smallest
    /// estimate, so explained-variance ratios stay meaningful.
    pub fn fit_randomized(
        train: &WindowMatrix,
        k: usize,
        oversample: usize,
        power_iters: usize,
        seed: u64,
    ) -> Result<Self> {
        let (n, len) = train.shape();
        check_fit_args(n, len, k)?;
        let width = k + oversample;
        if width > len {
            return Err(Error::invalid(format!(
                "k + oversample = {width} exceeds window length {len}"
            )));
        }
        let mean = train.column_means();
        let centered = train.sub_row_vector(&mean);
        let q = randomized_range(&centered, k, oversample, power_iters, seed)?;
        // b = qᵀ·Xc is width × L; its row space carries the components
        let b = matmul_tn(&q, &centered)?;
        let small = gram(&b.transpose(), 1.0)?;
        let eig = linalg::sym_eig(&small)?;

        let top = eig.eigenvalues[0].max(0.0);
        let mut vectors = Matrix::zeros(len, width);
        for j in 0..width {
            let mu = eig.eigenvalues[j];
            if mu <= 1e-12 * top || mu <= 0.0 {
                // left as zeros; orthonormalize_columns completes the basis
                continue;
            }
            let u = eig.eigenvectors.column(j);
            let scale = 1.0 / mu.sqrt();
            for t in 0..len {
                let v: f64 = (0..width).map(|i| b[(i, t)] * u[i]).sum();
                vectors[(t, j)] = v * scale;
            }
        }
        let mut vectors = orthonormalize_columns(&vectors)?;
        for j in 0..width {
            let col = vectors.column(j);
            let sign = col
                .iter()
                .fold((0.0f64, 1.0), |(best, s), &x| {
                    if x.abs() > best {
                        (x.abs(), x.signum())
                    } else {
                        (best, s)
                    }
                })
                .1;
            if sign < 0.0 {
                for t in 0..len {
                    vectors[(t, j)] = -vectors[(t, j)];
                }
            }
        }

        let denom = n as f64 - 1.0;
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().map(|&m| m.max(0.0) / denom).collect();
        if width < len {
            let total = centered.data().iter().map(|v| v * v).sum::<f64>() / denom;
            let captured: f64 = eigenvalues.iter().sum();
            let floor = *eigenvalues.last().unwrap();
            let rest = ((total - captured) / (len - width) as f64).clamp(0.0, floor);
            eigenvalues.resize(len, rest);
        }
        Ok(PcaModel {
            mean,
            eigenvalues,
            components: vectors.columns(0, k),
        })
    }

    /// Builds a model from parts, checking every invariant a fitted model has.
    pub fn from_parts(mean: Vec<f64>, eigenvalues: Vec<f64>, components: Matrix) -> Result<Self> {
        let len = mean.len();
        let k = components.cols();
        if len == 0 {
            return Err(Error::Invariant("window length is zero".into()));
        }
        if k == 0 || k > len {
            return Err(Error::Invariant(format!("k = {k} outside 1..={len}")));
        }
        if eigenvalues.len() != len || components.rows() != len {
            return Err(Error::Invariant(format!(
                "expected {len} eigenvalues and {len} component rows, got {} and {}",
                eigenvalues.len(),
                components.rows()
            )));
        }
        if mean.iter().chain(&eigenvalues).any(|v| !v.is_finite()) || !components.is_finite() {
            return Err(Error::Invariant("non-finite parameter".into()));
        }
        if eigenvalues.iter().any(|&l| l < 0.0) {
            return Err(Error::Invariant("negative eigenvalue".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invariant("eigenvalues not in descending order".into()));
        }
        let vtv = matmul_tn(&components, &components)?;
        for i in 0..k {
            for j in 0..k {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (vtv[(i, j)] - expect).abs() > ORTHONORMALITY_TOLERANCE {
                    return Err(Error::Invariant("components are not orthonormal".into()));
                }
            }
        }
        Ok(PcaModel {
            mean,
            eigenvalues,
            components,
        })
    }

    /// Window length `L`.
    pub fn window_len(&self) -> usize {
        self.mean.len()
    }

    /// Number of retained components.
    pub fn k(&self) -> usize {
        self.components.cols()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// All `L` covariance eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `L × k`, one principal direction per column.
    pub fn components(&self) -> &Matrix {
        &self.components
    }

    /// Scores `(x − μ)·V_k`, one row per window.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.window_len() {
            return Err(Error::invalid(format!(
                "window length {} does not match model length {}",
                x.cols(),
                self.window_len()
            )));
        }
        matmul(&x.sub_row_vector(&self.mean), &self.components)
    }

    /// Maps scores back to window space: `scores·V_kᵀ + μ`.
    ///
    /// With `k < L` this is the rank-`k` reconstruction, which drops the
    /// low-variance directions and so acts as a smoother.
    pub fn inverse_transform(&self, scores: &Matrix) -> Result<WindowMatrix> {
        if scores.cols() != self.k() {
            return Err(Error::invalid(format!(
                "score width {} does not match k = {}",
                scores.cols(),
                self.k()
            )));
        }
        let mut x = matmul(scores, &self.components.transpose())?;
        for i in 0..x.rows() {
            for (v, m) in x.row_mut(i).iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        WindowMatrix::new(x)
    }

    /// Share of total variance carried by the first `upto` eigenvalues.
    /// A model fitted on constant data reports 1.0.
    pub fn explained_variance_ratio(&self, upto: usize) -> Result<f64> {
        let len = self.window_len();
        if upto == 0 || upto > len {
            return Err(Error::invalid(format!("upto = {upto} outside 1..={len}")));
        }
        let total: f64 = self.eigenvalues.iter().sum();
        if total <= 0.0 {
            return Ok(1.0);
        }
        let head: f64 = self.eigenvalues[..upto].iter().sum();
        Ok((head / total).min(1.0))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        PcaFile::new(self.clone()).save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(PcaFile::load(path)?.model)
    }
}

fn check_fit_args(n: usize, len: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("PCA needs at least 2 training windows, got {n}")));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > len {
        return Err(Error::invalid(format!("k exceeds window length ({k} > {len})")));
    }
    Ok(())
}

pub fn save_model(model: &PcaModel, path: impl AsRef<Path>) -> Result<()> {
    model.save(path)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PcaModel> {
    PcaModel::load(path)
}

/// On-disk form of a PCA model: the model plus, optionally, the z-score
/// parameters that were applied to the series before windowing.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaFile {
    pub model: PcaModel,
    pub zscore: Option<ZScoreParams>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PcaJson {
    schema_version: u32,
    #[serde(rename = "L")]
    len: usize,
    k: usize,
    mean: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// Row-major `L × k`.
    components: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zscore: Option<ZScoreParams>,
}

impl PcaFile {
    pub fn new(model: PcaModel) -> Self {
        PcaFile { model, zscore: None }
    }

    pub fn to_json(&self) -> Result<String> {
        let m = &self.model;
        let json = PcaJson {
            schema_version: SCHEMA_VERSION,
            len: m.window_len(),
            k: m.k(),
            mean: m.mean.clone(),
            eigenvalues: m.eigenvalues.clone(),
            components: m.components.data().to_vec(),
            zscore: self.zscore,
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: PcaJson = serde_json::from_str(text)?;
        if json.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: json.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        if json.k > json.len {
            return Err(Error::Invariant(format!("k = {} exceeds L = {}", json.k, json.len)));
        }
        if json.components.len() != json.len * json.k {
            return Err(Error::Invariant(format!(
                "components hold {} values, expected L·k = {}",
                json.components.len(),
                json.len * json.k
            )));
        }
        if json.mean.len() != json.len {
            return Err(Error::Invariant(format!(
                "mean has {} entries, expected L = {}",
                json.mean.len(),
                json.len
            )));
        }
        let components = Matrix::from_vec(json.len, json.k, json.components)
            .map_err(|e| Error::Invariant(e.to_string()))?;
        let model = PcaModel::from_parts(json.mean, json.eigenvalues, components)?;
        Ok(PcaFile {
            model,
            zscore: json.zscore,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PcaFile::from_json(&text).map_err(|e| e.context(path.display().to_string()))
    }
}

/// Whether every patch position shares one basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchBasis {
    /// One model fitted on the pooled patches of every position.
    #[default]
    Shared,
    /// A separate model per patch position.
    PerPosition,
}

/// PCA applied patch by patch: each window is cut into contiguous patches of
/// `patch_len` steps, each patch is reduced to `k` scores, and the scores are
/// concatenated.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchPcaModel {
    patch_len: usize,
    patches_per_window: usize,
    basis: PatchBasis,
    models: Vec<PcaModel>,
}

impl PatchPcaModel {
    pub fn fit(train: &WindowMatrix, patch_len: usize, k_per_patch: usize, basis: PatchBasis) -> Result<Self> {
        let len = train.window_len();
        if patch_len == 0 || !len.is_multiple_of(patch_len) {
            return Err(Error::invalid(format!(
                "window length {len} is not divisible by patch length {patch_len}"
            )));
        }
        if k_per_patch == 0 || k_per_patch > patch_len {
            return Err(Error::invalid(format!(
                "k = {k_per_patch} outside 1..={patch_len}"
            )));
        }
        let patches = len / patch_len;
        let n = train.count();
        let models = match basis {
            PatchBasis::Shared => {
                // row i·patches + p holds patch p of window i
                let pooled = Matrix::from_raw(n * patches, patch_len, train.data().to_vec());
                vec![PcaModel::fit(&WindowMatrix::new(pooled)?, k_per_patch)?]
            }
            PatchBasis::PerPosition => (0..patches)
                .map(|p| {
                    let cols = train.columns(p * patch_len, (p + 1) * patch_len);
                    PcaModel::fit(&WindowMatrix::new(cols)?, k_per_patch)
                })
                .collect::<Result<_>>()?,
        };
        Ok(PatchPcaModel {
            patch_len,
            patches_per_window: patches,
            basis,
            models,
        })
    }

    pub fn patch_len(&self) -> usize {
        self.patch_len
    }

    pub fn patches_per_window(&self) -> usize {
        self.patches_per_window
    }

    pub fn window_len(&self) -> usize {
        self.patch_len * self.patches_per_window
    }

    pub fn k_per_patch(&self) -> usize {
        self.models[0].k()
    }

    pub fn basis(&self) -> PatchBasis {
        self.basis
    }

    pub fn output_width(&self) -> usize {
        self.patches_per_window * self.k_per_patch()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.window_len() {
            return Err(Error::invalid(format!(
                "window length {} does not match model length {}",
                x.cols(),
                self.window_len()
            )));
        }
        let k = self.k_per_patch();
        let mut out = Matrix::zeros(x.rows(), self.output_width());
        for p in 0..self.patches_per_window {
            let model = match self.basis {
                PatchBasis::Shared => &self.models[0],
                PatchBasis::PerPosition => &self.models[p],
            };
            let scores = model.transform(&x.columns(p * self.patch_len, (p + 1) * self.patch_len))?;
            for i in 0..x.rows() {
                out.row_mut(i)[p * k..(p + 1) * k].copy_from_slice(scores.row(i));
            }
        }
        Ok(out)
    }
}

pub fn patch_fit(train: &WindowMatrix, patch_len: usize, k_per_patch: usize) -> Result<PatchPcaModel> {
    PatchPcaModel::fit(train, patch_len, k_per_patch, PatchBasis::Shared)
}

pub fn patch_transform(model: &PatchPcaModel, x: &Matrix) -> Result<Matrix> {
    model.transform(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn windows(rows: &[&[f64]]) -> WindowMatrix {
        WindowMatrix::from_rows(rows).unwrap()
    }

    fn random_windows(n: usize, len: usize, seed: u64) -> WindowMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // correlated columns so the spectrum is not flat
        let data: Vec<f64> = (0..n)
            .flat_map(|_| {
                let a: f64 = rng.random_range(-2.0..2.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                (0..len)
                    .map(|t| a * (t as f64 * 0.3).sin() + b * t as f64 / len as f64 + rng.random_range(-0.5..0.5))
                    .collect::<Vec<_>>()
            })
            .collect();
        WindowMatrix::new(Matrix::from_vec(n, len, data).unwrap()).unwrap()
    }

    #[test]
    fn fit_on_diagonal_points() {
        let x = windows(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        let m = PcaModel::fit(&x, 1).unwrap();
        assert_eq!(m.mean(), &[1.0, 1.0]);
        assert!((m.eigenvalues()[0] - 2.0).abs() < 1e-12);
        assert!(m.eigenvalues()[1].abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.components()[(0, 0)] - h).abs() < 1e-12);
        assert!((m.components()[(1, 0)] - h).abs() < 1e-12);

        let s = m.transform(&Matrix::from_rows(&[[2.0, 2.0]]).unwrap()).unwrap();
        assert!((s[(0, 0)] - 2f64.sqrt()).abs() < 1e-12);
        let back = m.inverse_transform(&Matrix::from_rows(&[[2f64.sqrt()]]).unwrap()).unwrap();
        assert!((back[(0, 0)] - 2.0).abs() < 1e-12 && (back[(0, 1)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_windows_have_no_variance() {
        let x = windows(&[&[3.0, 1.0, 2.0], &[3.0, 1.0, 2.0], &[3.0, 1.0, 2.0]]);
        for k in 1..=3 {
            let m = PcaModel::fit(&x, k).unwrap();
            assert!(m.eigenvalues().iter().all(|&l| l == 0.0));
            assert!(m.transform(&x).unwrap().data().iter().all(|&v| v == 0.0));
            assert_eq!(m.explained_variance_ratio(1).unwrap(), 1.0);
        }
    }

    #[test]
    fn fit_argument_errors() {
        let x = random_windows(5, 4, 0);
        assert!(PcaModel::fit(&x, 0).is_err());
        assert!(PcaModel::fit(&x, 5).unwrap_err().to_string().contains("exceeds window length"));
        assert!(PcaModel::fit(&windows(&[&[1.0, 2.0]]), 1).is_err());
    }

    #[test]
    fn transform_identities() {
        let x = random_windows(30, 6, 1);
        let m = PcaModel::fit(&x, 3).unwrap();
        let mu = Matrix::from_rows(&[m.mean().to_vec()]).unwrap();
        assert!(m.transform(&mu).unwrap().data().iter().all(|v| v.abs() < 1e-12));

        let (a, b) = (x.row(0), x.row(1));
        let combo: Vec<f64> = (0..6).map(|t| a[t] + b[t] - m.mean()[t]).collect();
        let s = m.transform(&Matrix::from_rows(&[combo, a.to_vec(), b.to_vec()]).unwrap()).unwrap();
        for j in 0..3 {
            assert!((s[(0, j)] - s[(1, j)] - s[(2, j)]).abs() < 1e-10);
        }
        assert!(m.transform(&Matrix::zeros(1, 5)).is_err());
        assert!(m.inverse_transform(&Matrix::zeros(1, 2)).is_err());

        let zeros = m.inverse_transform(&Matrix::zeros(1, 3)).unwrap();
        assert_eq!(zeros.row(0), m.mean());
    }

    #[test]
    fn full_rank_round_trip() {
        let x = random_windows(40, 8, 2);
        let m = PcaModel::fit(&x, 8).unwrap();
        let back = m.inverse_transform(&m.transform(&x).unwrap()).unwrap();
        for (a, b) in back.data().iter().zip(x.data()) {
            assert!((a - b).abs() <= 1e-8);
        }
        // window means survive the round trip
        for i in 0..x.count() {
            let ma: f64 = back.row(i).iter().sum::<f64>() / 8.0;
            let mb: f64 = x.row(i).iter().sum::<f64>() / 8.0;
            assert!((ma - mb).abs() < 1e-10);
        }
    }

    #[test]
    fn explained_variance_examples() {
        let x = windows(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        let m = PcaModel::fit(&x, 1).unwrap();
        assert!((m.explained_variance_ratio(1).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.explained_variance_ratio(0).is_err());
        assert!(m.explained_variance_ratio(3).is_err());

        // two orthogonal directions of equal variance
        let y = windows(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]);
        let m = PcaModel::fit(&y, 2).unwrap();
        assert!((m.explained_variance_ratio(1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn forty_eight_components_from_336() {
        let x = random_windows(400, 336, 3);
        let m = PcaModel::fit(&x, 48).unwrap();
        assert_eq!(m.k(), 48);
        assert_eq!(m.components().shape(), (336, 48));
        assert_eq!(m.eigenvalues().len(), 336);
    }

    #[test]
    fn randomized_matches_exact_on_rank_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let len = 20;
        let basis: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..len).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| {
                let c: Vec<f64> = (0..3).map(|i| rng.random_range(-3.0..3.0) * (3 - i) as f64).collect();
                (0..len).map(|t| (0..3).map(|i| c[i] * basis[i][t]).sum()).collect()
            })
            .collect();
        let x = WindowMatrix::from_rows(&rows).unwrap();
        let exact = PcaModel::fit(&x, 3).unwrap();
        let approx = PcaModel::fit_randomized(&x, 3, 2, 1, 11).unwrap();
        for i in 0..3 {
            let (a, b) = (approx.eigenvalues()[i], exact.eigenvalues()[i]);
            assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
            let d = linalg::dot(&approx.components().column(i), &exact.components().column(i));
            assert!((d.abs() - 1.0).abs() < 1e-6);
        }
        let again = PcaModel::fit_randomized(&x, 3, 2, 1, 11).unwrap();
        assert_eq!(approx, again);
    }

    #[test]
    fn randomized_within_one_percent_on_fast_decay() {
        // spectrum decaying like i^-3
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let len = 64;
        let normal = Normal::new(0.0, 1.0).unwrap();
        let q = orthonormalize_columns(&Matrix::from_vec(
            len,
            len,
            (0..len * len).map(|_| normal.sample(&mut rng)).collect(),
        ).unwrap())
        .unwrap();
        let rows: Vec<Vec<f64>> = (0..500)
            .map(|_| {
                let z: Vec<f64> = (0..len)
                    .map(|i| normal.sample(&mut rng) * ((i + 1) as f64).powf(-1.5))
                    .collect();
                (0..len).map(|t| (0..len).map(|i| q[(t, i)] * z[i]).sum()).collect()
            })
            .collect();
        let x = WindowMatrix::from_rows(&rows).unwrap();
        let exact = PcaModel::fit(&x, 8).unwrap();
        let approx = PcaModel::fit_randomized(&x, 8, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS, 1).unwrap();
        for i in 0..8 {
            let (a, b) = (approx.eigenvalues()[i], exact.eigenvalues()[i]);
            assert!((a - b).abs() <= 0.01 * b, "component {i}: {a} vs {b}");
        }
        let total_a: f64 = approx.eigenvalues().iter().sum();
        let total_b: f64 = exact.eigenvalues().iter().sum();
        assert!((total_a - total_b).abs() <= 0.01 * total_b);
    }

    #[test]
    fn randomized_default_path() {
        let x = random_windows(200, 336, 6);
        let m = PcaModel::fit_randomized(&x, 48, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS, 0).unwrap();
        assert_eq!(m.k(), 48);
        PcaModel::from_parts(m.mean().to_vec(), m.eigenvalues().to_vec(), m.components().clone()).unwrap();
        assert!(PcaModel::fit_randomized(&x, 330, 8, 1, 0).is_err());
    }

    #[test]
    fn patch_shapes_and_degeneracy() {
        let x = random_windows(20, 336, 7);
        let m = patch_fit(&x, 16, 2).unwrap();
        assert_eq!(m.patches_per_window(), 21);
        assert_eq!(patch_transform(&m, &x).unwrap().cols(), 42);

        let y = random_windows(25, 32, 8);
        let whole = patch_fit(&y, 32, 3).unwrap();
        let plain = PcaModel::fit(&y, 3).unwrap();
        let (a, b) = (whole.transform(&y).unwrap(), plain.transform(&y).unwrap());
        for (u, v) in a.data().iter().zip(b.data()) {
            assert!((u - v).abs() <= 1e-9);
        }

        let per = PatchPcaModel::fit(&y, 8, 2, PatchBasis::PerPosition).unwrap();
        assert_eq!(per.transform(&y).unwrap().cols(), 8);

        assert!(patch_fit(&y, 5, 2).is_err());
        assert!(patch_fit(&y, 8, 9).is_err());
    }

    #[test]
    fn patch_constant_windows_score_zero() {
        let c = WindowMatrix::new(Matrix::from_vec(4, 32, vec![2.5; 128]).unwrap()).unwrap();
        let m = patch_fit(&c, 16, 2).unwrap();
        assert!(m.transform(&c).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn model_file_round_trip_and_guards() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let m = PcaModel::fit(&random_windows(50, 12, 9), 5).unwrap();
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.components().data().iter().zip(m.components().data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path).unwrap_err().root(), Error::Json(_)));

        let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
        json["k"] = 13.into();
        std::fs::write(&path, json.to_string()).unwrap();
        assert!(matches!(load_model(&path).unwrap_err().root(), Error::Invariant(_)));

        json["k"] = 5.into();
        json["schema_version"] = 9.into();
        std::fs::write(&path, json.to_string()).unwrap();
        assert!(matches!(load_model(&path).unwrap_err().root(), Error::SchemaVersion { found: 9, .. }));
    }

    #[test]
    fn reconstruction_smooths_noisy_sinusoids() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let series: Vec<f64> = (0..2000)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 32.0).sin() + noise.sample(&mut rng))
            .collect();
        let x = crate::windowing::sliding_windows(&series, 64, 1).unwrap();
        let m = PcaModel::fit(&x, 8).unwrap();
        let recon = m.inverse_transform(&m.transform(&x).unwrap()).unwrap();
        let roughness = |w: &[f64]| {
            w.windows(3).map(|s| (s[2] - 2.0 * s[1] + s[0]).powi(2)).sum::<f64>() / (w.len() - 2) as f64
        };
        let smoother = (0..x.count())
            .filter(|&i| roughness(recon.row(i)) < roughness(x.row(i)))
            .count();
        assert!(smoother as f64 >= 0.95 * x.count() as f64, "{smoother} of {}", x.count());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn reconstruction_error_and_decorrelation(n in 3usize..120, len in 1usize..24, seed in any::<u64>()) {
            let x = random_windows(n, len, seed);
            let full = PcaModel::fit(&x, len).unwrap();
            let total: f64 = full.eigenvalues().iter().sum();
            let centered = x.sub_row_vector(full.mean());
            for k in 1..=len {
                let m = PcaModel::fit(&x, k).unwrap();
                let s = m.transform(&x).unwrap();
                let approx = matmul(&s, &m.components().transpose()).unwrap();
                let err: f64 = centered.data().iter().zip(approx.data()).map(|(a, b)| (a - b).powi(2)).sum();
                let expect = (n as f64 - 1.0) * m.eigenvalues()[k..].iter().sum::<f64>();
                prop_assert!((err - expect).abs() <= 1e-6 * (n as f64 - 1.0) * total.max(f64::MIN_POSITIVE));

                let cov = gram(&s, 1.0 / (n as f64 - 1.0)).unwrap();
                for i in 0..k {
                    for j in 0..k {
                        let e = if i == j { m.eigenvalues()[i] } else { 0.0 };
                        prop_assert!((cov[(i, j)] - e).abs() <= 1e-6 * (1.0 + total));
                    }
                }
            }
            let mut prev = 0.0;
            for upto in 1..=len {
                let r = full.explained_variance_ratio(upto).unwrap();
                prop_assert!(r + 1e-15 >= prev);
                prev = r;
            }
            prop_assert!((prev - 1.0).abs() < 1e-12);
        }
    }
}
