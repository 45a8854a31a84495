//! Competing temporal reducers: keep the most recent steps, keep every
//! `stride`-th step, or keep a fixed set of FFT / Haar-DWT coefficients.
//!
//! Spectral reducers choose their coefficients once, from training-set
//! average magnitudes, so that output column `j` refers to the same
//! coefficient for every window.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::windowing::WindowMatrix;

/// Keeps the last `k` columns (the most recent time steps).
pub fn truncate_last(x: &WindowMatrix, k: usize) -> Result<WindowMatrix> {
    let len = x.window_len();
    if k == 0 || k > len {
        return Err(Error::invalid(format!("truncate: k = {k} outside 1..={len}")));
    }
    WindowMatrix::new(x.columns(len - k, len))
}

/// Keeps the last step of each block of `stride` steps: indices
/// `stride − 1, 2·stride − 1, …`, giving `L / stride` columns.
pub fn downsample(x: &WindowMatrix, stride: usize) -> Result<WindowMatrix> {
    let len = x.window_len();
    if stride == 0 || stride > len {
        return Err(Error::invalid(format!("downsample: stride {stride} outside 1..={len}")));
    }
    let idx: Vec<usize> = (1..=len / stride).map(|b| b * stride - 1).collect();
    WindowMatrix::new(x.select_columns(&idx))
}

// ---- FFT ------------------------------------------------------------------

/// In-place iterative radix-2 FFT. `buf.len()` must be a power of two.
/// The inverse is unnormalized.
fn radix2(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let step = Complex64::from_polar(1.0, sign * 2.0 * PI / size as f64);
        for start in (0..n).step_by(size) {
            let mut w = Complex64::new(1.0, 0.0);
            for j in 0..half {
                let u = buf[start + j];
                let v = buf[start + j + half] * w;
                buf[start + j] = u + v;
                buf[start + j + half] = u - v;
                w *= step;
            }
        }
        size *= 2;
    }
}

/// Discrete Fourier transform of any length; Bluestein's chirp-z
/// reformulation handles lengths that are not powers of two.
pub fn fft(input: &[Complex64]) -> Vec<Complex64> {
    transform_any(input, false)
}

/// Inverse DFT, normalized by `1/N`.
pub fn ifft(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len() as f64;
    transform_any(input, true).into_iter().map(|c| c / n).collect()
}

fn transform_any(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    if n.is_power_of_two() || n <= 1 {
        let mut buf = input.to_vec();
        radix2(&mut buf, inverse);
        return buf;
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    // w_j = exp(sign·iπ·j²/n); j² is reduced mod 2n to keep the angle exact
    let chirp: Vec<Complex64> = (0..n)
        .map(|j| {
            let jj = (j as u128 * j as u128 % (2 * n as u128)) as f64;
            Complex64::from_polar(1.0, sign * PI * jj / n as f64)
        })
        .collect();
    let m = (2 * n - 1).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n {
        a[j] = input[j] * chirp[j];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for j in 1..n {
        b[j] = chirp[j].conj();
        b[m - j] = chirp[j].conj();
    }
    radix2(&mut a, false);
    radix2(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    radix2(&mut a, true);
    let scale = 1.0 / m as f64;
    (0..n).map(|k| a[k] * scale * chirp[k]).collect()
}

/// The `L/2 + 1` non-redundant bins of a real signal's DFT.
pub fn rfft(x: &[f64]) -> Vec<Complex64> {
    let input: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut spectrum = fft(&input);
    spectrum.truncate(x.len() / 2 + 1);
    spectrum
}

/// Rebuilds a length-`len` real signal from its non-redundant bins.
pub fn irfft(bins: &[Complex64], len: usize) -> Vec<f64> {
    let mut full = vec![Complex64::new(0.0, 0.0); len];
    for (f, &c) in bins.iter().enumerate().take(len / 2 + 1) {
        full[f] = c;
        if f > 0 && f < len - f {
            full[len - f] = c.conj();
        }
    }
    ifft(&full).into_iter().map(|c| c.re).collect()
}

// ---- Haar DWT ---------------------------------------------------------------

/// One level of the orthonormal Haar transform: `(approximation, detail)`.
pub fn haar_step(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    x.chunks_exact(2)
        .map(|p| ((p[0] + p[1]) * FRAC_1_SQRT_2, (p[0] - p[1]) * FRAC_1_SQRT_2))
        .unzip()
}

/// Full-depth Haar transform of a power-of-two-length signal.
///
/// Layout: `[a, d_coarsest, d_next(2), …, d_finest(len/2)]`.
pub fn haar_forward(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!("Haar transform needs a power-of-two length, got {n}")));
    }
    let mut out = vec![0.0; n];
    let mut approx = x.to_vec();
    let mut end = n;
    while approx.len() > 1 {
        let (a, d) = haar_step(&approx);
        out[end - d.len()..end].copy_from_slice(&d);
        end -= d.len();
        approx = a;
    }
    out[0] = approx[0];
    Ok(out)
}

pub fn haar_inverse(coeffs: &[f64]) -> Result<Vec<f64>> {
    let n = coeffs.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!("Haar transform needs a power-of-two length, got {n}")));
    }
    let mut approx = vec![coeffs[0]];
    let mut start = 1;
    while approx.len() < n {
        let d = &coeffs[start..start + approx.len()];
        start += approx.len();
        approx = approx
            .iter()
            .zip(d)
            .flat_map(|(a, d)| [(a + d) * FRAC_1_SQRT_2, (a - d) * FRAC_1_SQRT_2])
            .collect();
    }
    Ok(approx)
}

/// Extends a window to `len` by repeating its last value.
pub fn pad_with_last(x: &[f64], len: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    let last = *x.last().unwrap_or(&0.0);
    out.resize(len.max(x.len()), last);
    out
}

// ---- spectral reducers ------------------------------------------------------

/// How kept FFT bins become features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FftMode {
    /// Interleaved (real, imaginary) parts: two features per bin.
    #[default]
    Complex,
    /// One magnitude per bin. Not invertible.
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SpectralKind {
    Fft { mode: FftMode },
    Dwt,
}

/// A fitted FFT or DWT coefficient selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    #[serde(flatten)]
    pub kind: SpectralKind,
    /// Kept coefficient indices, by descending mean training magnitude.
    pub selected_indices: Vec<usize>,
    pub k: usize,
    #[serde(rename = "L")]
    pub len: usize,
}

impl SpectralModel {
    pub fn output_width(&self) -> usize {
        self.k
    }

    fn padded_len(&self) -> usize {
        self.len.next_power_of_two()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.len {
            return Err(Error::invalid(format!(
                "window length {} does not match model length {}",
                x.cols(),
                self.len
            )));
        }
        let mut out = Matrix::zeros(x.rows(), self.k);
        for i in 0..x.rows() {
            let row = out.row_mut(i);
            match self.kind {
                SpectralKind::Fft { mode } => {
                    let bins = rfft(x.row(i));
                    for (j, &b) in self.selected_indices.iter().enumerate() {
                        match mode {
                            FftMode::Complex => {
                                row[2 * j] = bins[b].re;
                                row[2 * j + 1] = bins[b].im;
                            }
                            FftMode::Magnitude => row[j] = bins[b].norm(),
                        }
                    }
                }
                SpectralKind::Dwt => {
                    let c = haar_forward(&pad_with_last(x.row(i), self.padded_len()))?;
                    for (j, &p) in self.selected_indices.iter().enumerate() {
                        row[j] = c[p];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Zero-fills the coefficients that were dropped and inverts. Keeping
    /// every coefficient reproduces the input windows.
    pub fn inverse_transform(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.k {
            return Err(Error::invalid(format!(
                "feature width {} does not match k = {}",
                features.cols(),
                self.k
            )));
        }
        let mut out = Matrix::zeros(features.rows(), self.len);
        for i in 0..features.rows() {
            let f = features.row(i);
            let window = match self.kind {
                SpectralKind::Fft { mode: FftMode::Magnitude } => {
                    return Err(Error::invalid("magnitude features cannot be inverted"))
                }
                SpectralKind::Fft { mode: FftMode::Complex } => {
                    let mut bins = vec![Complex64::new(0.0, 0.0); self.len / 2 + 1];
                    for (j, &b) in self.selected_indices.iter().enumerate() {
                        bins[b] = Complex64::new(f[2 * j], f[2 * j + 1]);
                    }
                    irfft(&bins, self.len)
                }
                SpectralKind::Dwt => {
                    let mut c = vec![0.0; self.padded_len()];
                    for (j, &p) in self.selected_indices.iter().enumerate() {
                        c[p] = f[j];
                    }
                    let mut w = haar_inverse(&c)?;
                    w.truncate(self.len);
                    w
                }
            };
            out.row_mut(i).copy_from_slice(&window);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct File<'a> {
            schema_version: u32,
            #[serde(flatten)]
            model: &'a SpectralModel,
        }
        Ok(serde_json::to_string_pretty(&File {
            schema_version: crate::pca::SCHEMA_VERSION,
            model: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            schema_version: u32,
            #[serde(flatten)]
            model: SpectralModel,
        }
        let file: File = serde_json::from_str(text)?;
        if file.schema_version != crate::pca::SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: file.schema_version,
                expected: crate::pca::SCHEMA_VERSION,
            });
        }
        let m = file.model;
        let (positions, per_index) = match m.kind {
            SpectralKind::Fft { mode: FftMode::Complex } => (m.len / 2 + 1, 2),
            SpectralKind::Fft { mode: FftMode::Magnitude } => (m.len / 2 + 1, 1),
            SpectralKind::Dwt => (m.len.next_power_of_two(), 1),
        };
        let mut seen = vec![false; positions];
        for &i in &m.selected_indices {
            if i >= positions || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Invariant(format!("bad or repeated coefficient index {i}")));
            }
        }
        if m.selected_indices.len() * per_index != m.k {
            return Err(Error::Invariant(format!(
                "{} indices do not give width k = {}",
                m.selected_indices.len(),
                m.k
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SpectralModel::from_json(&text).map_err(|e| e.context(path.display().to_string()))
    }
}

/// Indices of the `count` largest scores; ties go to the lower index.
fn top_indices(scores: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx.truncate(count);
    idx
}

pub fn fft_fit(train: &WindowMatrix, k: usize) -> Result<SpectralModel> {
    fft_fit_with_mode(train, k, FftMode::Complex)
}

pub fn fft_fit_with_mode(train: &WindowMatrix, k: usize, mode: FftMode) -> Result<SpectralModel> {
    let len = train.window_len();
    if k == 0 || k > len {
        return Err(Error::invalid(format!("fft: k = {k} outside 1..={len}")));
    }
    let bins = len / 2 + 1;
    let keep = match mode {
        FftMode::Complex => {
            if !k.is_multiple_of(2) {
                return Err(Error::invalid(format!(
                    "fft: k = {k} must be even (one real and one imaginary part per bin)"
                )));
            }
            k / 2
        }
        FftMode::Magnitude => k.min(bins),
    };
    if keep > bins {
        return Err(Error::invalid(format!("fft: only {bins} bins available")));
    }
    let mut amplitude = vec![0.0; bins];
    for row in train.row_iter() {
        for (a, c) in amplitude.iter_mut().zip(rfft(row)) {
            *a += c.norm();
        }
    }
    let n = train.count() as f64;
    amplitude.iter_mut().for_each(|a| *a /= n);
    let selected_indices = top_indices(&amplitude, keep);
    let width = match mode {
        FftMode::Complex => 2 * keep,
        FftMode::Magnitude => keep,
    };
    Ok(SpectralModel {
        kind: SpectralKind::Fft { mode },
        selected_indices,
        k: width,
        len,
    })
}

pub fn fft_transform(model: &SpectralModel, x: &Matrix) -> Result<Matrix> {
    model.transform(x)
}

pub fn dwt_fit(train: &WindowMatrix, k: usize) -> Result<SpectralModel> {
    let len = train.window_len();
    let padded = len.next_power_of_two();
    if k == 0 || k > padded {
        return Err(Error::invalid(format!("dwt: k = {k} outside 1..={padded}")));
    }
    let mut magnitude = vec![0.0; padded];
    for row in train.row_iter() {
        for (m, c) in magnitude.iter_mut().zip(haar_forward(&pad_with_last(row, padded))?) {
            *m += c.abs();
        }
    }
    let n = train.count() as f64;
    magnitude.iter_mut().for_each(|m| *m /= n);
    Ok(SpectralModel {
        kind: SpectralKind::Dwt,
        selected_indices: top_indices(&magnitude, k),
        k,
        len,
    })
}

pub fn dwt_transform(model: &SpectralModel, x: &Matrix) -> Result<Matrix> {
    model.transform(x)
}
