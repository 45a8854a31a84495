//! Lightweight downstream predictors.
//!
//! Forecasting and extrinsic regression use closed-form ridge regression;
//! classification uses nearest centroids or a small multinomial logistic
//! model. All of them are deterministic.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram, matmul, matmul_tn, sym_eig, Matrix};

pub const DEFAULT_LAMBDA: f64 = 1e-3;

/// Normal-equation eigenvalues below this fraction of the largest are
/// treated as zero.
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

pub const LOGISTIC_ITERATIONS: usize = 500;
pub const LOGISTIC_STEP: f64 = 0.1;
pub const LOGISTIC_L2: f64 = 1e-4;

/// Multi-output linear model `x·W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub lambda: f64,
}

/// Fits `W` minimizing `‖Xc·W − Yc‖² + λ‖W‖²` on mean-centered data; the
/// intercept is not penalized.
///
/// The system `(XcᵀXc + λI)·W = XcᵀYc` is solved through the
/// eigendecomposition of its left-hand side.
pub fn ridge_fit(x: &Matrix, y: &Matrix, lambda: f64) -> Result<RidgeModel> {
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch {
            op: "ridge_fit",
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: y.rows(),
            right_cols: y.cols(),
        });
    }
    if x.rows() == 0 || x.cols() == 0 || y.cols() == 0 {
        return Err(Error::Empty("ridge_fit"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("ridge lambda must be finite and >= 0, got {lambda}")));
    }
    let x_mean = x.column_means();
    let y_mean = y.column_means();
    let xc = x.sub_row_vector(&x_mean);
    let yc = y.sub_row_vector(&y_mean);

    let mut normal = gram(&xc, 1.0)?;
    for i in 0..normal.rows() {
        normal[(i, i)] += lambda;
    }
    let eig = sym_eig(&normal)?;
    let top = eig.eigenvalues[0];
    let bottom = *eig.eigenvalues.last().unwrap();
    if top <= 0.0 || bottom <= SINGULARITY_TOLERANCE * top {
        return Err(Error::Singular(format!(
            "normal equations are rank deficient (eigenvalues {top:e} .. {bottom:e}); use lambda > 0"
        )));
    }
    let rhs = matmul_tn(&xc, &yc)?;
    let mut z = matmul_tn(&eig.eigenvectors, &rhs)?;
    for (i, mu) in eig.eigenvalues.iter().enumerate() {
        z.row_mut(i).iter_mut().for_each(|v| *v /= mu);
    }
    let weights = matmul(&eig.eigenvectors, &z)?;

    let shift = matmul(&Matrix::from_raw(1, x_mean.len(), x_mean), &weights)?;
    let bias = y_mean.iter().zip(shift.row(0)).map(|(m, s)| m - s).collect();
    Ok(RidgeModel {
        weights,
        bias,
        lambda,
    })
}

pub fn ridge_predict(model: &RidgeModel, x: &Matrix) -> Result<Matrix> {
    model.predict(x)
}

impl RidgeModel {
    pub fn input_width(&self) -> usize {
        self.weights.rows()
    }

    pub fn output_width(&self) -> usize {
        self.weights.cols()
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_width() {
            return Err(Error::DimensionMismatch {
                op: "ridge_predict",
                left_rows: x.rows(),
                left_cols: x.cols(),
                right_rows: self.weights.rows(),
                right_cols: self.weights.cols(),
            });
        }
        let mut out = matmul(x, &self.weights)?;
        for i in 0..out.rows() {
            out.row_mut(i).iter_mut().zip(&self.bias).for_each(|(v, b)| *v += b);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&RidgeJson {
            schema_version: crate::pca::SCHEMA_VERSION,
            d_in: self.input_width(),
            d_out: self.output_width(),
            lambda: self.lambda,
            weights: self.weights.data().to_vec(),
            bias: self.bias.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: RidgeJson = serde_json::from_str(text)?;
        check_schema(j.schema_version)?;
        if j.bias.len() != j.d_out {
            return Err(Error::Invariant(format!("bias has {} entries, expected {}", j.bias.len(), j.d_out)));
        }
        if !j.lambda.is_finite() || j.bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("non-finite parameter".into()));
        }
        let weights = Matrix::from_vec(j.d_in, j.d_out, j.weights).map_err(|e| Error::Invariant(e.to_string()))?;
        Ok(RidgeModel {
            weights,
            bias: j.bias,
            lambda: j.lambda,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_json()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        RidgeModel::from_json(&read_file(path)?).map_err(|e| e.context(path.display().to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RidgeJson {
    schema_version: u32,
    d_in: usize,
    d_out: usize,
    lambda: f64,
    /// Row-major `d_in × d_out`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

fn check_schema(found: u32) -> Result<()> {
    if found != crate::pca::SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found,
            expected: crate::pca::SCHEMA_VERSION,
        });
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    #[default]
    NearestCentroid,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ClassifierParams {
    NearestCentroid {
        /// One mean vector per class id; `None` for ids absent at fit time.
        centroids: Vec<Option<Vec<f64>>>,
    },
    Logistic {
        /// Per-feature standardization applied before the linear layer.
        feature_mean: Vec<f64>,
        feature_scale: Vec<f64>,
        /// `d_in × num_classes`, row-major.
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub num_classes: usize,
    pub input_width: usize,
    pub params: ClassifierParams,
}

pub fn classify_fit(x: &Matrix, labels: &[usize], kind: ClassifierKind) -> Result<ClassifierModel> {
    classify_fit_traced(x, labels, kind).map(|(m, _)| m)
}

/// Like [`classify_fit`], also returning the per-iteration training loss of
/// the logistic model (empty for nearest centroids).
pub fn classify_fit_traced(x: &Matrix, labels: &[usize], kind: ClassifierKind) -> Result<(ClassifierModel, Vec<f64>)> {
    if x.rows() != labels.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.rows(), labels.len())));
    }
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Empty("classify_fit"));
    }
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; num_classes];
    for &l in labels {
        counts[l] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::invalid("classifier needs at least two classes in the training set"));
    }
    let d = x.cols();
    let (params, trace) = match kind {
        ClassifierKind::NearestCentroid => {
            let mut sums = vec![vec![0.0; d]; num_classes];
            for (row, &l) in x.row_iter().zip(labels) {
                sums[l].iter_mut().zip(row).for_each(|(s, v)| *s += v);
            }
            let centroids = sums
                .into_iter()
                .zip(&counts)
                .map(|(s, &c)| (c > 0).then(|| s.into_iter().map(|v| v / c as f64).collect()))
                .collect();
            (ClassifierParams::NearestCentroid { centroids }, Vec::new())
        }
        ClassifierKind::Logistic => fit_logistic(x, labels, num_classes),
    };
    Ok((
        ClassifierModel {
            num_classes,
            input_width: d,
            params,
        },
        trace,
    ))
}

struct Logistic<'a> {
    xs: &'a Matrix,
    onehot: &'a Matrix,
    classes: usize,
}

impl Logistic<'_> {
    fn probabilities(&self, w: &[f64], b: &[f64]) -> Matrix {
        let c = self.classes;
        let mut p = matmul(self.xs, &Matrix::from_raw(self.xs.cols(), c, w.to_vec())).unwrap();
        for i in 0..p.rows() {
            let row = p.row_mut(i);
            row.iter_mut().zip(b).for_each(|(v, bb)| *v += bb);
            softmax(row);
        }
        p
    }

    fn loss(&self, w: &[f64], b: &[f64]) -> f64 {
        let p = self.probabilities(w, b);
        let n = self.xs.rows() as f64;
        let ce: f64 = p
            .data()
            .iter()
            .zip(self.onehot.data())
            .filter(|(_, &y)| y > 0.0)
            .map(|(&pi, _)| -pi.max(1e-300).ln())
            .sum::<f64>()
            / n;
        ce + 0.5 * LOGISTIC_L2 * w.iter().map(|v| v * v).sum::<f64>()
    }
}

fn softmax(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    row.iter_mut().for_each(|v| *v /= sum);
}

/// Full-batch gradient descent from zero weights. A step that would raise
/// the loss is halved until it does not, and the smaller step is kept for
/// the remaining iterations, which makes the loss sequence non-increasing.
fn fit_logistic(x: &Matrix, labels: &[usize], classes: usize) -> (ClassifierParams, Vec<f64>) {
    let (n, d) = x.shape();
    let feature_mean = x.column_means();
    let mut feature_scale = vec![0.0; d];
    for row in x.row_iter() {
        for ((s, v), m) in feature_scale.iter_mut().zip(row).zip(&feature_mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in feature_scale.iter_mut() {
        let sd = (*s / n as f64).sqrt();
        *s = if sd > 1e-12 { sd } else { 1.0 };
    }
    let xs = standardize(x, &feature_mean, &feature_scale);
    let mut onehot = Matrix::zeros(n, classes);
    for (i, &l) in labels.iter().enumerate() {
        onehot[(i, l)] = 1.0;
    }
    let problem = Logistic {
        xs: &xs,
        onehot: &onehot,
        classes,
    };

    let mut w = vec![0.0; d * classes];
    let mut b = vec![0.0; classes];
    let mut step = LOGISTIC_STEP;
    let mut loss = problem.loss(&w, &b);
    let mut trace = vec![loss];
    for _ in 0..LOGISTIC_ITERATIONS {
        let p = problem.probabilities(&w, &b);
        let mut resid = p;
        for (r, y) in resid.data_mut().iter_mut().zip(onehot.data()) {
            *r = (*r - y) / n as f64;
        }
        let gw = matmul_tn(&xs, &resid).unwrap();
        let gb: Vec<f64> = (0..classes).map(|c| resid.column(c).iter().sum()).collect();
        let grad_w: Vec<f64> = gw.data().iter().zip(&w).map(|(g, wi)| g + LOGISTIC_L2 * wi).collect();
        loop {
            let nw: Vec<f64> = w.iter().zip(&grad_w).map(|(wi, g)| wi - step * g).collect();
            let nb: Vec<f64> = b.iter().zip(&gb).map(|(bi, g)| bi - step * g).collect();
            let nl = problem.loss(&nw, &nb);
            if nl <= loss || step < 1e-12 {
                if nl <= loss {
                    w = nw;
                    b = nb;
                    loss = nl;
                }
                break;
            }
            step *= 0.5;
        }
        trace.push(loss);
    }
    (
        ClassifierParams::Logistic {
            feature_mean,
            feature_scale,
            weights: w,
            bias: b,
        },
        trace,
    )
}

fn standardize(x: &Matrix, mean: &[f64], scale: &[f64]) -> Matrix {
    let mut out = x.sub_row_vector(mean);
    for i in 0..out.rows() {
        out.row_mut(i).iter_mut().zip(scale).for_each(|(v, s)| *v /= s);
    }
    out
}

impl ClassifierModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        if x.cols() != self.input_width {
            return Err(Error::invalid(format!(
                "feature width {} does not match classifier width {}",
                x.cols(),
                self.input_width
            )));
        }
        match &self.params {
            ClassifierParams::NearestCentroid { centroids } => Ok(x
                .row_iter()
                .map(|row| {
                    let mut best = (f64::INFINITY, 0);
                    for (c, centroid) in centroids.iter().enumerate() {
                        let Some(centroid) = centroid else { continue };
                        let d: f64 = row.iter().zip(centroid).map(|(a, b)| (a - b).powi(2)).sum();
                        // strict comparison keeps the lowest id on ties
                        if d < best.0 {
                            best = (d, c);
                        }
                    }
                    best.1
                })
                .collect()),
            ClassifierParams::Logistic {
                feature_mean,
                feature_scale,
                weights,
                bias,
            } => {
                let xs = standardize(x, feature_mean, feature_scale);
                let w = Matrix::from_raw(self.input_width, self.num_classes, weights.clone());
                let scores = matmul(&xs, &w)?;
                Ok(scores
                    .row_iter()
                    .map(|row| {
                        let mut best = (f64::NEG_INFINITY, 0);
                        for (c, (s, b)) in row.iter().zip(bias).enumerate() {
                            if s + b > best.0 {
                                best = (s + b, c);
                            }
                        }
                        best.1
                    })
                    .collect())
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct File<'a> {
            schema_version: u32,
            #[serde(flatten)]
            model: &'a ClassifierModel,
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
            model: ClassifierModel,
        }
        let f: File = serde_json::from_str(text)?;
        check_schema(f.schema_version)?;
        let m = f.model;
        if m.num_classes < 2 {
            return Err(Error::Invariant("classifier needs at least two classes".into()));
        }
        let ok = match &m.params {
            ClassifierParams::NearestCentroid { centroids } => {
                centroids.len() == m.num_classes
                    && centroids.iter().flatten().all(|c| c.len() == m.input_width)
            }
            ClassifierParams::Logistic {
                feature_mean,
                feature_scale,
                weights,
                bias,
            } => {
                feature_mean.len() == m.input_width
                    && feature_scale.len() == m.input_width
                    && weights.len() == m.input_width * m.num_classes
                    && bias.len() == m.num_classes
            }
        };
        if !ok {
            return Err(Error::Invariant("classifier parameter shapes are inconsistent".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_json()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        ClassifierModel::from_json(&read_file(path)?).map_err(|e| e.context(path.display().to_string()))
    }
}

pub fn classify_predict(model: &ClassifierModel, x: &Matrix) -> Result<Vec<usize>> {
    model.predict(x)
}
