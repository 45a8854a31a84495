//! Dense row-major matrices and the symmetric eigensolver that PCA is built on.
//!
//! Everything here works in `f64`. The eigensolver is a cyclic Jacobi
//! iteration: slow compared with tridiagonal QR for large matrices, but the
//! window lengths this crate deals with stay in the low thousands and Jacobi
//! gives eigenvectors that are orthonormal to machine precision.

use std::fmt;
use std::ops::{Index, IndexMut};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of full Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Sweeps stop once the off-diagonal Frobenius norm falls below this
/// fraction of the input's Frobenius norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Inputs to [`sym_eig`] may deviate from symmetry by at most this much,
/// relative to their Frobenius norm.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// A dense, row-major matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Stacks equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Ragged {
                    index: i,
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    /// Internal constructor for data produced by arithmetic on already
    /// validated matrices.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Copies columns `start..end`.
    pub fn columns(&self, start: usize, end: usize) -> Matrix {
        assert!(start <= end && end <= self.cols, "column range out of bounds");
        let width = end - start;
        let mut data = Vec::with_capacity(self.rows * width);
        for r in self.row_iter() {
            data.extend_from_slice(&r[start..end]);
        }
        Matrix::from_raw(self.rows, width, data)
    }

    /// Copies the listed columns, in the order given.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for r in self.row_iter() {
            data.extend(idx.iter().map(|&j| r[j]));
        }
        Matrix::from_raw(self.rows, idx.len(), data)
    }

    /// Copies the listed rows, in the order given.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.cols * idx.len());
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix::from_raw(idx.len(), self.cols, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.cols];
        for r in self.row_iter() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        let n = self.rows.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Returns a copy with `offset` subtracted from every row.
    pub fn sub_row_vector(&self, offset: &[f64]) -> Matrix {
        assert_eq!(offset.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for (v, o) in out.row_mut(i).iter_mut().zip(offset) {
                *v -= o;
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix::from_raw(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in self.row_iter() {
            writeln!(f, "  {r:?}")?;
        }
        write!(f, "]")
    }
}

/// Result of a symmetric eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    /// Eigenvalues, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the unit eigenvector for `eigenvalues[j]`.
    pub eigenvectors: Matrix,
}

/// Standard matrix product `a * b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(mismatch("matmul", a, b));
    }
    let (n, m) = (a.rows, b.cols);
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        let acc = &mut out[i * m..(i + 1) * m];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            for (o, &bkj) in acc.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    Ok(Matrix::from_raw(n, m, out))
}

/// `aᵀ · b` without materializing the transpose.
pub fn matmul_tn(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(mismatch("matmul_tn", a, b));
    }
    let (n, m) = (a.cols, b.cols);
    let mut out = vec![0.0; n * m];
    for (ar, br) in a.row_iter().zip(b.row_iter()) {
        for (i, &ai) in ar.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for (o, &bj) in out[i * m..(i + 1) * m].iter_mut().zip(br) {
                *o += ai * bj;
            }
        }
    }
    Ok(Matrix::from_raw(n, m, out))
}

/// `scale · aᵀa`, exactly symmetric.
pub fn gram(a: &Matrix, scale: f64) -> Result<Matrix> {
    if a.is_empty() {
        return Err(Error::Empty("gram"));
    }
    let d = a.cols;
    let mut g = vec![0.0; d * d];
    // accumulate the upper triangle one outer product at a time
    for r in a.row_iter() {
        for i in 0..d {
            let ri = r[i];
            if ri == 0.0 {
                continue;
            }
            let dst = &mut g[i * d + i..(i + 1) * d];
            for (o, &rj) in dst.iter_mut().zip(&r[i..]) {
                *o += ri * rj;
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = g[i * d + j] * scale;
            g[i * d + j] = v;
            g[j * d + i] = v;
        }
    }
    Ok(Matrix::from_raw(d, d, g))
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back in non-increasing order (ties keep their diagonal
/// order) and each eigenvector is signed so that its largest-magnitude entry
/// is positive.
pub fn sym_eig(a: &Matrix) -> Result<SymEig> {
    if a.rows != a.cols {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    if n == 0 {
        return Err(Error::Empty("sym_eig"));
    }
    if !a.is_finite() {
        let pos = a.data.iter().position(|v| !v.is_finite()).unwrap_or(0);
        return Err(Error::NonFinite {
            row: pos / n,
            col: pos % n,
        });
    }

    let norm = a.frobenius_norm();
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOLERANCE * norm {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }

    let mut w = a.clone();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (w[(i, j)] + w[(j, i)]);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    // rows of `vt` are the eigenvectors, so each rotation touches two
    // contiguous rows
    let mut vt = Matrix::identity(n);

    if norm > 0.0 {
        let target = JACOBI_TOLERANCE * norm;
        let mut sweep = 0;
        loop {
            let off = off_diagonal_norm(&w);
            if off <= target {
                break;
            }
            if sweep == MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    sweeps: MAX_SWEEPS,
                    residual: off,
                });
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut w, &mut vt, p, q, sweep);
                }
            }
            sweep += 1;
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable: equal eigenvalues keep diagonal order
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let mut eigenvectors = Matrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(diag[src]);
        let v = vt.row(src);
        let sign = sign_of_largest(v);
        for (r, &x) in v.iter().enumerate() {
            eigenvectors[(r, col)] = sign * x;
        }
    }
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(w: &Matrix) -> f64 {
    let n = w.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += w[(i, j)] * w[(i, j)];
        }
    }
    (2.0 * s).sqrt()
}

/// One Jacobi rotation annihilating `w[p][q]`.
fn rotate(w: &mut Matrix, vt: &mut Matrix, p: usize, q: usize, sweep: usize) {
    let n = w.rows;
    let apq = w[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = w[(p, p)];
    let aqq = w[(q, q)];
    // once the iteration has settled, entries below the diagonal's rounding
    // level are dropped outright
    let g = 100.0 * apq.abs();
    if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
        w[(p, q)] = 0.0;
        w[(q, p)] = 0.0;
        return;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    w[(p, p)] = app - t * apq;
    w[(q, q)] = aqq + t * apq;
    w[(p, q)] = 0.0;
    w[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = w[(r, p)];
        let arq = w[(r, q)];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        w[(r, p)] = new_rp;
        w[(p, r)] = new_rp;
        w[(r, q)] = new_rq;
        w[(q, r)] = new_rq;
    }
    let (lo, hi) = vt.data.split_at_mut(q * n);
    let vp = &mut lo[p * n..(p + 1) * n];
    let vq = &mut hi[..n];
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = xp - s * (xq + tau * xp);
        *y = xq + s * (xp - tau * xq);
    }
}

/// +1 or -1 so that the first largest-magnitude entry becomes positive.
fn sign_of_largest(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

/// Orthonormalizes the columns of `m` by twice-iterated modified
/// Gram-Schmidt. Columns that turn out to be linearly dependent on their
/// predecessors are replaced by unit vectors completing the basis.
///
/// Requires `m.cols() <= m.rows()`.
pub fn orthonormalize_columns(m: &Matrix) -> Result<Matrix> {
    let (rows, cols) = m.shape();
    if cols > rows {
        return Err(Error::invalid(format!(
            "cannot fit {cols} orthonormal columns in dimension {rows}"
        )));
    }
    let t = m.transpose();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut next_unit = 0;
    for j in 0..cols {
        let mut v = t.row(j).to_vec();
        let original = norm2(&v);
        project_out(&mut v, &basis);
        let mut nv = norm2(&v);
        if nv <= 1e-10 * original || nv == 0.0 {
            // dependent column: take the first unit vector that still has a
            // component outside the current span
            loop {
                let mut e = vec![0.0; rows];
                e[next_unit] = 1.0;
                next_unit += 1;
                project_out(&mut e, &basis);
                let ne = norm2(&e);
                if ne > 0.5 {
                    v = e;
                    nv = ne;
                    break;
                }
            }
        }
        v.iter_mut().for_each(|x| *x /= nv);
        basis.push(v);
    }
    let mut out = Matrix::zeros(rows, cols);
    for (j, b) in basis.iter().enumerate() {
        for (i, &x) in b.iter().enumerate() {
            out[(i, j)] = x;
        }
    }
    Ok(out)
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let d = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis for the dominant column space of `a`, built from a
/// seeded Gaussian sketch refined by `power_iters` subspace iterations.
///
/// Returns an `a.rows() × (k + oversample)` matrix with orthonormal columns.
/// The same seed always produces the same basis, bit for bit.
pub fn randomized_range(
    a: &Matrix,
    k: usize,
    oversample: usize,
    power_iters: usize,
    seed: u64,
) -> Result<Matrix> {
    let width = k + oversample;
    if k == 0 {
        return Err(Error::invalid("randomized_range: k must be at least 1"));
    }
    if width > a.cols {
        return Err(Error::invalid(format!(
            "randomized_range: k + oversample = {width} exceeds {} columns",
            a.cols
        )));
    }
    if width > a.rows {
        return Err(Error::invalid(format!(
            "randomized_range: k + oversample = {width} exceeds {} rows",
            a.rows
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega: Vec<f64> = (0..a.cols * width)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let omega = Matrix::from_raw(a.cols, width, omega);
    let mut q = orthonormalize_columns(&matmul(a, &omega)?)?;
    for _ in 0..power_iters {
        let z = orthonormalize_columns(&matmul_tn(a, &q)?)?;
        q = orthonormalize_columns(&matmul(a, &z)?)?;
    }
    Ok(q)
}

fn mismatch(op: &'static str, a: &Matrix, b: &Matrix) -> Error {
    Error::DimensionMismatch {
        op,
        left_rows: a.rows,
        left_cols: a.cols,
        right_rows: b.rows,
        right_cols: b.cols,
    }
}
