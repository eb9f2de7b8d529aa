//! Dense column-major matrices and the column-stochastic wrapper.
//!
//! Columns are data points: a dataset of N points in d dimensions is stored
//! as a d×N matrix, so projections and per-point solves stride over
//! contiguous columns.

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Work threshold (flops) below which matmul stays single-threaded.
const PAR_MATMUL_FLOPS: usize = 1 << 19;

/// Dense real matrix, column-major, 64-bit entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from a column-major buffer, validating length and finiteness.
    /// This is the constructor for externally sourced data.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "buffer length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "non-finite entry at row {}, column {}",
                pos % rows.max(1),
                pos / rows.max(1)
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds from point columns; all columns must share a length.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let rows = cols.first().map_or(0, |c| c.len());
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::contract("ragged column lengths"));
        }
        let mut data = Vec::with_capacity(rows * cols.len());
        for c in cols {
            data.extend_from_slice(c);
        }
        DenseMatrix::from_column_major(rows, cols.len(), data)
    }

    pub(crate) fn from_raw_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        DenseMatrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix::from_raw_unchecked(self.rows, self.cols, data)
    }

    /// New matrix made of the listed columns, in the given order.
    pub fn column_subset(&self, idx: &[usize]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, idx.len());
        for (c, &j) in idx.iter().enumerate() {
            assert!(j < self.cols);
            m.col_mut(c).copy_from_slice(self.col(j));
        }
        m
    }

    /// `self · v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &w) in v.iter().enumerate() {
            if w != 0.0 {
                axpy(w, self.col(j), &mut out);
            }
        }
        out
    }

    /// `selfᵀ · v`.
    pub fn matvec_t(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for i in 0..x.len() {
        y[i] += a * x[i];
    }
}

#[inline]
pub(crate) fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Dense product `a · b`.
///
/// Output columns are accumulated in a fixed k-ascending order, so the result
/// is bitwise independent of how columns are partitioned across workers.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::contract(format!(
            "matmul dimension mismatch: {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut c = DenseMatrix::zeros(a.rows(), b.cols());
    let flops = a.rows() * a.cols() * b.cols();
    let rows = a.rows();
    if rows == 0 || b.cols() == 0 {
        return Ok(c);
    }
    let col_job = |(cj, bj): (&mut [f64], &[f64])| {
        for (k, &w) in bj.iter().enumerate() {
            if w != 0.0 {
                axpy(w, a.col(k), cj);
            }
        }
    };
    if flops >= PAR_MATMUL_FLOPS {
        c.data
            .par_chunks_mut(rows)
            .zip(b.data.par_chunks(b.rows().max(1)))
            .for_each(col_job);
    } else {
        c.data
            .chunks_mut(rows)
            .zip(b.data.chunks(b.rows().max(1)))
            .for_each(col_job);
    }
    Ok(c)
}

/// `aᵀ · b` without materializing the transpose.
pub(crate) fn matmul_tn(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.rows(), b.rows());
    let (m, n) = (a.cols(), b.cols());
    let mut c = DenseMatrix::zeros(m, n);
    let flops = m * n * a.rows();
    let col_job = |(cj, j): (&mut [f64], usize)| {
        let bj = b.col(j);
        for (i, out) in cj.iter_mut().enumerate() {
            *out = dot(a.col(i), bj);
        }
    };
    if flops >= PAR_MATMUL_FLOPS && m > 0 {
        c.data
            .par_chunks_mut(m)
            .enumerate()
            .map(|(j, cj)| (cj, j))
            .for_each(col_job);
    } else if m > 0 {
        for j in 0..n {
            let cj = &mut c.data[j * m..(j + 1) * m];
            col_job((cj, j));
        }
    }
    c
}

/// Column-stochastic matrix: entrywise nonnegative, unit column sums.
///
/// Entries in [-tolerance, 0) are clamped to zero at construction; anything
/// more negative, or a column sum off 1 by more than the tolerance, is a
/// contract violation.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    inner: DenseMatrix,
    tolerance: f64,
}

impl StochasticMatrix {
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    pub fn new(inner: DenseMatrix) -> Result<Self> {
        StochasticMatrix::with_tolerance(inner, Self::DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(mut inner: DenseMatrix, tolerance: f64) -> Result<Self> {
        for j in 0..inner.cols() {
            let col = inner.col_mut(j);
            let mut sum = 0.0;
            for v in col.iter_mut() {
                if *v < 0.0 {
                    if *v < -tolerance {
                        return Err(Error::contract(format!(
                            "negative entry {v} in column {j} below tolerance -{tolerance}"
                        )));
                    }
                    *v = 0.0;
                }
                sum += *v;
            }
            if (sum - 1.0).abs() > tolerance {
                return Err(Error::contract(format!(
                    "column {j} sums to {sum}, expected 1 within {tolerance}"
                )));
            }
        }
        Ok(StochasticMatrix { inner, tolerance })
    }

    pub fn inner(&self) -> &DenseMatrix {
        &self.inner
    }

    pub fn into_inner(self) -> DenseMatrix {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.rows()
    }

    pub fn cols(&self) -> usize {
        self.inner.cols()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Uniform matrix with every entry 1/rows.
    pub fn uniform(rows: usize, cols: usize) -> Self {
        assert!(rows > 0);
        let data = vec![1.0 / rows as f64; rows * cols];
        StochasticMatrix {
            inner: DenseMatrix::from_raw_unchecked(rows, cols, data),
            tolerance: Self::DEFAULT_TOLERANCE,
        }
    }

    /// One-hot selection matrix: column `c` is the indicator of `indices[c]`.
    pub fn selection(rows: usize, indices: &[usize]) -> Result<Self> {
        let mut m = DenseMatrix::zeros(rows, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            if i >= rows {
                return Err(Error::contract(format!(
                    "selection index {i} out of range for {rows} rows"
                )));
            }
            m.set(i, c, 1.0);
        }
        Ok(StochasticMatrix {
            inner: m,
            tolerance: Self::DEFAULT_TOLERANCE,
        })
    }
}

/// The averaged residual norm (1/√N)·‖x − dict·a·b‖_F.
///
/// With `dict = x` this is the archetypal-analysis objective; with `dict`
/// a retained column subset it is the reduced objective.
pub fn aa_objective(
    x: &DenseMatrix,
    dict: &DenseMatrix,
    a: &StochasticMatrix,
    b: &StochasticMatrix,
) -> Result<f64> {
    if dict.cols() != a.rows() || a.cols() != b.rows() || b.cols() != x.cols() || dict.rows() != x.rows() {
        return Err(Error::contract(format!(
            "aa_objective dimension mismatch: x {}x{}, dict {}x{}, a {}x{}, b {}x{}",
            x.rows(),
            x.cols(),
            dict.rows(),
            dict.cols(),
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let za = matmul(dict, a.inner())?;
    let n = x.cols();
    if n == 0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    let mut z = vec![0.0; x.rows()];
    for j in 0..n {
        z.copy_from_slice(x.col(j));
        let bj = b.inner().col(j);
        for (k, &w) in bj.iter().enumerate() {
            if w != 0.0 {
                axpy(-w, za.col(k), &mut z);
            }
        }
        acc += dot(&z, &z);
    }
    Ok((acc / n as f64).sqrt())
}
