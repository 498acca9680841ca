use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Row-major matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.data.len() <= 64 {
            f.debug_struct("DenseMatrix")
                .field("shape", &self.shape())
                .field("data", &self.data)
                .finish()
        } else {
            write!(f, "DenseMatrix {}x{}", self.rows, self.cols)
        }
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![value],
        }
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape("from_vec", (rows, cols), (data.len(), 1)));
        }
        let m = Self { rows, cols, data };
        m.check_finite("from_vec")?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::shape("from_rows", (i, cols), (i, r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    /// Constructs without the finiteness scan. Kernels use this for results
    /// whose finiteness is checked at a coarser level.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// The single entry of a 1×1 matrix.
    pub fn item(&self) -> Option<f64> {
        (self.shape() == (1, 1)).then(|| self.data[0])
    }

    pub fn check_finite(&self, what: &str) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(pos) => Err(Error::NonFinite(format!(
                "{what}: entry ({}, {}) = {}",
                pos / self.cols.max(1),
                pos % self.cols.max(1),
                self.data[pos]
            ))),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self::from_raw(self.cols, self.rows, out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.shape(), other.shape());
        Self::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Permutes rows: output row `i` is input row `perm[i]`.
    pub fn select_rows(&self, perm: &[usize]) -> Self {
        let mut data = Vec::with_capacity(perm.len() * self.cols);
        for &p in perm {
            data.extend_from_slice(self.row(p));
        }
        Self::from_raw(perm.len(), self.cols, data)
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::shape("matmul", self.shape(), rhs.shape()));
        }
        Ok(gemm(self, false, rhs, false))
    }

    /// `self · rhsᵀ`
    pub fn matmul_nt(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.cols {
            return Err(Error::shape("matmul_nt", self.shape(), rhs.shape()));
        }
        Ok(gemm(self, false, rhs, true))
    }

    /// `selfᵀ · rhs`
    pub fn matmul_tn(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::shape("matmul_tn", self.shape(), rhs.shape()));
        }
        Ok(gemm(self, true, rhs, false))
    }
}

/// Row-block granularity for splitting a product across threads. Each output
/// entry is accumulated by the same microkernel in the same `k` order no matter
/// how rows are blocked, so the split does not change results.
const GEMM_ROW_BLOCK: usize = 64;

/// `op(a) · op(b)` where `op` optionally transposes. Shapes must already agree.
pub(crate) fn gemm(a: &DenseMatrix, ta: bool, b: &DenseMatrix, tb: bool) -> DenseMatrix {
    let (m, k) = if ta { (a.cols, a.rows) } else { (a.rows, a.cols) };
    let n = if tb { b.rows } else { b.cols };
    // (row stride, col stride) of op(a) and op(b) viewed in place
    let (rsa, csa) = if ta { (1, a.cols as isize) } else { (a.cols as isize, 1) };
    let (rsb, csb) = if tb { (1, b.cols as isize) } else { (b.cols as isize, 1) };
    let mut out = vec![0.0; m * n];
    if m == 0 || n == 0 || k == 0 {
        return DenseMatrix::from_raw(m, n, out);
    }
    let block = |row0: usize, chunk: &mut [f64]| {
        let rows = chunk.len() / n;
        // SAFETY: a and b outlive the call; the offsets and strides describe
        // in-bounds views of their buffers, and `chunk` is a distinct
        // rows×n row-major block of the output.
        unsafe {
            matrixmultiply::dgemm(
                rows,
                k,
                n,
                1.0,
                a.data.as_ptr().offset(row0 as isize * rsa),
                rsa,
                csa,
                b.data.as_ptr(),
                rsb,
                csb,
                0.0,
                chunk.as_mut_ptr(),
                n as isize,
                1,
            );
        }
    };
    let blocks = m.div_ceil(GEMM_ROW_BLOCK);
    if blocks > 1 && par::enabled() && m * n * k >= par::MIN_PARALLEL_WORK * 64 {
        par::rows_mut(&mut out, GEMM_ROW_BLOCK * n, |bi, chunk| {
            block(bi * GEMM_ROW_BLOCK, chunk)
        });
    } else {
        block(0, &mut out);
    }
    DenseMatrix::from_raw(m, n, out)
}
