use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::par;

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets. Duplicate coordinates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; rows + 1];
        for &(i, j, _) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::shape("from_triplets", (rows, cols), (i, j)));
            }
            counts[i + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            entries[next[i]] = (j, v);
            next[i] += 1;
        }

        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        for i in 0..rows {
            let row = &mut entries[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(j, _)| j);
            for &(j, v) in row.iter() {
                if indices.len() > *indptr.last().unwrap() && *indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
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

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, vals) = self.row(i);
        idx.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (idx, vals) = self.row(i);
            idx.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, &triplets).expect("transpose stays in bounds")
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && self.iter().all(|(i, j, v)| (self.get(j, i) - v).abs() <= tol)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            d.set(i, j, v);
        }
        d
    }

    /// Scales entry (i, j) by `left[i] * right[j]`.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for p in out.indptr[i]..out.indptr[i + 1] {
                out.values[p] *= left[i] * right[out.indices[p]];
            }
        }
        out
    }

    /// Sparse × dense product.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows() {
            return Err(Error::shape("sparse_matmul", self.shape(), rhs.shape()));
        }
        let n = rhs.cols();
        let mut out = DenseMatrix::zeros(self.rows, n);
        let avg_row = self.nnz() / self.rows.max(1) + 1;
        if n == 0 {
            return Ok(out);
        }
        let work_per_row = avg_row * n;
        let body = |i: usize, dst: &mut [f64]| {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                for (d, &s) in dst.iter_mut().zip(rhs.row(j)) {
                    *d += v * s;
                }
            }
        };
        if work_per_row * self.rows >= par::MIN_PARALLEL_WORK {
            par::rows_mut(out.as_mut_slice(), n, body);
        } else {
            out.as_mut_slice()
                .chunks_mut(n)
                .enumerate()
                .for_each(|(i, r)| body(i, r));
        }
        Ok(out)
    }

    /// `Σ_ij M_ij · (X Yᵀ)_ij` without forming `X Yᵀ`.
    pub fn weighted_inner(&self, x: &DenseMatrix, y: &DenseMatrix) -> f64 {
        self.iter()
            .map(|(i, j, v)| v * x.row(i).iter().zip(y.row(j)).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 0.5), (1, 1, 4.0)])
            .unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.row(0).0, &[0, 2]);
        assert_eq!(m.get(0, 2), 1.5);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn matmul_matches_dense() {
        let m = CsrMatrix::from_triplets(3, 3, &[(0, 1, 1.0), (1, 0, 1.0), (2, 2, 3.0), (1, 2, -2.0)])
            .unwrap();
        let x = DenseMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64);
        let got = m.matmul(&x).unwrap();
        let want = m.to_dense().matmul(&x).unwrap();
        assert_eq!(got, want);
        assert!(m.matmul(&DenseMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn transpose_twice_is_identity() {
        let m = CsrMatrix::from_triplets(2, 4, &[(0, 3, 1.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose().get(3, 0), 1.0);
    }
}
