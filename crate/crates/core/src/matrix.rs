//! Design matrices: dense, or compressed sparse row.
//!
//! Optimizers touch the data almost exclusively one sample at a time, so the
//! dense variant keeps samples contiguous (it stores `Aᵀ`, one column per row
//! of `A`). The sparse variant is a plain CSR triple.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Compressed sparse row matrix with strictly increasing column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn new(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if indptr.len() != nrows + 1 {
            return Err(Error::dims("csr indptr", nrows + 1, indptr.len()));
        }
        if indices.len() != values.len() {
            return Err(Error::dims("csr values", indices.len(), values.len()));
        }
        if indptr[0] != 0 || indptr[nrows] != indices.len() {
            return Err(Error::InvalidInput("csr indptr must span the index array".into()));
        }
        for r in 0..nrows {
            let (lo, hi) = (indptr[r], indptr[r + 1]);
            if lo > hi {
                return Err(Error::InvalidInput(format!("csr indptr decreases at row {r}")));
            }
            let row = &indices[lo..hi];
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!(
                    "csr column indices of row {r} are not strictly increasing"
                )));
            }
            if let Some(&last) = row.last() {
                if last >= ncols {
                    return Err(Error::IndexOutOfRange { index: last, len: ncols });
                }
            }
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// Builds a CSR matrix from per-row `(column, value)` lists. Entries are
    /// sorted; duplicate columns within a row are rejected.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let nrows = rows.len();
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self::new(nrows, ncols, indptr, indices, values)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    fn row_values_mut(&mut self, i: usize) -> &mut [T] {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        &mut self.values[lo..hi]
    }
}

/// Data matrix `A` (n samples by p features).
#[derive(Debug, Clone, PartialEq)]
pub enum DesignMatrix<T: Real> {
    /// Stored transposed: column `i` of the inner matrix is sample `i`.
    Dense(DMatrix<T>),
    Sparse(CsrMatrix<T>),
}

impl<T: Real> DesignMatrix<T> {
    /// Wraps an `n × p` dense matrix given in the usual row-per-sample layout.
    pub fn from_dense(a: &DMatrix<T>) -> Self {
        DesignMatrix::Dense(a.transpose())
    }

    /// Wraps an already transposed `p × n` matrix without copying.
    pub fn from_transposed(at: DMatrix<T>) -> Self {
        DesignMatrix::Dense(at)
    }

    pub fn nrows(&self) -> usize {
        match self {
            DesignMatrix::Dense(at) => at.ncols(),
            DesignMatrix::Sparse(csr) => csr.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            DesignMatrix::Dense(at) => at.nrows(),
            DesignMatrix::Sparse(csr) => csr.ncols(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, DesignMatrix::Sparse(_))
    }

    pub fn is_finite(&self) -> bool {
        match self {
            DesignMatrix::Dense(at) => at.iter().all(|v| v.is_finite()),
            DesignMatrix::Sparse(csr) => csr.values().iter().all(|v| v.is_finite()),
        }
    }

    /// `a_iᵀ w`.
    #[inline]
    pub fn row_dot(&self, i: usize, w: &DVector<T>) -> T {
        match self {
            DesignMatrix::Dense(at) => at.column(i).dot(w),
            DesignMatrix::Sparse(csr) => {
                let (idx, val) = csr.row(i);
                idx.iter()
                    .zip(val)
                    .fold(T::zero(), |acc, (&j, &v)| acc + v * w[j])
            }
        }
    }

    /// `out += alpha · a_i`.
    #[inline]
    pub fn add_row_to(&self, i: usize, alpha: T, out: &mut DVector<T>) {
        match self {
            DesignMatrix::Dense(at) => out.axpy(alpha, &at.column(i), T::one()),
            DesignMatrix::Sparse(csr) => {
                let (idx, val) = csr.row(i);
                for (&j, &v) in idx.iter().zip(val) {
                    out[j] += alpha * v;
                }
            }
        }
    }

    pub fn row_norm_sq(&self, i: usize) -> T {
        match self {
            DesignMatrix::Dense(at) => at.column(i).norm_squared(),
            DesignMatrix::Sparse(csr) => csr.row(i).1.iter().fold(T::zero(), |a, &v| a + v * v),
        }
    }

    /// Visits the stored entries of row `i` as `(column, value)`.
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, T)) {
        match self {
            DesignMatrix::Dense(at) => at.column(i).iter().enumerate().for_each(|(j, &v)| f(j, v)),
            DesignMatrix::Sparse(csr) => {
                let (idx, val) = csr.row(i);
                idx.iter().zip(val).for_each(|(&j, &v)| f(j, v));
            }
        }
    }

    /// Rows stacked in the order given by `rows`.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let n = self.nrows();
        if let Some(&bad) = rows.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        Ok(match self {
            DesignMatrix::Dense(at) => DesignMatrix::Dense(at.select_columns(rows)),
            DesignMatrix::Sparse(csr) => {
                let mut indptr = Vec::with_capacity(rows.len() + 1);
                let mut indices = Vec::new();
                let mut values = Vec::new();
                indptr.push(0);
                for &i in rows {
                    let (idx, val) = csr.row(i);
                    indices.extend_from_slice(idx);
                    values.extend_from_slice(val);
                    indptr.push(indices.len());
                }
                DesignMatrix::Sparse(CsrMatrix {
                    nrows: rows.len(),
                    ncols: csr.ncols(),
                    indptr,
                    indices,
                    values,
                })
            }
        })
    }

    /// Multiplies row `i` by `scales[i]` in place (sparsity pattern preserved).
    pub fn scale_rows_mut(&mut self, scales: &[T]) -> Result<()> {
        if scales.len() != self.nrows() {
            return Err(Error::dims("row scaling", self.nrows(), scales.len()));
        }
        match self {
            DesignMatrix::Dense(at) => {
                for (mut col, &s) in at.column_iter_mut().zip(scales) {
                    col *= s;
                }
            }
            DesignMatrix::Sparse(csr) => {
                for (i, &s) in scales.iter().enumerate() {
                    csr.row_values_mut(i).iter_mut().for_each(|v| *v *= s);
                }
            }
        }
        Ok(())
    }

    /// `A v` (length n).
    pub fn matvec(&self, v: &DVector<T>) -> DVector<T> {
        match self {
            DesignMatrix::Dense(at) => at.tr_mul(v),
            DesignMatrix::Sparse(_) => DVector::from_fn(self.nrows(), |i, _| self.row_dot(i, v)),
        }
    }

    /// `Aᵀ u` (length p).
    pub fn tr_matvec(&self, u: &DVector<T>) -> DVector<T> {
        match self {
            DesignMatrix::Dense(at) => at * u,
            DesignMatrix::Sparse(csr) => {
                let mut out = DVector::zeros(csr.ncols());
                for i in 0..csr.nrows() {
                    self.add_row_to(i, u[i], &mut out);
                }
                out
            }
        }
    }

    /// `A M` for a dense `p × k` matrix `M`.
    pub fn mul_dense(&self, m: &DMatrix<T>) -> DMatrix<T> {
        match self {
            DesignMatrix::Dense(at) => at.tr_mul(m),
            DesignMatrix::Sparse(csr) => {
                let mut out = DMatrix::zeros(csr.nrows(), m.ncols());
                for i in 0..csr.nrows() {
                    let (idx, val) = csr.row(i);
                    for (&j, &v) in idx.iter().zip(val) {
                        for c in 0..m.ncols() {
                            out[(i, c)] += v * m[(j, c)];
                        }
                    }
                }
                out
            }
        }
    }

    /// `Aᵀ M` for a dense `n × k` matrix `M`.
    pub fn tr_mul_dense(&self, m: &DMatrix<T>) -> DMatrix<T> {
        match self {
            DesignMatrix::Dense(at) => at * m,
            DesignMatrix::Sparse(csr) => {
                let mut out = DMatrix::zeros(csr.ncols(), m.ncols());
                for i in 0..csr.nrows() {
                    let (idx, val) = csr.row(i);
                    for (&j, &v) in idx.iter().zip(val) {
                        for c in 0..m.ncols() {
                            out[(j, c)] += v * m[(i, c)];
                        }
                    }
                }
                out
            }
        }
    }

    /// `AᵀA` (p × p).
    pub fn gram_features(&self) -> DMatrix<T> {
        match self {
            DesignMatrix::Dense(at) => at * at.transpose(),
            DesignMatrix::Sparse(csr) => {
                let p = csr.ncols();
                let mut out = DMatrix::zeros(p, p);
                for i in 0..csr.nrows() {
                    let (idx, val) = csr.row(i);
                    for (a, (&j, &vj)) in idx.iter().zip(val).enumerate() {
                        for (&k, &vk) in idx[a..].iter().zip(&val[a..]) {
                            out[(j, k)] += vj * vk;
                        }
                    }
                }
                out.fill_lower_triangle_with_upper_triangle();
                out
            }
        }
    }

    /// `AAᵀ` (n × n).
    pub fn gram_samples(&self) -> DMatrix<T> {
        match self {
            DesignMatrix::Dense(at) => at.tr_mul(at),
            DesignMatrix::Sparse(csr) => {
                let n = csr.nrows();
                let mut out = DMatrix::zeros(n, n);
                for i in 0..n {
                    for k in i..n {
                        let v = sparse_dot(csr.row(i), csr.row(k));
                        out[(i, k)] = v;
                        out[(k, i)] = v;
                    }
                }
                out
            }
        }
    }

    /// Squared Euclidean norm of every column of `A`.
    pub fn column_sq_norms(&self) -> DVector<T> {
        let mut out = DVector::zeros(self.ncols());
        for i in 0..self.nrows() {
            self.for_each_in_row(i, |j, v| out[j] += v * v);
        }
        out
    }

    /// Materializes `A` as an `n × p` dense matrix.
    pub fn to_dense(&self) -> DMatrix<T> {
        match self {
            DesignMatrix::Dense(at) => at.transpose(),
            DesignMatrix::Sparse(csr) => {
                let mut out = DMatrix::zeros(csr.nrows(), csr.ncols());
                for i in 0..csr.nrows() {
                    let (idx, val) = csr.row(i);
                    for (&j, &v) in idx.iter().zip(val) {
                        out[(i, j)] = v;
                    }
                }
                out
            }
        }
    }
}

fn sparse_dot<T: Real>(a: (&[usize], &[T]), b: (&[usize], &[T])) -> T {
    let (mut i, mut k) = (0, 0);
    let mut acc = T::zero();
    while i < a.0.len() && k < b.0.len() {
        match a.0[i].cmp(&b.0[k]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => k += 1,
            std::cmp::Ordering::Equal => {
                acc += a.1[i] * b.1[k];
                i += 1;
                k += 1;
            }
        }
    }
    acc
}
