//! Complex sparse (CSR) and dense kernels.
//!
//! The CSR type stores every assembled operator (K, M, M_σ, A and the
//! prolongations). Dense LU with partial pivoting realizes the coarse-level
//! solves, including the conjugate-transpose mode needed for adjoints of
//! two-level operators. The dense Hermitian eigensolver is the oracle used
//! by the Lanczos and FOV tests; it is backed by nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinAlgError {
    #[error("matrix is singular to working precision (pivot {pivot} at step {step})")]
    Singular { step: usize, pivot: f64 },
    #[error("matrix is not Hermitian: max |A - A*| = {asymmetry}")]
    NotHermitian { asymmetry: f64 },
}

/// Compressed-sparse-row matrix with complex entries.
///
/// Column indices are strictly increasing within each row; duplicate
/// triplets are summed at construction.
#[derive(Debug, Clone)]
pub struct SparseComplexMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseComplexMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed in push
    /// order so that symmetric assembly stays exactly symmetric.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, C64)]) -> Self {
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i},{j}) out of bounds");
        }
        // Counting sort by row keeps the per-entry summation order equal to
        // the push order, which the assembly relies on for exact symmetry.
        let mut counts = vec![0usize; nrows + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut by_row: Vec<(usize, C64)> = vec![(0, C64::new(0.0, 0.0)); triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            by_row[next[i]] = (j, v);
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..nrows {
            let seg = &by_row[counts[i]..counts[i + 1]];
            order.clear();
            order.extend(0..seg.len());
            order.sort_by_key(|&p| (seg[p].0, p));
            let mut k = 0;
            while k < order.len() {
                let col = seg[order[k]].0;
                let mut sum = C64::new(0.0, 0.0);
                while k < order.len() && seg[order[k]].0 == col {
                    sum += seg[order[k]].1;
                    k += 1;
                }
                col_idx.push(col);
                values.push(sum);
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
        Self::from_triplets(n, n, &triplets)
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

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(p) => self.values[lo + p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Iterate stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.col_idx[p], self.values[p]))
        })
    }

    /// y = A x
    pub fn spmv(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols, "spmv: dimension mismatch");
        assert_eq!(y.len(), self.nrows, "spmv: dimension mismatch");
        for i in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            y[i] = acc;
        }
    }

    /// y = A* x  (conjugate transpose product)
    pub fn spmv_conj_transpose(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.nrows, "spmv_conj_transpose: dimension mismatch");
        assert_eq!(y.len(), self.ncols, "spmv_conj_transpose: dimension mismatch");
        y.fill(C64::new(0.0, 0.0));
        for i in 0..self.nrows {
            let xi = x[i];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[p]] += self.values[p].conj() * xi;
            }
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.spmv(x, &mut y);
        y
    }

    pub fn mul_vec_conj_transpose(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.ncols];
        self.spmv_conj_transpose(x, &mut y);
        y
    }

    /// Plain (unconjugated) transpose.
    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &triplets)
    }

    /// C = self · other
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul: dimension mismatch");
        let mut acc = vec![C64::new(0.0, 0.0); other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut cols_here: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.nrows {
            cols_here.clear();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let k = self.col_idx[p];
                let v = self.values[p];
                for q in other.row_ptr[k]..other.row_ptr[k + 1] {
                    let j = other.col_idx[q];
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = C64::new(0.0, 0.0);
                        cols_here.push(j);
                    }
                    acc[j] += v * other.values[q];
                }
            }
            cols_here.sort_unstable();
            for &j in &cols_here {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows: self.nrows, ncols: other.ncols, row_ptr, col_idx, values }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            *d.get_mut(i, j) += v;
        }
        d
    }

    /// Largest entry magnitude difference against another matrix, over the
    /// union of both sparsity patterns.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut worst = 0.0f64;
        for (i, j, v) in self.iter() {
            worst = worst.max((v - other.get(i, j)).norm());
        }
        for (i, j, v) in other.iter() {
            worst = worst.max((v - self.get(i, j)).norm());
        }
        worst
    }
}

/// Dense row-major complex matrix. Only used for coarse problems and
/// small-instance oracles.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![C64::new(0.0, 0.0); nrows * ncols] }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                *m.get_mut(i, j) = f(i, j);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.ncols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.data[i * self.ncols + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "dense mul: dimension mismatch");
        (0..self.nrows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_vec_conj_transpose(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.nrows, "dense mul: dimension mismatch");
        let mut y = vec![C64::new(0.0, 0.0); self.ncols];
        for i in 0..self.nrows {
            let xi = x[i];
            for (j, a) in self.row(i).iter().enumerate() {
                y[j] += a.conj() * xi;
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.nrows, self.ncols, |i, j| self.get(i, j))
    }
}

/// LU factors of a dense complex square matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    /// Combined L (unit lower, below diagonal) and U (upper) factors of PA.
    lu: DenseMatrix,
    /// perm[i] = original row index placed at position i of PA.
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &DenseMatrix) -> Result<Self, LinAlgError> {
        Self::factor_owned(a.clone())
    }

    /// Factor in place, consuming the matrix storage.
    pub fn factor_owned(a: DenseMatrix) -> Result<Self, LinAlgError> {
        assert_eq!(a.nrows(), a.ncols(), "lu_factor: matrix must be square");
        let n = a.nrows();
        let mut lu = a;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.max_abs();
        let tiny = scale * f64::EPSILON * (n.max(1) as f64);
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_mag = lu.get(k, k).norm();
            for i in k + 1..n {
                let mag = lu.get(i, k).norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = i;
                }
            }
            if pivot_mag <= tiny {
                return Err(LinAlgError::Singular { step: k, pivot: pivot_mag });
            }
            if pivot_row != k {
                perm.swap(k, pivot_row);
                for j in 0..n {
                    let t = lu.get(k, j);
                    *lu.get_mut(k, j) = lu.get(pivot_row, j);
                    *lu.get_mut(pivot_row, j) = t;
                }
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let l = lu.get(i, k) / pivot;
                *lu.get_mut(i, k) = l;
                // Row update on the contiguous tail keeps this loop fast.
                let (head, tail) = lu.data.split_at_mut(i * n);
                let krow = &head[k * n + k + 1..k * n + n];
                let irow = &mut tail[k + 1..n];
                for (t, s) in irow.iter_mut().zip(krow) {
                    *t -= l * s;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n, "lu_solve: dimension mismatch");
        let n = self.n;
        // Forward: L y = P b
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc;
        }
        // Backward: U x = y
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc / self.lu.get(i, i);
        }
        x
    }

    /// Solve A* x = b using the same factors: A* = U* L* P.
    pub fn solve_conj_transpose(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n, "lu_solve: dimension mismatch");
        let n = self.n;
        // U* z = b  (U* is lower triangular)
        let mut z = b.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for j in 0..i {
                acc -= self.lu.get(j, i).conj() * z[j];
            }
            z[i] = acc / self.lu.get(i, i).conj();
        }
        // L* w = z  (L* is unit upper triangular)
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc -= self.lu.get(j, i).conj() * z[j];
            }
            z[i] = acc;
        }
        // x = P^T w
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }
}

/// Result of a dense Hermitian eigendecomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column j is the eigenvector for `values[j]`.
    pub vectors: DenseMatrix,
}

/// Eigendecomposition of a Hermitian matrix; rejects non-Hermitian input.
pub fn dense_eig_hermitian(a: &DenseMatrix) -> Result<HermitianEigen, LinAlgError> {
    assert_eq!(a.nrows(), a.ncols(), "dense_eig_hermitian: matrix must be square");
    let n = a.nrows();
    let scale = a.max_abs().max(1.0);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((a.get(i, j) - a.get(j, i).conj()).norm());
        }
    }
    if asym > 1e-12 * scale {
        return Err(LinAlgError::NotHermitian { asymmetry: asym });
    }
    let eig = nalgebra::SymmetricEigen::new(a.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let values: Vec<f64> = order.iter().map(|&p| eig.eigenvalues[p]).collect();
    let vectors =
        DenseMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}
