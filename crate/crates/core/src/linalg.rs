//! Dense real matrices and the handful of kernels the selector needs:
//! column normalization, Gram products, a cyclic Jacobi symmetric
//! eigensolver and the squared operator norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns with norm at or below this are treated as zero.
pub const ZERO_COLUMN_TOL: f64 = 1e-14;
/// Maximum tolerated asymmetry `|a_ij - a_ji|` (relative to `max(1, max|a|)`).
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Jacobi stops once the off-diagonal Frobenius mass drops below this
/// fraction of `||A||_F`.
pub const JACOBI_OFF_TOL: f64 = 1e-13;

/// Column-major dense real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows,
                col: pos / rows,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row-major entries (the layout of text formats).
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        let mut cm = vec![0.0; data.len()];
        for i in 0..rows {
            for j in 0..cols {
                cm[j * rows + i] = data[i * cols + j];
            }
        }
        Self::new(rows, cols, cm)
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} in a matrix with {} rows",
                bad.len(),
                rows
            )));
        }
        Self::new(rows, columns.len(), columns.concat())
    }

    /// Zero matrix. Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column-major backing slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b == 0.0 {
                    continue;
                }
                let a = self.col(k);
                for (o, &av) in out.col_mut(j).iter_mut().zip(a) {
                    *o += av * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^t * x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * xj;
            }
        }
        out
    }

    /// Appends a column; fails if its length differs from `rows`.
    pub fn push_column(&mut self, col: &[f64]) -> Result<()> {
        if col.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} pushed onto a matrix with {} rows",
                col.len(),
                self.rows
            )));
        }
        self.data.extend_from_slice(col);
        self.cols += 1;
        Ok(())
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyMatrix {
                rows: self.rows,
                cols: 0,
            });
        }
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for &j in indices {
            if j >= self.cols {
                return Err(Error::DimensionMismatch(format!(
                    "column index {j} out of range for {} columns",
                    self.cols
                )));
            }
            data.extend_from_slice(self.col(j));
        }
        Ok(Self {
            rows: self.rows,
            cols: indices.len(),
            data,
        })
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        norm(self.col(j))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`; `+inf` for non-square matrices.
    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Rescales every column to unit Euclidean norm.
pub fn normalize_columns(m: &DenseMatrix) -> Result<DenseMatrix> {
    let mut out = m.clone();
    for j in 0..out.cols() {
        let nrm = out.column_norm(j);
        if nrm <= ZERO_COLUMN_TOL {
            return Err(Error::ZeroColumn(j));
        }
        // Already-unit columns are left untouched so the map is idempotent.
        if nrm != 1.0 {
            out.col_mut(j).iter_mut().for_each(|v| *v /= nrm);
        }
    }
    Ok(out)
}

/// `Y^t Y`, computed on the upper triangle and mirrored so the result is
/// exactly symmetric.
pub fn gram(y: &DenseMatrix) -> DenseMatrix {
    let r = y.cols();
    let mut g = DenseMatrix::zeros(r, r);
    for j in 0..r {
        for i in 0..=j {
            let v = dot(y.col(i), y.col(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// `X X^t`, accumulated as a sum of column outer products.
pub fn outer_gram(x: &DenseMatrix) -> DenseMatrix {
    let n = x.rows();
    let mut g = DenseMatrix::zeros(n, n);
    for c in 0..x.cols() {
        let col = x.col(c);
        for j in 0..n {
            let cj = col[j];
            if cj == 0.0 {
                continue;
            }
            for i in 0..=j {
                g[(i, j)] += col[i] * cj;
            }
        }
    }
    for j in 0..n {
        for i in 0..j {
            g[(j, i)] = g[(i, j)];
        }
    }
    g
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues in descending
/// order, eigenvectors stored column-aligned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Eigenvalues and eigenvectors of the current Gram matrix `Y_r^t Y_r`.
pub type SpectralState = SymEig;

impl SymEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Spectrum of the 1x1 Gram matrix of a single unit column.
    pub fn unit() -> Self {
        Self {
            values: vec![1.0],
            vectors: DenseMatrix::identity(1),
        }
    }

    /// `V diag(values) V^t`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.dim();
        let mut out = DenseMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.col(k);
            for j in 0..n {
                let s = lam * v[j];
                for i in 0..n {
                    out[(i, j)] += v[i] * s;
                }
            }
        }
        out
    }

    /// Max-abs deviation of `V^t V` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.vectors)
    }
}

pub fn orthonormality_error(v: &DenseMatrix) -> f64 {
    let n = v.cols();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(v.col(i), v.col(j)) - target).abs());
        }
    }
    worst
}

/// Limits for the Jacobi eigensolver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigOptions {
    pub max_sweeps: usize,
    pub dim_cap: usize,
}

impl Default for SymEigOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 64,
            dim_cap: 4096,
        }
    }
}

pub fn sym_eig(a: &DenseMatrix) -> Result<SymEig> {
    sym_eig_with(a, &SymEigOptions::default())
}

/// Cyclic Jacobi eigensolver. The input is symmetrized as `(A + A^t)/2`
/// after the symmetry check.
pub fn sym_eig_with(a: &DenseMatrix, opts: &SymEigOptions) -> Result<SymEig> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if n > opts.dim_cap {
        return Err(Error::TooLarge {
            dim: n,
            cap: opts.dim_cap,
        });
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }

    let mut w = a.clone();
    for j in 0..n {
        for i in 0..j {
            let s = 0.5 * (w[(i, j)] + w[(j, i)]);
            w[(i, j)] = s;
            w[(j, i)] = s;
        }
    }
    let mut v = DenseMatrix::identity(n);
    let target = JACOBI_OFF_TOL * w.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&w);
        if off <= target {
            break;
        }
        if sweeps == opts.max_sweeps {
            return Err(Error::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: ties keep the solver's output order.
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.col_mut(dst).copy_from_slice(v.col(src));
    }
    Ok(SymEig { values, vectors })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// `||X||^2 = lambda_max(X^t X)`, computed on whichever of `X^t X` and
/// `X X^t` is smaller.
pub fn operator_norm_sq(x: &DenseMatrix) -> Result<f64> {
    let g = if x.rows() <= x.cols() {
        outer_gram(x)
    } else {
        gram(x)
    };
    Ok(sym_eig(&g)?.values[0])
}
