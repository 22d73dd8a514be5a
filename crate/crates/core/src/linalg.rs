//! Dense row-major matrices, Kronecker products, Cholesky factorization,
//! triangular solves and a cyclic Jacobi symmetric eigensolver.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Largest number of entries a Kronecker product may produce.
pub const MAX_ENTRIES: usize = 1 << 26;

/// Cholesky breaks down when a pivot is at most this fraction of the largest
/// initial diagonal entry.
pub const PIVOT_TOL: f64 = 1e-13;

/// Tolerance for the symmetry test, relative to the infinity norm.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
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

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, got: x.len() });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `||A - A^T||_inf` for square matrices.
    pub fn asymmetry(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| (self[(i, j)] - self[(j, i)]).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn check_symmetric(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Shape(format!("{}x{} matrix is not square", self.rows, self.cols)));
        }
        let asym = self.asymmetry();
        if asym > SYMMETRY_TOL * self.norm_inf() {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower triangular matrix in packed row-major storage: row `i` holds the
/// `i + 1` entries `L[i][0..=i]`. Appending a row is O(row length), which
/// the incremental Newton basis relies on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LowerTriangular {
    order: usize,
    data: Vec<f64>,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl LowerTriangular {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(order: usize) -> Self {
        Self { order: 0, data: Vec::with_capacity(row_start(order)) }
    }

    /// Takes the lower triangle of a square matrix, ignoring the upper part.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape("lower triangular matrix must be square".into()));
        }
        let mut l = Self::with_capacity(m.rows());
        for i in 0..m.rows() {
            l.push_row(&m.row(i)[..=i])?;
        }
        Ok(l)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_empty(&self) -> bool {
        self.order == 0
    }

    /// Appends a row of length `order() + 1` (the last entry is the diagonal).
    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.order + 1 {
            return Err(Error::Dimension { expected: self.order + 1, got: row.len() });
        }
        self.data.extend_from_slice(row);
        self.order += 1;
        Ok(())
    }

    /// Entries `L[i][0..=i]`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[row_start(i)..row_start(i + 1)]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.data[row_start(i + 1) - 1]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.diag(i)).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.data[row_start(i) + j]
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    /// `L * L^T`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.order;
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = dot(&self.row(i)[..=j], &self.row(j)[..=j]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Kronecker product: entry `(j, k)` of `A (x) B` (0-based) is
/// `a[j / p][k / q] * b[j % p][k % q]` for `B` of size `p x q`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let entries = rows.saturating_mul(cols);
    if entries > MAX_ENTRIES {
        return Err(Error::TooLarge { entries, limit: MAX_ENTRIES });
    }
    let mut data = Vec::with_capacity(entries);
    for ia in 0..a.rows {
        let arow = a.row(ia);
        for ib in 0..b.rows {
            let brow = b.row(ib);
            for &av in arow {
                data.extend(brow.iter().map(|&bv| av * bv));
            }
        }
    }
    Ok(DenseMatrix { rows, cols, data })
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a DenseMatrix>) -> Result<DenseMatrix> {
    let mut it = factors.into_iter();
    let first = it.next().ok_or_else(|| Error::Shape("empty Kronecker product".into()))?;
    it.try_fold(first.clone(), |acc, m| kron(&acc, m))
}

const CHOLESKY_BLOCK: usize = 16;

/// Unpivoted Cholesky factorization `A = L L^T`.
///
/// Only the lower triangle of `A` is read; symmetry is the caller's contract.
/// Rows are computed in blocks so that each finished row is streamed once per
/// block instead of once per row.
pub fn cholesky(a: &DenseMatrix) -> Result<LowerTriangular> {
    if !a.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", a.rows, a.cols)));
    }
    let n = a.rows;
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0, f64::max);
    let tol = PIVOT_TOL * max_diag;
    let mut data = vec![0.0; row_start(n)];

    let mut i0 = 0;
    while i0 < n {
        let i1 = (i0 + CHOLESKY_BLOCK).min(n);
        let (done, block) = data.split_at_mut(row_start(i0));
        // Columns left of the block use rows that are already final.
        for j in 0..i0 {
            let lj = &done[row_start(j)..row_start(j + 1)];
            let ljj = lj[j];
            for i in i0..i1 {
                let off = row_start(i) - row_start(i0);
                let li = &mut block[off..off + i + 1];
                li[j] = (a[(i, j)] - dot(&li[..j], &lj[..j])) / ljj;
            }
        }
        for i in i0..i1 {
            let (head, tail) = block.split_at_mut(row_start(i) - row_start(i0));
            let li = &mut tail[..=i];
            for j in i0..i {
                let off = row_start(j) - row_start(i0);
                let lj = &head[off..off + j + 1];
                li[j] = (a[(i, j)] - dot(&li[..j], &lj[..j])) / lj[j];
            }
            let pivot = a[(i, i)] - dot(&li[..i], &li[..i]);
            if !(pivot > tol) {
                return Err(Error::NotPositiveDefinite { index: i, pivot });
            }
            li[i] = pivot.sqrt();
        }
        i0 = i1;
    }
    Ok(LowerTriangular { order: n, data })
}

/// Solves `L x = b` by forward substitution.
pub fn solve_lower(l: &LowerTriangular, b: &[f64]) -> Result<Vec<f64>> {
    let mut x = b.to_vec();
    solve_lower_in_place(l, &mut x)?;
    Ok(x)
}

pub fn solve_lower_in_place(l: &LowerTriangular, x: &mut [f64]) -> Result<()> {
    if x.len() != l.order {
        return Err(Error::Dimension { expected: l.order, got: x.len() });
    }
    for i in 0..l.order {
        let row = l.row(i);
        let d = row[i];
        if d == 0.0 {
            return Err(Error::Singular(i));
        }
        x[i] = (x[i] - dot(&row[..i], &x[..i])) / d;
    }
    Ok(())
}

/// Solves `L^T x = b` by back substitution.
pub fn solve_upper(l: &LowerTriangular, b: &[f64]) -> Result<Vec<f64>> {
    let mut x = b.to_vec();
    solve_upper_in_place(l, &mut x)?;
    Ok(x)
}

pub fn solve_upper_in_place(l: &LowerTriangular, x: &mut [f64]) -> Result<()> {
    if x.len() != l.order {
        return Err(Error::Dimension { expected: l.order, got: x.len() });
    }
    for i in (0..l.order).rev() {
        let row = l.row(i);
        let d = row[i];
        if d == 0.0 {
            return Err(Error::Singular(i));
        }
        let xi = x[i] / d;
        x[i] = xi;
        // Column i of L^T above the diagonal is row i of L.
        for (xj, &lij) in x[..i].iter_mut().zip(&row[..i]) {
            *xj -= lij * xi;
        }
    }
    Ok(())
}

/// Solves `L L^T x = b`.
pub fn cholesky_solve(l: &LowerTriangular, b: &[f64]) -> Result<Vec<f64>> {
    let mut x = solve_lower(l, b)?;
    solve_upper_in_place(l, &mut x)?;
    Ok(x)
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi
/// rotations.
///
/// A rotation is skipped when `|a_pq| <= eps * sqrt(|a_pp a_qq|)`; with this
/// threshold small eigenvalues of positive definite matrices keep high
/// relative accuracy.
pub fn sym_eigvals(a: &DenseMatrix) -> Result<Vec<f64>> {
    a.check_symmetric()?;
    let n = a.rows;
    // Symmetrize exactly so rotations act on a symmetric array.
    let mut m = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let eps = f64::EPSILON;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                if apq.abs() <= eps * (app * aqq).abs().sqrt() {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = m[(r, p)];
                    let h = m[(r, q)];
                    let rp = g - s * (h + g * tau);
                    let rq = h + s * (g - h * tau);
                    m[(r, p)] = rp;
                    m[(p, r)] = rp;
                    m[(r, q)] = rq;
                    m[(q, r)] = rq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// `(smallest, largest)` eigenvalue of a symmetric matrix.
pub fn sym_eig_extremes(a: &DenseMatrix) -> Result<(f64, f64)> {
    if a.rows == 0 {
        return Err(Error::Shape("empty matrix has no eigenvalues".into()));
    }
    let eig = sym_eigvals(a)?;
    Ok((eig[0], eig[eig.len() - 1]))
}

/// Spectral condition number `sigma_max / sigma_min` of a symmetric positive
/// definite matrix.
pub fn cond2(a: &DenseMatrix) -> Result<f64> {
    let (lo, hi) = sym_eig_extremes(a)?;
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite { index: 0, pivot: lo });
    }
    Ok(hi / lo)
}
