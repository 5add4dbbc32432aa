//! Dense linear algebra at desk scale (d ≤ a few hundred).
//!
//! Row-major matrices, cyclic Jacobi for symmetric eigenvalues and
//! Cholesky for SPD solves. Everything here is `f64` and allocation-light;
//! hot paths in the SGD engine only touch the vector helpers.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("Jacobi eigensolver did not converge")]
    EigenNoConvergence,
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
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
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from a flat row-major buffer.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                left: data.len(),
                right: rows * cols,
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `out = self * x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for i in 0..self.rows {
            out[i] = dot(self.row(i), x);
        }
    }

    /// `out = selfᵀ * y`.
    pub fn matvec_transposed(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for i in 0..self.rows {
            axpy(y[i], self.row(i), out);
        }
    }

    /// `self += w * v vᵀ` for a square matrix.
    pub fn add_scaled_outer(&mut self, w: f64, v: &[f64]) {
        debug_assert_eq!(self.rows, self.cols);
        debug_assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            let wi = w * v[i];
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            axpy(wi, v, row);
        }
    }

    /// `self += w * other`.
    pub fn add_scaled(&mut self, w: f64, other: &Matrix) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        axpy(w, &other.data, &mut self.data);
    }

    /// `scale * AᵀA` where `A` is this matrix; the Gram matrix of the rows.
    pub fn gram_scaled(&self, scale: f64) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for i in 0..self.rows {
            g.add_scaled_outer(scale, self.row(i));
        }
        g
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.at(i, k);
                if aik == 0.0 {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                axpy(aik, other.row(k), dst);
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    libm::sqrt(norm_sq(x))
}

/// `out = a - b`.
pub fn sub_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.len(), out.len());
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x - y;
    }
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi.
///
/// The input is treated as symmetric; only its lower triangle is trusted
/// to mirror the upper one up to roundoff.
pub fn sym_eigenvalues(m: &Matrix) -> Result<Vec<f64>, LinalgError> {
    if m.rows != m.cols {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m.at(0, 0)]);
    }
    let mut a = m.data.clone();
    let idx = |i: usize, j: usize| i * n + j;
    let fro = m.frobenius_norm();
    if fro == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        if libm::sqrt(2.0 * off) <= 1e-15 * fro {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    1.0 / (theta - libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                a[idx(p, p)] -= t * apq;
                a[idx(q, q)] += t * apq;
                a[idx(p, q)] = 0.0;
                a[idx(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    let np = c * akp - s * akq;
                    let nq = s * akp + c * akq;
                    a[idx(k, p)] = np;
                    a[idx(p, k)] = np;
                    a[idx(k, q)] = nq;
                    a[idx(q, k)] = nq;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::EigenNoConvergence);
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(eig)
}

/// `(λ_min, λ_max)` of a symmetric matrix.
pub fn sym_eigen_extremes(m: &Matrix) -> Result<(f64, f64), LinalgError> {
    let eig = sym_eigenvalues(m)?;
    match (eig.first(), eig.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(LinalgError::NotSquare { rows: 0, cols: 0 }),
    }
}

pub fn sym_max_eigenvalue(m: &Matrix) -> Result<f64, LinalgError> {
    sym_eigen_extremes(m).map(|(_, hi)| hi)
}

/// Lower Cholesky factor of an SPD matrix.
pub fn cholesky(m: &Matrix) -> Result<Matrix, LinalgError> {
    if m.rows != m.cols {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m.at(j, j);
        for k in 0..j {
            d -= l.at(j, k) * l.at(j, k);
        }
        if d <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { pivot: j });
        }
        let ljj = libm::sqrt(d);
        l.set(j, j, ljj);
        for i in (j + 1)..n {
            let mut v = m.at(i, j);
            for k in 0..j {
                v -= l.at(i, k) * l.at(j, k);
            }
            l.set(i, j, v / ljj);
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn forward_substitute(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = b.to_vec();
    for i in 0..n {
        let mut v = x[i];
        for k in 0..i {
            v -= l.at(i, k) * x[k];
        }
        x[i] = v / l.at(i, i);
    }
    x
}

/// Solves `Lᵀ x = b` for lower-triangular `L`.
pub fn back_substitute_transposed(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut v = x[i];
        for k in (i + 1)..n {
            v -= l.at(k, i) * x[k];
        }
        x[i] = v / l.at(i, i);
    }
    x
}

/// Solves `M x = b` for SPD `M`.
pub fn solve_spd(m: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if b.len() != m.rows {
        return Err(LinalgError::DimensionMismatch {
            left: b.len(),
            right: m.rows,
        });
    }
    let l = cholesky(m)?;
    let y = forward_substitute(&l, b);
    Ok(back_substitute_transposed(&l, &y))
}

/// `L⁻¹ B L⁻ᵀ` for lower-triangular `L` and symmetric `B`.
///
/// Used to reduce the generalized problem `B u = λ M u` (with `M = L Lᵀ`)
/// to an ordinary symmetric eigenproblem.
pub fn congruence_inv_cholesky(l: &Matrix, b: &Matrix) -> Matrix {
    let n = l.rows;
    debug_assert_eq!(b.rows, n);
    debug_assert_eq!(b.cols, n);
    // X = L⁻¹ B, column by column.
    let mut x = Matrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = b.at(i, j);
        }
        let sol = forward_substitute(l, &col);
        for i in 0..n {
            x.set(i, j, sol[i]);
        }
    }
    // C = X L⁻ᵀ = (L⁻¹ Xᵀ)ᵀ, so forward-solve the rows of X.
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        let sol = forward_substitute(l, x.row(i));
        for j in 0..n {
            c.set(i, j, sol[j]);
        }
    }
    // Symmetrize away roundoff.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (c.at(i, j) + c.at(j, i));
            c.set(i, j, v);
            c.set(j, i, v);
        }
    }
    c
}
