//! Finite-sum problems f = (1/n) Σ f_i with per-component gradient access.
//!
//! Three concrete families: ridge regression, L2-regularized logistic
//! regression (with the 1/2-scaled loss, so the component curvature bound
//! is ‖a_i‖²/8 + λ), and sums of non-convex quadratics whose diagonal
//! perturbations cancel exactly. Each constructor also returns the
//! smoothness metadata the rest of the crate consumes, and
//! [`solve_minimizer`] produces a certified minimizer together with the
//! residual component gradients h_i = ∇f_i(x*).

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{self, axpy, dot, norm, norm_sq, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("data must have at least one row and one column")]
    EmptyData,
    #[error("shape mismatch: matrix has {rows} rows but {len} targets")]
    ShapeMismatch { rows: usize, len: usize },
    #[error("regularizer must be nonnegative, got {0}")]
    NegativeRegularizer(f64),
    #[error("logistic regularizer must be positive, got {0}")]
    NonPositiveRegularizer(f64),
    #[error("label at row {row} is {value}, expected -1 or +1")]
    BadLabel { row: usize, value: f64 },
    #[error("component count must be even, got {0}")]
    OddComponentCount(usize),
    #[error("mean Hessian is singular; the problem is not strongly convex")]
    NotStronglyConvex,
    #[error("eigensolver failed: {0}")]
    Eigen(#[from] linalg::LinalgError),
    #[error("minimizer solve hit the {max_iters}-iteration cap (residual {residual:.3e})")]
    SolveDidNotConverge { max_iters: u64, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Ridge,
    Logistic,
    NonconvexSum,
}

impl ProblemKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProblemKind::Ridge => "ridge",
            ProblemKind::Logistic => "logistic",
            ProblemKind::NonconvexSum => "nonconvex-sum",
        }
    }
}

#[derive(Debug, Clone)]
enum ProblemData {
    Ridge {
        a: Matrix,
        y: Vec<f64>,
        lambda: f64,
    },
    Logistic {
        a: Matrix,
        y: Vec<f64>,
        lambda: f64,
    },
    Nonconvex {
        a: Matrix,
        diag: Matrix,
        b: Vec<f64>,
        mean_hessian: Matrix,
    },
}

/// f = (1/n) Σ f_i, immutable after construction.
#[derive(Debug, Clone)]
pub struct FiniteSumProblem {
    kind: ProblemKind,
    n: usize,
    d: usize,
    data: ProblemData,
}

/// Per-component and full smoothness constants plus the strong
/// quasi-convexity modulus, as produced by the problem constructors.
#[derive(Debug, Clone)]
pub struct SmoothnessSpec {
    /// L_i, one per component.
    pub component: Vec<f64>,
    /// L, smoothness of the averaged objective.
    pub full: f64,
    /// L_max = max_i L_i.
    pub max: f64,
    /// L̄ = (1/n) Σ L_i.
    pub mean: f64,
    /// μ.
    pub mu: f64,
}

impl SmoothnessSpec {
    fn from_components(component: Vec<f64>, full: f64, mu: f64) -> Self {
        let max = component.iter().cloned().fold(0.0_f64, f64::max);
        let mean = component.iter().sum::<f64>() / component.len() as f64;
        SmoothnessSpec {
            component,
            full,
            max,
            mean,
            mu,
        }
    }
}

/// A solved problem: x*, the component gradients h_i = ∇f_i(x*), and the
/// full-gradient residual at x*.
#[derive(Debug, Clone)]
pub struct MinimizerCertificate {
    pub x_star: Vec<f64>,
    pub component_grads: Vec<Vec<f64>>,
    pub grad_residual: f64,
}

impl MinimizerCertificate {
    pub fn h_norms(&self) -> Vec<f64> {
        self.component_grads.iter().map(|h| norm(h)).collect()
    }

    pub fn h_norms_sq(&self) -> Vec<f64> {
        self.component_grads.iter().map(|h| norm_sq(h)).collect()
    }

    /// h̄ = (1/n) Σ ‖h_i‖².
    pub fn h_bar(&self) -> f64 {
        let n = self.component_grads.len() as f64;
        self.component_grads.iter().map(|h| norm_sq(h)).sum::<f64>() / n
    }
}

/// Stable 1/(1+eˣ).
fn sigmoid_neg(z: f64) -> f64 {
    if z >= 0.0 {
        let e = libm::exp(-z);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + libm::exp(z))
    }
}

/// Stable ln(1+eˣ).
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

impl FiniteSumProblem {
    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        match &self.data {
            ProblemData::Ridge { a, y, lambda } => {
                let r = dot(a.row(i), x) - y[i];
                0.5 * r * r + 0.5 * lambda * norm_sq(x)
            }
            ProblemData::Logistic { a, y, lambda } => {
                let t = dot(a.row(i), x);
                0.5 * softplus(-y[i] * t) + 0.5 * lambda * norm_sq(x)
            }
            ProblemData::Nonconvex { a, diag, b, .. } => {
                let t = dot(a.row(i), x);
                let mut quad = t * t;
                for (dj, xj) in diag.row(i).iter().zip(x) {
                    quad += dj * xj * xj;
                }
                0.5 * quad + dot(b, x)
            }
        }
    }

    pub fn component_grad(&self, i: usize, x: &[f64], out: &mut [f64]) {
        match &self.data {
            ProblemData::Ridge { a, y, lambda } => {
                let r = dot(a.row(i), x) - y[i];
                for (o, xj) in out.iter_mut().zip(x) {
                    *o = lambda * xj;
                }
                axpy(r, a.row(i), out);
            }
            ProblemData::Logistic { a, y, lambda } => {
                let t = dot(a.row(i), x);
                let c = -0.5 * y[i] * sigmoid_neg(y[i] * t);
                for (o, xj) in out.iter_mut().zip(x) {
                    *o = lambda * xj;
                }
                axpy(c, a.row(i), out);
            }
            ProblemData::Nonconvex { a, diag, b, .. } => {
                let t = dot(a.row(i), x);
                for ((o, dj), (xj, bj)) in out.iter_mut().zip(diag.row(i)).zip(x.iter().zip(b)) {
                    *o = dj * xj + bj;
                }
                axpy(t, a.row(i), out);
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.data {
            ProblemData::Ridge { a, y, lambda } => {
                let mut acc = 0.0;
                for i in 0..self.n {
                    let r = dot(a.row(i), x) - y[i];
                    acc += r * r;
                }
                0.5 * acc / self.n as f64 + 0.5 * lambda * norm_sq(x)
            }
            ProblemData::Logistic { a, y, lambda } => {
                let mut acc = 0.0;
                for i in 0..self.n {
                    acc += softplus(-y[i] * dot(a.row(i), x));
                }
                0.5 * acc / self.n as f64 + 0.5 * lambda * norm_sq(x)
            }
            ProblemData::Nonconvex {
                mean_hessian, b, ..
            } => {
                let mut hx = vec![0.0; self.d];
                mean_hessian.matvec(x, &mut hx);
                0.5 * dot(x, &hx) + dot(b, x)
            }
        }
    }

    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        let inv_n = 1.0 / self.n as f64;
        match &self.data {
            ProblemData::Nonconvex {
                mean_hessian, b, ..
            } => {
                mean_hessian.matvec(x, out);
                axpy(1.0, b, out);
            }
            ProblemData::Ridge { a, y, lambda } => {
                out.fill(0.0);
                for i in 0..self.n {
                    let r = dot(a.row(i), x) - y[i];
                    axpy(r * inv_n, a.row(i), out);
                }
                axpy(*lambda, x, out);
            }
            ProblemData::Logistic { a, y, lambda } => {
                out.fill(0.0);
                for i in 0..self.n {
                    let t = dot(a.row(i), x);
                    let c = -0.5 * y[i] * sigmoid_neg(y[i] * t);
                    axpy(c * inv_n, a.row(i), out);
                }
                axpy(*lambda, x, out);
            }
        }
    }

    /// Stochastic gradient (1/n) Σ_{k} w_k ∇f_{i_k}(x) for the sampled
    /// index/weight pairs. This is the engine's hot path; no allocation.
    pub fn sampled_grad(&self, indices: &[usize], weights: &[f64], x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(indices.len(), weights.len());
        out.fill(0.0);
        let inv_n = 1.0 / self.n as f64;
        match &self.data {
            ProblemData::Ridge { a, y, lambda } => {
                let mut wsum = 0.0;
                for (&i, &w) in indices.iter().zip(weights) {
                    let r = dot(a.row(i), x) - y[i];
                    axpy(w * r, a.row(i), out);
                    wsum += w;
                }
                for o in out.iter_mut() {
                    *o *= inv_n;
                }
                axpy(lambda * wsum * inv_n, x, out);
            }
            ProblemData::Logistic { a, y, lambda } => {
                let mut wsum = 0.0;
                for (&i, &w) in indices.iter().zip(weights) {
                    let t = dot(a.row(i), x);
                    let c = -0.5 * y[i] * sigmoid_neg(y[i] * t);
                    axpy(w * c, a.row(i), out);
                    wsum += w;
                }
                for o in out.iter_mut() {
                    *o *= inv_n;
                }
                axpy(lambda * wsum * inv_n, x, out);
            }
            ProblemData::Nonconvex { a, diag, b, .. } => {
                let mut wsum = 0.0;
                for (&i, &w) in indices.iter().zip(weights) {
                    let t = dot(a.row(i), x);
                    axpy(w * t, a.row(i), out);
                    for (o, (dj, xj)) in out.iter_mut().zip(diag.row(i).iter().zip(x)) {
                        *o += w * dj * xj;
                    }
                    wsum += w;
                }
                for o in out.iter_mut() {
                    *o *= inv_n;
                }
                axpy(wsum * inv_n, b, out);
            }
        }
    }

    /// The curvature matrix M_i, materialized on demand for the quadratic
    /// families; `None` for logistic, which uses the scalar model L_i·I.
    pub fn component_matrix(&self, i: usize) -> Option<Matrix> {
        match &self.data {
            ProblemData::Ridge { a, lambda, .. } => {
                let mut m = Matrix::zeros(self.d, self.d);
                m.add_scaled_outer(1.0, a.row(i));
                for j in 0..self.d {
                    m.set(j, j, m.at(j, j) + lambda);
                }
                Some(m)
            }
            ProblemData::Nonconvex { a, diag, .. } => {
                let mut m = Matrix::zeros(self.d, self.d);
                m.add_scaled_outer(1.0, a.row(i));
                for (j, dj) in diag.row(i).iter().enumerate() {
                    m.set(j, j, m.at(j, j) + dj);
                }
                Some(m)
            }
            ProblemData::Logistic { .. } => None,
        }
    }

    /// Σ_k w_k M_{i_k} without materializing the individual terms.
    pub fn weighted_matrix_sum(&self, indices: &[usize], weights: &[f64]) -> Option<Matrix> {
        match &self.data {
            ProblemData::Logistic { .. } => None,
            ProblemData::Ridge { a, lambda, .. } => {
                let mut m = Matrix::zeros(self.d, self.d);
                let mut wsum = 0.0;
                for (&i, &w) in indices.iter().zip(weights) {
                    m.add_scaled_outer(w, a.row(i));
                    wsum += w;
                }
                for j in 0..self.d {
                    m.set(j, j, m.at(j, j) + wsum * lambda);
                }
                Some(m)
            }
            ProblemData::Nonconvex { a, diag, .. } => {
                let mut m = Matrix::zeros(self.d, self.d);
                for (&i, &w) in indices.iter().zip(weights) {
                    m.add_scaled_outer(w, a.row(i));
                    for (j, dj) in diag.row(i).iter().enumerate() {
                        m.set(j, j, m.at(j, j) + w * dj);
                    }
                }
                Some(m)
            }
        }
    }

    /// Hessian of f for the quadratic families.
    pub fn full_hessian(&self) -> Option<Matrix> {
        match &self.data {
            ProblemData::Ridge { a, lambda, .. } => {
                let mut m = a.gram_scaled(1.0 / self.n as f64);
                for j in 0..self.d {
                    m.set(j, j, m.at(j, j) + lambda);
                }
                Some(m)
            }
            ProblemData::Nonconvex { mean_hessian, .. } => Some(mean_hessian.clone()),
            ProblemData::Logistic { .. } => None,
        }
    }
}

fn check_shape(a: &Matrix, y: &[f64]) -> Result<(), ProblemError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(ProblemError::EmptyData);
    }
    if y.len() != a.rows() {
        return Err(ProblemError::ShapeMismatch {
            rows: a.rows(),
            len: y.len(),
        });
    }
    Ok(())
}

/// Ridge regression: f_i(x) = ½(a_iᵀx − y_i)² + (λ/2)‖x‖².
pub fn make_ridge(
    a: Matrix,
    y: Vec<f64>,
    lambda: f64,
) -> Result<(FiniteSumProblem, SmoothnessSpec), ProblemError> {
    check_shape(&a, &y)?;
    if lambda < 0.0 {
        return Err(ProblemError::NegativeRegularizer(lambda));
    }
    let (n, d) = (a.rows(), a.cols());
    let component: Vec<f64> = (0..n).map(|i| norm_sq(a.row(i)) + lambda).collect();
    let mut gram = a.gram_scaled(1.0 / n as f64);
    for j in 0..d {
        gram.set(j, j, gram.at(j, j) + lambda);
    }
    let (mu, full) = linalg::sym_eigen_extremes(&gram)?;
    let spec = SmoothnessSpec::from_components(component, full, mu);
    let problem = FiniteSumProblem {
        kind: ProblemKind::Ridge,
        n,
        d,
        data: ProblemData::Ridge { a, y, lambda },
    };
    Ok((problem, spec))
}

/// L2-regularized logistic regression with the ½-scaled loss:
/// f_i(x) = ½ ln(1 + exp(−y_i a_iᵀx)) + (λ/2)‖x‖², y_i ∈ {−1, +1}.
///
/// The ½ prefactor halves the usual ¼ logistic curvature bound, giving
/// L_i = ‖a_i‖²/8 + λ. μ is certified as the lower bound λ.
pub fn make_logistic(
    a: Matrix,
    y: Vec<f64>,
    lambda: f64,
) -> Result<(FiniteSumProblem, SmoothnessSpec), ProblemError> {
    check_shape(&a, &y)?;
    if lambda <= 0.0 {
        return Err(ProblemError::NonPositiveRegularizer(lambda));
    }
    for (row, &v) in y.iter().enumerate() {
        if v != 1.0 && v != -1.0 {
            return Err(ProblemError::BadLabel { row, value: v });
        }
    }
    let (n, d) = (a.rows(), a.cols());
    let component: Vec<f64> = (0..n).map(|i| norm_sq(a.row(i)) / 8.0 + lambda).collect();
    let gram = a.gram_scaled(1.0 / n as f64);
    let full = linalg::sym_max_eigenvalue(&gram)? / 8.0 + lambda;
    let spec = SmoothnessSpec::from_components(component, full, lambda);
    let problem = FiniteSumProblem {
        kind: ProblemKind::Logistic,
        n,
        d,
        data: ProblemData::Logistic { a, y, lambda },
    };
    Ok((problem, spec))
}

const DIAG_PERTURBATION: f64 = 11.0;

/// Sum of non-convex quadratics: f_i(x) = ½xᵀ(a_i a_iᵀ + D_i)x + bᵀx with
/// diagonal D_i whose entries are ±11, assigned per coordinate so that
/// Σ_i D_i = 0 exactly. Requires n even and λ_min of the mean Hessian
/// Ā = (1/n) Σ a_i a_iᵀ strictly positive.
pub fn make_nonconvex_sum(
    a: Matrix,
    b: Vec<f64>,
    seed: u64,
) -> Result<(FiniteSumProblem, SmoothnessSpec), ProblemError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(ProblemError::EmptyData);
    }
    let (n, d) = (a.rows(), a.cols());
    if b.len() != d {
        return Err(ProblemError::ShapeMismatch {
            rows: d,
            len: b.len(),
        });
    }
    if n % 2 != 0 {
        return Err(ProblemError::OddComponentCount(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diag = Matrix::zeros(n, d);
    let mut signs: Vec<f64> = vec![0.0; n];
    for j in 0..d {
        for (k, s) in signs.iter_mut().enumerate() {
            *s = if k < n / 2 {
                DIAG_PERTURBATION
            } else {
                -DIAG_PERTURBATION
            };
        }
        signs.shuffle(&mut rng);
        for i in 0..n {
            diag.set(i, j, signs[i]);
        }
    }
    let mean_hessian = a.gram_scaled(1.0 / n as f64);
    let (mu, full) = linalg::sym_eigen_extremes(&mean_hessian)?;
    if mu <= 1e-12 * full.max(1.0) {
        return Err(ProblemError::NotStronglyConvex);
    }
    let mut component = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = Matrix::zeros(d, d);
        m.add_scaled_outer(1.0, a.row(i));
        for (j, dj) in diag.row(i).iter().enumerate() {
            m.set(j, j, m.at(j, j) + dj);
        }
        component.push(linalg::sym_max_eigenvalue(&m)?);
    }
    let spec = SmoothnessSpec::from_components(component, full, mu);
    let problem = FiniteSumProblem {
        kind: ProblemKind::NonconvexSum,
        n,
        d,
        data: ProblemData::Nonconvex {
            a,
            diag,
            b,
            mean_hessian,
        },
    };
    Ok((problem, spec))
}

const LOGISTIC_SOLVE_CAP: u64 = 1_000_000;

/// Solves for x* and packages the component gradients h_i = ∇f_i(x*).
///
/// Quadratic families use a direct SPD solve; logistic runs full-batch
/// gradient descent with stepsize 1/L until ‖∇f(x)‖ ≤ 1e-12·(1 + ‖x‖).
pub fn solve_minimizer(problem: &FiniteSumProblem) -> Result<MinimizerCertificate, ProblemError> {
    let d = problem.dim();
    let x_star = match &problem.data {
        ProblemData::Ridge { a, y, lambda } => {
            let n = a.rows() as f64;
            let mut gram = a.gram_scaled(1.0 / n);
            for j in 0..d {
                gram.set(j, j, gram.at(j, j) + lambda);
            }
            let mut rhs = vec![0.0; d];
            a.matvec_transposed(y, &mut rhs);
            for r in rhs.iter_mut() {
                *r /= n;
            }
            linalg::solve_spd(&gram, &rhs).map_err(|_| ProblemError::NotStronglyConvex)?
        }
        ProblemData::Nonconvex {
            mean_hessian, b, ..
        } => {
            let neg_b: Vec<f64> = b.iter().map(|v| -v).collect();
            linalg::solve_spd(mean_hessian, &neg_b).map_err(|_| ProblemError::NotStronglyConvex)?
        }
        ProblemData::Logistic { a, lambda, .. } => {
            let n = a.rows() as f64;
            let gram = a.gram_scaled(1.0 / n);
            let full = linalg::sym_max_eigenvalue(&gram)? / 8.0 + lambda;
            let step = 1.0 / full;
            let mut x = vec![0.0; d];
            let mut g = vec![0.0; d];
            let mut iters: u64 = 0;
            loop {
                problem.grad(&x, &mut g);
                let res = norm(&g);
                if res <= 1e-12 * (1.0 + norm(&x)) {
                    break;
                }
                if iters >= LOGISTIC_SOLVE_CAP {
                    return Err(ProblemError::SolveDidNotConverge {
                        max_iters: LOGISTIC_SOLVE_CAP,
                        residual: res,
                    });
                }
                axpy(-step, &g, &mut x);
                iters += 1;
            }
            x
        }
    };
    let mut component_grads = Vec::with_capacity(problem.n());
    let mut mean = vec![0.0; d];
    for i in 0..problem.n() {
        let mut h = vec![0.0; d];
        problem.component_grad(i, &x_star, &mut h);
        axpy(1.0, &h, &mut mean);
        component_grads.push(h);
    }
    for m in mean.iter_mut() {
        *m /= problem.n() as f64;
    }
    let grad_residual = norm(&mean);
    Ok(MinimizerCertificate {
        x_star,
        component_grads,
        grad_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist_sq;

    fn matrix(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_vec(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn ridge_identity_constants() {
        let (_, spec) = make_ridge(Matrix::identity(2), vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(spec.component, vec![2.0, 2.0]);
        assert!((spec.full - 1.5).abs() < 1e-14);
        assert!((spec.mu - 1.5).abs() < 1e-14);
    }

    #[test]
    fn ridge_zero_row_is_constant_component() {
        let a = matrix(2, 2, &[0.0, 0.0, 1.0, 2.0]);
        let (problem, spec) = make_ridge(a, vec![0.0, 1.0], 0.0).unwrap();
        assert_eq!(spec.component[0], 0.0);
        let mut g = [0.0; 2];
        problem.component_grad(0, &[0.3, -0.7], &mut g);
        assert_eq!(g, [0.0, 0.0]);
        assert_eq!(
            problem.component_value(0, &[0.3, -0.7]),
            problem.component_value(0, &[5.0, 5.0])
        );
    }

    #[test]
    fn ridge_rejects_bad_shapes() {
        assert!(matches!(
            make_ridge(Matrix::identity(2), vec![0.0], 1.0),
            Err(ProblemError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            make_ridge(Matrix::zeros(0, 0), vec![], 1.0),
            Err(ProblemError::EmptyData)
        ));
        assert!(matches!(
            make_ridge(Matrix::identity(2), vec![0.0, 0.0], -1.0),
            Err(ProblemError::NegativeRegularizer(_))
        ));
    }

    #[test]
    fn logistic_zero_row_curvature_is_lambda() {
        let a = matrix(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        let (_, spec) = make_logistic(a, vec![1.0, -1.0], 0.25).unwrap();
        assert_eq!(spec.component[0], 0.25);
        assert_eq!(spec.mu, 0.25);
    }

    #[test]
    fn logistic_rejects_bad_labels() {
        let a = Matrix::identity(2);
        assert!(matches!(
            make_logistic(a, vec![1.0, 0.0], 1.0),
            Err(ProblemError::BadLabel { row: 1, .. })
        ));
    }

    #[test]
    fn nonconvex_diagonals_cancel_exactly() {
        let a = matrix(
            4,
            3,
            &[1.0, 0.0, 2.0, 0.5, 1.0, 0.0, 2.0, 1.0, 1.0, 0.0, 0.5, 1.5],
        );
        let (problem, _) = make_nonconvex_sum(a, vec![1.0, -1.0, 0.5], 7).unwrap();
        if let ProblemData::Nonconvex { diag, .. } = &problem.data {
            for j in 0..3 {
                let col_sum: f64 = (0..4).map(|i| diag.at(i, j)).sum();
                assert_eq!(col_sum, 0.0);
                for i in 0..4 {
                    assert_eq!(diag.at(i, j).abs(), DIAG_PERTURBATION);
                }
            }
        } else {
            panic!("wrong variant");
        }
    }

    #[test]
    fn nonconvex_rejects_odd_n() {
        let a = matrix(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            make_nonconvex_sum(a, vec![0.0, 0.0], 1),
            Err(ProblemError::OddComponentCount(3))
        ));
    }

    #[test]
    fn nonconvex_rejects_singular_mean_hessian() {
        // Both rows along e_1 ⇒ Ā singular in the e_2 direction.
        let a = matrix(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        assert!(matches!(
            make_nonconvex_sum(a, vec![0.0, 0.0], 1),
            Err(ProblemError::NotStronglyConvex)
        ));
    }

    #[test]
    fn nonconvex_same_seed_is_deterministic() {
        let a = matrix(4, 2, &[1.0, 0.0, 0.5, 1.0, 2.0, 1.0, 0.0, 0.5]);
        let (p1, _) = make_nonconvex_sum(a.clone(), vec![1.0, 2.0], 42).unwrap();
        let (p2, _) = make_nonconvex_sum(a, vec![1.0, 2.0], 42).unwrap();
        let x = [0.3, -1.1];
        for i in 0..4 {
            assert_eq!(p1.component_value(i, &x), p2.component_value(i, &x));
        }
    }

    #[test]
    fn solve_ridge_matches_direct_2x2() {
        // (AᵀA/n + λI)x = Aᵀy/n with A = I, y = (2,2), λ = 1 ⇒ (3/2)x = (1,1).
        let (problem, _) = make_ridge(Matrix::identity(2), vec![2.0, 2.0], 1.0).unwrap();
        let cert = solve_minimizer(&problem).unwrap();
        assert!(dist_sq(&cert.x_star, &[2.0 / 3.0, 2.0 / 3.0]) < 1e-28);
        assert!(cert.grad_residual <= 1e-10 * (1.0 + norm(&cert.x_star)));
    }

    #[test]
    fn solve_interpolation_gives_zero_component_grads() {
        // y = A x̄ exactly, λ = 0, full-rank A ⇒ every h_i = 0.
        let a = matrix(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let xbar = [0.5, -2.0];
        let mut y = vec![0.0; 3];
        a.matvec(&xbar, &mut y);
        let (problem, _) = make_ridge(a, y, 0.0).unwrap();
        let cert = solve_minimizer(&problem).unwrap();
        for h in &cert.component_grads {
            assert!(norm(h) < 1e-12);
        }
    }

    #[test]
    fn solve_logistic_hits_tolerance() {
        let a = matrix(4, 2, &[1.0, 0.2, 0.8, -0.3, -1.0, 0.5, -0.7, -0.9]);
        let y = vec![1.0, 1.0, -1.0, -1.0];
        let (problem, _) = make_logistic(a, y, 1.0).unwrap();
        let cert = solve_minimizer(&problem).unwrap();
        assert!(cert.grad_residual <= 1e-12 * (1.0 + norm(&cert.x_star)));
    }

    #[test]
    fn solve_logistic_reports_iteration_cap() {
        // Separable data with a vanishing regularizer: the condition
        // number makes the 10^6-iteration cap unreachable, and the solver
        // must fail with the residual it got stuck at.
        let a = matrix(2, 1, &[1.0, -1.0]);
        let (problem, _) = make_logistic(a, vec![1.0, -1.0], 1e-13).unwrap();
        match solve_minimizer(&problem) {
            Err(ProblemError::SolveDidNotConverge {
                max_iters,
                residual,
            }) => {
                assert_eq!(max_iters, 1_000_000);
                assert!(residual.is_finite() && residual > 0.0);
            }
            other => panic!("expected the iteration cap, got {other:?}"),
        }
    }

    #[test]
    fn full_value_and_grad_are_component_averages() {
        let a = matrix(
            4,
            3,
            &[
                0.1, 1.0, -0.4, 0.9, -1.2, 0.3, 0.5, 0.5, 0.5, -1.0, 0.0, 2.0,
            ],
        );
        let y = vec![1.0, -1.0, 1.0, -1.0];
        for (problem, _) in [
            make_ridge(a.clone(), vec![0.4, -0.2, 1.0, 0.9], 0.3).unwrap(),
            make_logistic(a.clone(), y, 0.5).unwrap(),
            make_nonconvex_sum(a.clone(), vec![0.2, -0.5, 1.0], 3).unwrap(),
        ] {
            let x = [0.7, -0.3, 0.2];
            let avg: f64 = (0..4).map(|i| problem.component_value(i, &x)).sum::<f64>() / 4.0;
            let fx = problem.value(&x);
            assert!(
                (fx - avg).abs() <= 1e-12 * (1.0 + fx.abs()),
                "kind {:?}",
                problem.kind()
            );

            let mut g = [0.0; 3];
            problem.grad(&x, &mut g);
            let mut avg_g = [0.0; 3];
            let mut gi = [0.0; 3];
            for i in 0..4 {
                problem.component_grad(i, &x, &mut gi);
                axpy(0.25, &gi, &mut avg_g);
            }
            assert!(dist_sq(&g, &avg_g) <= 1e-24 * (1.0 + norm_sq(&g)));
        }
    }
}
