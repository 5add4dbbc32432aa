//! Shared helpers for the integration suites: independent oracles
//! (power iteration, finite differences) and seeded random instances.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sgdsamp_core::linalg::{axpy, dot, norm, Matrix};
use sgdsamp_core::problem::FiniteSumProblem;
use sgdsamp_core::sampling::SamplingScheme;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize, d: usize) -> Matrix {
    let data: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
    Matrix::from_vec(n, d, data).unwrap()
}

/// Random symmetric PSD d×d matrix of rank min(d, terms).
pub fn random_psd<R: Rng>(rng: &mut R, d: usize, terms: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for _ in 0..terms {
        let v = gaussian_vec(rng, d);
        let w: f64 = rng.gen_range(0.1..2.0);
        m.add_scaled_outer(w, &v);
    }
    m
}

/// Component-gradient-like vectors with zero mean, as produced by a true
/// minimizer. Mean-centering is exact up to roundoff.
pub fn mean_zero_vectors<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut h: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vec(rng, d)).collect();
    let mut mean = vec![0.0; d];
    for hi in &h {
        axpy(1.0, hi, &mut mean);
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    for hi in h.iter_mut() {
        for (v, m) in hi.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    h
}

/// λ_max by power iteration with Rayleigh-quotient convergence; fully
/// independent of the Jacobi path in the library.
pub fn power_iteration_lmax(m: &Matrix, seed: u64) -> f64 {
    let d = m.rows();
    let mut rng = rng(seed);
    let mut v = gaussian_vec(&mut rng, d);
    let s = norm(&v);
    for x in v.iter_mut() {
        *x /= s;
    }
    let mut mv = vec![0.0; d];
    let mut lambda = 0.0;
    for _ in 0..200_000 {
        m.matvec(&v, &mut mv);
        let new_lambda = dot(&v, &mv);
        let s = norm(&mv);
        if s == 0.0 {
            return 0.0;
        }
        for (x, y) in v.iter_mut().zip(&mv) {
            *x = y / s;
        }
        if (new_lambda - lambda).abs() <= 1e-13 * new_lambda.abs().max(1.0) {
            return new_lambda;
        }
        lambda = new_lambda;
    }
    lambda
}

/// (λ_min, λ_max) of a symmetric PSD matrix via power iteration on M and
/// on cI − M, with c a Gershgorin upper bound.
pub fn power_iteration_extremes(m: &Matrix, seed: u64) -> (f64, f64) {
    let d = m.rows();
    let lmax = power_iteration_lmax(m, seed);
    let mut c = 0.0_f64;
    for i in 0..d {
        let row_sum: f64 = (0..d).map(|j| m.at(i, j).abs()).sum();
        c = c.max(row_sum);
    }
    let mut shifted = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let v = if i == j { c - m.at(i, j) } else { -m.at(i, j) };
            shifted.set(i, j, v);
        }
    }
    let lmin = c - power_iteration_lmax(&shifted, seed ^ 0x5bd1e995);
    (lmin, lmax)
}

/// Central-difference gradient of a component function.
pub fn finite_diff_component_grad(problem: &FiniteSumProblem, i: usize, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = 1e-6 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let fp = problem.component_value(i, &xp);
        xp[j] = x[j] - h;
        let fm = problem.component_value(i, &xp);
        xp[j] = x[j];
        g[j] = (fp - fm) / (2.0 * h);
    }
    g
}

/// All component gradients at one point.
pub fn component_grads(problem: &FiniteSumProblem, x: &[f64]) -> Vec<Vec<f64>> {
    let d = problem.dim();
    (0..problem.n())
        .map(|i| {
            let mut g = vec![0.0; d];
            problem.component_grad(i, x, &mut g);
            g
        })
        .collect()
}

/// A random fixed-cardinality scheme over n elements (single-element,
/// τ-nice, equal-size partition when possible, or full batch).
pub fn random_fixed_cardinality_scheme<R: Rng>(rng: &mut R, n: usize) -> SamplingScheme {
    match rng.gen_range(0..4) {
        0 => {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
            let total: f64 = raw.iter().sum();
            SamplingScheme::single_element(raw.iter().map(|v| v / total).collect()).unwrap()
        }
        1 => SamplingScheme::tau_nice(n, rng.gen_range(1..=n)).unwrap(),
        2 if n % 2 == 0 => {
            let mut idx: Vec<usize> = (0..n).collect();
            for k in (1..n).rev() {
                idx.swap(k, rng.gen_range(0..=k));
            }
            let groups: Vec<Vec<usize>> = idx.chunks(2).map(|c| c.to_vec()).collect();
            let raw: Vec<f64> = (0..groups.len()).map(|_| rng.gen_range(0.2..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let q: Vec<f64> = raw.iter().map(|v| v / total).collect();
            SamplingScheme::partition(groups, q).unwrap()
        }
        _ => SamplingScheme::full_batch(n).unwrap(),
    }
}

/// A fixed-cardinality scheme with uniform marginals p_i = τ/n, the
/// domain on which the chain ℒ_max ≤ L_max is proved: τ-nice, uniform
/// single-element, size-proportional equal partitions, or full batch.
pub fn random_uniform_marginal_scheme<R: Rng>(rng: &mut R, n: usize) -> SamplingScheme {
    match rng.gen_range(0..4) {
        0 => SamplingScheme::single_element_uniform(n).unwrap(),
        1 => SamplingScheme::tau_nice(n, rng.gen_range(1..=n)).unwrap(),
        2 if n % 2 == 0 => {
            let mut idx: Vec<usize> = (0..n).collect();
            for k in (1..n).rev() {
                idx.swap(k, rng.gen_range(0..=k));
            }
            let groups: Vec<Vec<usize>> = idx.chunks(2).map(|c| c.to_vec()).collect();
            let q = vec![2.0 / n as f64; groups.len()];
            SamplingScheme::partition(groups, q).unwrap()
        }
        _ => SamplingScheme::full_batch(n).unwrap(),
    }
}

/// Any proper scheme, fixed-cardinality or not.
pub fn random_scheme<R: Rng>(rng: &mut R, n: usize) -> SamplingScheme {
    if rng.gen_bool(0.3) {
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.15..1.0)).collect();
        SamplingScheme::independent(p).unwrap()
    } else {
        random_fixed_cardinality_scheme(rng, n)
    }
}
