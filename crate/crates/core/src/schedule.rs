//! Stepsize schedules, optimal mini-batch sizes and importance sampling.
//!
//! Turns the constants ℒ, σ², μ into actionable plans: the ε-target
//! constant stepsize and its iteration count, the constant-to-decreasing
//! switching schedule, the batch size τ* minimizing total complexity for
//! uniform independent and τ-nice sampling, and the probability
//! constructions of importance sampling (α-interpolation, water-filling,
//! partially biased variants).

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::constants::{self, ConstantsError, ConstantsReport};
use crate::problem::{FiniteSumProblem, MinimizerCertificate, SmoothnessSpec};
use crate::sampling::SamplingScheme;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("budget {budget} out of range (0, {n}]")]
    BadBudget { budget: f64, n: usize },
    #[error("weights must not all be zero")]
    ZeroWeights,
    #[error("batch size {tau} out of range [{lo}, {n}]")]
    BadBatchSize { tau: usize, lo: usize, n: usize },
    #[error("family needs at least two components")]
    GroundSetTooSmall,
}

/// Constant stepsize for target accuracy ε: γ = min{1/(2ℒ), εμ/(4σ²)}.
/// With σ² = 0 the noise term is +∞ and γ = 1/(2ℒ).
pub fn constant_stepsize(cl: f64, sigma_sq: f64, mu: f64, epsilon: f64) -> f64 {
    let smooth = 1.0 / (2.0 * cl);
    let noise = epsilon * mu / (4.0 * sigma_sq);
    smooth.min(noise)
}

/// Iterations guaranteeing E‖x^k − x*‖² ≤ ε from squared initial distance
/// r0²: ⌈max{2ℒ/μ, 4σ²/(εμ²)}·ln(2r0²/ε)⌉, or 0 when 2r0² ≤ ε already.
pub fn iteration_bound(cl: f64, sigma_sq: f64, mu: f64, epsilon: f64, r0_sq: f64) -> u64 {
    if 2.0 * r0_sq <= epsilon {
        return 0;
    }
    let rate = (2.0 * cl / mu).max(4.0 * sigma_sq / (epsilon * mu * mu));
    let k = rate * libm::log(2.0 * r0_sq / epsilon);
    let k = libm::ceil(k);
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k.max(0.0) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepsizeMode {
    Constant,
    Switching,
}

/// A stepsize rule γ^k: either constant, or constant 1/(2ℒ) up to
/// k_switch = 4⌈ℒ/μ⌉ and (2k+1)/((k+1)²μ) afterwards.
#[derive(Debug, Clone)]
pub struct StepsizePlan {
    pub mode: StepsizeMode,
    /// The constant value; for switching plans, the pre-switch value 1/(2ℒ).
    pub gamma: f64,
    pub k_switch: Option<u64>,
    pub mu: f64,
    pub epsilon: Option<f64>,
    pub k_target: Option<u64>,
}

impl StepsizePlan {
    pub fn constant(gamma: f64) -> Self {
        StepsizePlan {
            mode: StepsizeMode::Constant,
            gamma,
            k_switch: None,
            mu: f64::NAN,
            epsilon: None,
            k_target: None,
        }
    }

    /// Constant plan from the ε-target rule, with its iteration count.
    pub fn constant_for(cl: f64, sigma_sq: f64, mu: f64, epsilon: f64, r0_sq: f64) -> Self {
        let gamma = constant_stepsize(cl, sigma_sq, mu, epsilon);
        let k_target = iteration_bound(cl, sigma_sq, mu, epsilon, r0_sq);
        StepsizePlan {
            mode: StepsizeMode::Constant,
            gamma,
            k_switch: None,
            mu,
            epsilon: Some(epsilon),
            k_target: Some(k_target),
        }
    }

    /// Switching plan: γ^k = 1/(2ℒ) while k ≤ 4⌈ℒ/μ⌉, then the
    /// O(1/k) decreasing rule. Requires ℒ ≥ μ > 0.
    pub fn switching(cl: f64, mu: f64) -> Self {
        let k_switch = 4.0 * libm::ceil(cl / mu);
        StepsizePlan {
            mode: StepsizeMode::Switching,
            gamma: 1.0 / (2.0 * cl),
            k_switch: Some(k_switch as u64),
            mu,
            epsilon: None,
            k_target: None,
        }
    }

    pub fn stepsize(&self, k: u64) -> f64 {
        match self.mode {
            StepsizeMode::Constant => self.gamma,
            StepsizeMode::Switching => {
                let k_switch = self.k_switch.unwrap_or(0);
                if k <= k_switch {
                    self.gamma
                } else {
                    let kf = k as f64;
                    (2.0 * kf + 1.0) / ((kf + 1.0) * (kf + 1.0) * self.mu)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchFamily {
    /// Independent sampling with uniform marginals p_i = τ/n.
    IndependentUniform,
    /// τ-nice sampling.
    TauNice,
}

/// The batch-size planner for one family: evaluators for the smoothness
/// term l(τ), the noise term r(τ), the stepsize γ(τ) = ½min{1/l, 1/r},
/// the total complexity T(τ) = (2τ/μ)max{l, r}, and the minimizer τ*.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    pub family: BatchFamily,
    pub n: usize,
    pub l_full: f64,
    pub l_max: f64,
    pub h_bar: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub tau_star: usize,
}

impl BatchPlan {
    pub fn independent(
        l_full: f64,
        l_max: f64,
        h_bar: f64,
        mu: f64,
        epsilon: f64,
        n: usize,
    ) -> Result<Self, ScheduleError> {
        if n < 1 {
            return Err(ScheduleError::GroundSetTooSmall);
        }
        let mut plan = BatchPlan {
            family: BatchFamily::IndependentUniform,
            n,
            l_full,
            l_max,
            h_bar,
            mu,
            epsilon,
            tau_star: 1,
        };
        plan.tau_star = plan.compute_tau_star();
        Ok(plan)
    }

    pub fn tau_nice(
        l_full: f64,
        l_max: f64,
        h_bar: f64,
        mu: f64,
        epsilon: f64,
        n: usize,
    ) -> Result<Self, ScheduleError> {
        if n < 2 {
            return Err(ScheduleError::GroundSetTooSmall);
        }
        let mut plan = BatchPlan {
            family: BatchFamily::TauNice,
            n,
            l_full,
            l_max,
            h_bar,
            mu,
            epsilon,
            tau_star: 1,
        };
        plan.tau_star = plan.compute_tau_star();
        Ok(plan)
    }

    /// l(τ), the smoothness part of the iteration bound.
    pub fn smoothness_term(&self, tau: usize) -> f64 {
        let (nf, tf) = (self.n as f64, tau as f64);
        match self.family {
            BatchFamily::IndependentUniform => self.l_full + (1.0 / tf - 1.0 / nf) * self.l_max,
            BatchFamily::TauNice => {
                nf * (tf - 1.0) / (tf * (nf - 1.0)) * self.l_full
                    + (nf - tf) / (tf * (nf - 1.0)) * self.l_max
            }
        }
    }

    /// r(τ), the noise part of the iteration bound.
    pub fn noise_term(&self, tau: usize) -> f64 {
        let (nf, tf) = (self.n as f64, tau as f64);
        let scale = 2.0 / (self.mu * self.epsilon);
        match self.family {
            BatchFamily::IndependentUniform => scale * (1.0 / tf - 1.0 / nf) * self.h_bar,
            BatchFamily::TauNice => scale * (nf - tf) / ((nf - 1.0) * tf) * self.h_bar,
        }
    }

    /// T(τ) = (2τ/μ)·max{l(τ), r(τ)}: iterations times gradients per
    /// iteration.
    pub fn total_complexity(&self, tau: usize) -> f64 {
        let tf = tau as f64;
        2.0 * tf / self.mu * self.smoothness_term(tau).max(self.noise_term(tau))
    }

    /// γ(τ) = ½·min{1/l(τ), 1/r(τ)}; the noise branch disappears when
    /// r(τ) = 0.
    pub fn stepsize(&self, tau: usize) -> f64 {
        let l = self.smoothness_term(tau);
        let r = self.noise_term(tau);
        0.5 * (1.0 / l).min(1.0 / r)
    }

    fn compute_tau_star(&self) -> usize {
        let l1 = self.smoothness_term(1);
        let r1 = self.noise_term(1);
        if r1 <= l1 || self.h_bar == 0.0 {
            return 1;
        }
        let nf = self.n as f64;
        let c = 2.0 * self.h_bar / (self.mu * self.epsilon);
        let real = match self.family {
            BatchFamily::IndependentUniform => {
                nf * (c - self.l_max) / (c - self.l_max + nf * self.l_full)
            }
            BatchFamily::TauNice => {
                nf * (self.l_full - self.l_max + c) / (nf * self.l_full - self.l_max + c)
            }
        };
        let lo = (libm::floor(real) as i64).clamp(1, self.n as i64) as usize;
        let hi = (libm::ceil(real) as i64).clamp(1, self.n as i64) as usize;
        if self.total_complexity(lo) <= self.total_complexity(hi) {
            lo
        } else {
            hi
        }
    }

    /// (τ, γ(τ)) over a τ range.
    pub fn stepsize_curve(&self, taus: impl IntoIterator<Item = usize>) -> Vec<(usize, f64)> {
        taus.into_iter()
            .map(|tau| (tau, self.stepsize(tau)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportanceConstruction {
    SingleAlpha,
    IndependentAlpha,
    PartiallyBiasedSingle,
    PartiallyBiasedIndependent,
}

/// Importance-sampling probabilities with the interpolation weight that
/// produced them. `p` sums to 1 for single-element constructions and to τ
/// for independent ones.
#[derive(Debug, Clone)]
pub struct ImportancePlan {
    pub p: Vec<f64>,
    pub alpha: f64,
    pub construction: ImportanceConstruction,
}

/// α-interpolated single-element importance sampling: p = α·p^ℒ + (1−α)·p^σ
/// with p^ℒ ∝ L_i, p^σ ∝ ‖h_i‖ and α = L̄/(2σ²_opt/(εμ) + L̄). With all
/// h_i = 0 this degrades to α = 1 and the pure smoothness probabilities.
pub fn single_element_importance(
    l_i: &[f64],
    h_norms: &[f64],
    mu: f64,
    epsilon: f64,
) -> Result<ImportancePlan, ScheduleError> {
    let n = l_i.len();
    let sum_l: f64 = l_i.iter().sum();
    if sum_l <= 0.0 {
        return Err(ScheduleError::ZeroWeights);
    }
    let sum_h: f64 = h_norms.iter().sum();
    let p_l: Vec<f64> = l_i.iter().map(|&l| l / sum_l).collect();
    if sum_h == 0.0 {
        return Ok(ImportancePlan {
            p: p_l,
            alpha: 1.0,
            construction: ImportanceConstruction::SingleAlpha,
        });
    }
    let l_bar = sum_l / n as f64;
    let sigma_opt = (sum_h / n as f64) * (sum_h / n as f64);
    let alpha = l_bar / (2.0 * sigma_opt / (epsilon * mu) + l_bar);
    let p: Vec<f64> = p_l
        .iter()
        .zip(h_norms)
        .map(|(&pl, &h)| alpha * pl + (1.0 - alpha) * h / sum_h)
        .collect();
    Ok(ImportancePlan {
        p,
        alpha,
        construction: ImportanceConstruction::SingleAlpha,
    })
}

/// Partially biased single-element sampling: p̂_i = ½·p_i^ℒ + 1/(2n),
/// which guarantees ℒ_max ≤ 2L̄ and σ² ≤ 2h̄.
pub fn partially_biased_single(l_i: &[f64]) -> Result<ImportancePlan, ScheduleError> {
    let n = l_i.len();
    let sum_l: f64 = l_i.iter().sum();
    if sum_l <= 0.0 {
        return Err(ScheduleError::ZeroWeights);
    }
    let half_uniform = 0.5 / n as f64;
    let p: Vec<f64> = l_i
        .iter()
        .map(|&l| 0.5 * l / sum_l + half_uniform)
        .collect();
    Ok(ImportancePlan {
        p,
        alpha: 0.5,
        construction: ImportanceConstruction::PartiallyBiasedSingle,
    })
}

/// Water-filling: minimizes max_i w_i/p_i subject to Σp = budget and
/// 0 ≤ p_i ≤ 1, by proportional assignment with iterative clipping.
/// Zero-weight entries receive probability only if the clipped entries
/// cannot absorb the budget. Terminates in at most n rounds.
pub fn waterfill(weights: &[f64], budget: f64) -> Result<Vec<f64>, ScheduleError> {
    let n = weights.len();
    if !budget.is_finite() || budget <= 0.0 || budget > n as f64 + 1e-12 {
        return Err(ScheduleError::BadBudget { budget, n });
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(ScheduleError::ZeroWeights);
    }
    let mut p = vec![0.0; n];
    let mut active: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
    let mut remaining = budget.min(n as f64);
    loop {
        let active_weight: f64 = active.iter().map(|&i| weights[i]).sum();
        if active.is_empty() || active_weight <= 0.0 {
            break;
        }
        let scale = remaining / active_weight;
        let mut clipped = false;
        active.retain(|&i| {
            if scale * weights[i] >= 1.0 {
                p[i] = 1.0;
                remaining -= 1.0;
                clipped = true;
                false
            } else {
                true
            }
        });
        if !clipped {
            for &i in &active {
                p[i] = scale * weights[i];
            }
            remaining = 0.0;
            break;
        }
    }
    // All positive weights clipped but budget remains: spread the rest
    // evenly over the zero-weight entries, capped at 1.
    if remaining > 1e-12 {
        let mut open: Vec<usize> = (0..n).filter(|&i| p[i] < 1.0).collect();
        while remaining > 1e-12 && !open.is_empty() {
            let share = remaining / open.len() as f64;
            let mut next = Vec::new();
            for &i in &open {
                let take = share.min(1.0 - p[i]);
                p[i] += take;
                remaining -= take;
                if p[i] < 1.0 {
                    next.push(i);
                }
            }
            open = next;
        }
    }
    Ok(p)
}

/// Raises sub-unit entries proportionally until Σp reaches `target`,
/// clipping at 1. Entries at zero are only raised when everything else
/// is saturated.
fn top_up(p: &mut [f64], target: f64) {
    for _ in 0..=p.len() {
        let current: f64 = p.iter().sum();
        let deficit = target - current;
        if deficit <= 1e-12 * target.max(1.0) {
            return;
        }
        let sub: Vec<usize> = (0..p.len()).filter(|&i| p[i] < 1.0).collect();
        if sub.is_empty() {
            return;
        }
        let sub_sum: f64 = sub.iter().map(|&i| p[i]).sum();
        if sub_sum <= 0.0 {
            let share = deficit / sub.len() as f64;
            for &i in &sub {
                p[i] = (p[i] + share).min(1.0);
            }
            continue;
        }
        for &i in &sub {
            p[i] = (p[i] + deficit * p[i] / sub_sum).min(1.0);
        }
    }
}

/// Importance sampling for independent mini-batches with E|S| = τ:
/// water-filled smoothness probabilities on budget ατ plus water-filled
/// noise probabilities on budget (1−α)τ, clipped at 1 and topped up to
/// Σp = τ. α solves the bound trade-off; with all h_i = 0 it is exactly 1.
pub fn independent_importance(
    l_i: &[f64],
    h_norms: &[f64],
    mu: f64,
    epsilon: f64,
    tau: usize,
) -> Result<ImportancePlan, ScheduleError> {
    let n = l_i.len();
    if tau < 1 || tau > n {
        return Err(ScheduleError::BadBatchSize { tau, lo: 1, n });
    }
    let sum_l: f64 = l_i.iter().sum();
    if sum_l <= 0.0 {
        return Err(ScheduleError::ZeroWeights);
    }
    let sum_h: f64 = h_norms.iter().sum();
    if sum_h == 0.0 {
        let p = waterfill(l_i, tau as f64)?;
        return Ok(ImportancePlan {
            p,
            alpha: 1.0,
            construction: ImportanceConstruction::IndependentAlpha,
        });
    }
    let l_bar = sum_l / n as f64;
    let tf = tau as f64;
    let mean_h = sum_h / n as f64;
    let a = 2.0 * mean_h * mean_h / (epsilon * mu * l_bar);
    // α = (τ−a−1 + √(4τ + (τ−a−1)²))/(2τ); for a+1 > τ the direct form
    // cancels catastrophically, so the rationalized twin is used there.
    let alpha = if tf - a - 1.0 >= 0.0 {
        (tf - a - 1.0 + libm::sqrt(4.0 * tf + (tf - a - 1.0) * (tf - a - 1.0))) / (2.0 * tf)
    } else {
        let b = a + 1.0 - tf;
        2.0 / (b + libm::sqrt(b * b + 4.0 * tf))
    };
    if alpha >= 1.0 {
        // Noise small enough that the weight rounds to one: pure
        // smoothness water-filling, same as the exact zero-noise branch.
        let p = waterfill(l_i, tf)?;
        return Ok(ImportancePlan {
            p,
            alpha: 1.0,
            construction: ImportanceConstruction::IndependentAlpha,
        });
    }
    let p_l = waterfill(l_i, alpha * tf)?;
    let p_h = waterfill(h_norms, (1.0 - alpha) * tf)?;
    let mut p: Vec<f64> = p_l
        .iter()
        .zip(&p_h)
        .map(|(&a, &b)| (a + b).min(1.0))
        .collect();
    top_up(&mut p, tf);
    Ok(ImportancePlan {
        p,
        alpha,
        construction: ImportanceConstruction::IndependentAlpha,
    })
}

/// Partially biased independent sampling for τ ≥ 2:
/// p_i = min{1, p_i^ℒ(τ/2) + τ/(2n)}, topped up to Σp = τ. Guarantees
/// ℒ_max ≤ (1 + 2/τ)·L̄ and σ² ≤ (2/τ − 1/n)·h̄.
pub fn partially_biased_independent(
    l_i: &[f64],
    tau: usize,
    n: usize,
) -> Result<ImportancePlan, ScheduleError> {
    if tau < 2 || tau > n {
        return Err(ScheduleError::BadBatchSize { tau, lo: 2, n });
    }
    let tf = tau as f64;
    let p_l = waterfill(l_i, tf / 2.0)?;
    let uniform = tf / (2.0 * n as f64);
    let mut p: Vec<f64> = p_l.iter().map(|&v| (v + uniform).min(1.0)).collect();
    top_up(&mut p, tf);
    Ok(ImportancePlan {
        p,
        alpha: 0.5,
        construction: ImportanceConstruction::PartiallyBiasedIndependent,
    })
}

/// Iteration bound of partially biased single-element sampling, with the
/// interpolation weight pinned at ½: max{4L̄/(αμ), 8h̄/(εμ²)}.
pub fn pb_single_iteration_bound(l_bar: f64, h_bar: f64, mu: f64, epsilon: f64) -> f64 {
    let alpha = 0.5;
    (4.0 * l_bar / (alpha * mu)).max(8.0 * h_bar / (epsilon * mu * mu))
}

/// Iteration bound of partially biased independent sampling at batch size
/// τ, with the interpolation weight pinned at ½:
/// max{(1 − 2/τ)·2L̄/(αμ), (2/τ − 1/n)·8h̄/(εμ²)}.
pub fn pb_independent_iteration_bound(
    l_bar: f64,
    h_bar: f64,
    mu: f64,
    epsilon: f64,
    tau: usize,
    n: usize,
) -> f64 {
    let alpha = 0.5;
    let (tf, nf) = (tau as f64, n as f64);
    ((1.0 - 2.0 / tf) * 2.0 * l_bar / (alpha * mu))
        .max((2.0 / tf - 1.0 / nf) * 8.0 * h_bar / (epsilon * mu * mu))
}

fn uniform_marginals(p: &[f64]) -> bool {
    p.windows(2).all(|w| w[0] == w[1])
}

/// Assembles the full constants-and-plan report for a (problem, scheme, ε)
/// triple, with the initial squared distance r0² fixing the iteration
/// count.
pub fn build_report(
    problem: &FiniteSumProblem,
    spec: &SmoothnessSpec,
    cert: &MinimizerCertificate,
    scheme: &SamplingScheme,
    epsilon: f64,
    r0_sq: f64,
) -> Result<ConstantsReport, ConstantsError> {
    let bound = constants::expected_smoothness_bound(problem, spec, scheme)?;
    let sigma_sq = constants::gradient_noise(scheme, &cert.component_grads);
    let h_bar = cert.h_bar();
    let gamma = constant_stepsize(bound.value, sigma_sq, spec.mu, epsilon);
    let k_target = iteration_bound(bound.value, sigma_sq, spec.mu, epsilon, r0_sq);
    let batch_plan = match scheme {
        SamplingScheme::TauNice { n, .. } => {
            BatchPlan::tau_nice(spec.full, spec.max, h_bar, spec.mu, epsilon, *n).ok()
        }
        SamplingScheme::Independent { p } if uniform_marginals(p) => {
            BatchPlan::independent(spec.full, spec.max, h_bar, spec.mu, epsilon, p.len()).ok()
        }
        _ => None,
    };
    Ok(ConstantsReport {
        scheme: scheme.descriptor(),
        n: problem.n(),
        d: problem.dim(),
        epsilon,
        l_full: spec.full,
        l_max: spec.max,
        l_bar: spec.mean,
        mu: spec.mu,
        h_bar,
        expected_smoothness: bound.value,
        provenance: bound.provenance,
        lmax_enumerated: bound.enumerated,
        lmax_pairwise_bound: bound.pairwise,
        sigma_sq,
        gamma,
        k_target,
        r0_sq,
        tau_star: batch_plan.as_ref().map(|p| p.tau_star),
        total_complexity: batch_plan.as_ref().map(|p| p.total_complexity(p.tau_star)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stepsize_cases() {
        // Zero noise takes the smoothness branch.
        assert_eq!(constant_stepsize(2.0, 0.0, 1.0, 0.5), 0.25);
        // ℒ=σ²=μ=ε=1: min(0.5, 0.25).
        assert_eq!(constant_stepsize(1.0, 1.0, 1.0, 1.0), 0.25);
        // Huge ε caps at 1/(2ℒ).
        assert_eq!(constant_stepsize(1.0, 1.0, 1.0, 1e300), 0.5);
    }

    #[test]
    fn iteration_bound_substitution() {
        // ℒ=2, σ²=4, μ=1, ε=0.1, r0²=1 ⇒ ⌈160·ln 20⌉ = 480.
        assert_eq!(iteration_bound(2.0, 4.0, 1.0, 0.1, 1.0), 480);
        // Already converged.
        assert_eq!(iteration_bound(2.0, 4.0, 1.0, 1.0, 0.5), 0);
        // Zero noise reduces to the gradient-descent count.
        let k = iteration_bound(3.0, 0.0, 1.0, 0.01, 1.0);
        let expected = libm::ceil(6.0 * libm::log(200.0)) as u64;
        assert_eq!(k, expected);
    }

    #[test]
    fn switching_plan_matches_hand_computation() {
        // ℒ = μ ⇒ k_switch = 4, γ₅ = 11/(36μ).
        let plan = StepsizePlan::switching(1.0, 1.0);
        assert_eq!(plan.k_switch, Some(4));
        assert_eq!(plan.stepsize(4), 0.5);
        assert!((plan.stepsize(5) - 11.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn switching_stepsize_stays_below_cap_and_decreases() {
        for &(cl, mu) in &[(1.0, 1.0), (10.0, 0.3), (7.5, 7.5), (100.0, 1.0)] {
            let plan = StepsizePlan::switching(cl, mu);
            let k_switch = plan.k_switch.unwrap();
            let cap = 1.0 / (2.0 * cl);
            let mut prev = f64::INFINITY;
            for k in k_switch..k_switch + 500 {
                let g = plan.stepsize(k);
                if k > k_switch {
                    assert!(g <= cap + 1e-15, "gamma {g} above cap {cap} at k {k}");
                    assert!(g < prev, "not strictly decreasing at k {k}");
                }
                prev = g;
            }
            // kγ_k → 2/μ.
            let far = 10_000_000u64;
            let tail = far as f64 * plan.stepsize(far);
            assert!((tail - 2.0 / mu).abs() < 1e-3 * (2.0 / mu));
        }
    }

    #[test]
    fn batch_plans_zero_noise_pick_tau_one() {
        let plan = BatchPlan::independent(1.0, 10.0, 0.0, 1.0, 0.01, 100).unwrap();
        assert_eq!(plan.tau_star, 1);
        let plan = BatchPlan::tau_nice(1.0, 10.0, 0.0, 1.0, 0.01, 100).unwrap();
        assert_eq!(plan.tau_star, 1);
    }

    #[test]
    fn batch_plan_smoothness_dominated_picks_tau_one() {
        // r(1) ≤ l(1) forces τ* = 1 even with noise present.
        let plan = BatchPlan::tau_nice(1.0, 5.0, 1e-6, 1.0, 1.0, 50).unwrap();
        assert!(plan.noise_term(1) <= plan.smoothness_term(1));
        assert_eq!(plan.tau_star, 1);
    }

    #[test]
    fn batch_plan_matches_exhaustive_scan() {
        let plan = BatchPlan::independent(1.0, 10.0, 50.0, 1.0, 0.01, 100).unwrap();
        let scan = (1..=100)
            .min_by(|&a, &b| {
                plan.total_complexity(a)
                    .partial_cmp(&plan.total_complexity(b))
                    .unwrap()
            })
            .unwrap();
        assert_eq!(plan.tau_star, scan);
    }

    #[test]
    fn tau_nice_stepsize_curve_is_monotone_and_ends_at_gd() {
        let plan = BatchPlan::tau_nice(2.0, 9.0, 4.0, 0.7, 0.01, 60).unwrap();
        let curve = plan.stepsize_curve(1..=60);
        for w in curve.windows(2) {
            assert!(
                w[1].1 >= w[0].1 - 1e-15,
                "stepsize decreased at tau {}",
                w[1].0
            );
        }
        // r(n) = 0, so γ(n) = 1/(2l(n)) = 1/(2L).
        let last = curve.last().unwrap();
        assert!((last.1 - 1.0 / (2.0 * plan.smoothness_term(60))).abs() < 1e-15);
        assert!((last.1 - 1.0 / (2.0 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn single_importance_zero_noise_is_pure_smoothness() {
        let l = [1.0, 3.0];
        let plan = single_element_importance(&l, &[0.0, 0.0], 1.0, 0.1).unwrap();
        assert_eq!(plan.alpha, 1.0);
        assert_eq!(plan.p, vec![0.25, 0.75]);
    }

    #[test]
    fn single_importance_is_probability_vector() {
        let l = [1.0, 3.0, 0.5, 2.0];
        let h = [0.2, 0.0, 1.0, 0.4];
        let plan = single_element_importance(&l, &h, 0.7, 0.05).unwrap();
        let sum: f64 = plan.p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(plan.p.iter().all(|&pi| pi > 0.0 && pi <= 1.0));
        assert!(plan.alpha > 0.0 && plan.alpha < 1.0);
    }

    #[test]
    fn partially_biased_single_uniform_for_uniform_l() {
        let plan = partially_biased_single(&[2.0, 2.0, 2.0, 2.0]).unwrap();
        for &pi in &plan.p {
            assert!((pi - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn waterfill_hand_example() {
        // w = (10,1,1), τ = 2: clip index 0 to 1, split the rest evenly.
        let p = waterfill(&[10.0, 1.0, 1.0], 2.0).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
        assert!((p[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn waterfill_no_clipping_is_proportional() {
        let p = waterfill(&[1.0, 2.0, 3.0], 1.5).unwrap();
        for (pi, w) in p.iter().zip([1.0, 2.0, 3.0]) {
            assert!((pi - 1.5 * w / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn waterfill_full_budget_is_all_ones() {
        let p = waterfill(&[5.0, 0.1, 2.0], 3.0).unwrap();
        assert_eq!(p, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn waterfill_rejects_bad_budget() {
        assert!(waterfill(&[1.0, 1.0], 3.0).is_err());
        assert!(waterfill(&[1.0, 1.0], 0.0).is_err());
        assert!(waterfill(&[0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn independent_importance_zero_noise_alpha_is_one() {
        let l = [1.0, 2.0, 3.0, 4.0];
        let plan = independent_importance(&l, &[0.0; 4], 1.0, 0.1, 2).unwrap();
        assert_eq!(plan.alpha, 1.0);
        let sum: f64 = plan.p.iter().sum();
        assert!((sum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn independent_importance_budget_and_box() {
        let l = [1.0, 5.0, 0.2, 3.0, 2.0];
        let h = [0.5, 0.0, 2.0, 1.0, 0.1];
        for tau in 1..=5 {
            let plan = independent_importance(&l, &h, 0.8, 0.02, tau).unwrap();
            let sum: f64 = plan.p.iter().sum();
            assert!((sum - tau as f64).abs() < 1e-10, "tau {tau}: sum {sum}");
            assert!(plan.p.iter().all(|&pi| pi > 0.0 && pi <= 1.0 + 1e-15));
            assert!(plan.alpha > 0.0 && plan.alpha <= 1.0);
        }
    }

    #[test]
    fn independent_importance_survives_extreme_noise_ratios() {
        // Huge noise-to-smoothness ratio: the direct quadratic-root form
        // cancels to zero; the rationalized branch must keep alpha
        // positive and the budget feasible.
        let l = [1.0, 2.0, 3.0, 4.0];
        let h = [5.0, 1.0, 2.0, 3.0];
        let plan = independent_importance(&l, &h, 1e-7, 1e-7, 3).unwrap();
        assert!(
            plan.alpha > 0.0 && plan.alpha < 1e-6,
            "alpha {}",
            plan.alpha
        );
        let sum: f64 = plan.p.iter().sum();
        assert!((sum - 3.0).abs() < 1e-10);

        // Denormal-level noise rounds alpha to one; that must fall back
        // to the pure smoothness water-fill instead of a zero budget.
        let h = [1e-300, 0.0, 1e-300, 0.0];
        let plan = independent_importance(&l, &h, 0.5, 0.1, 2).unwrap();
        assert_eq!(plan.alpha, 1.0);
        let sum: f64 = plan.p.iter().sum();
        assert!((sum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn partially_biased_independent_uniform_case() {
        let plan = partially_biased_independent(&[3.0; 6], 3, 6).unwrap();
        for &pi in &plan.p {
            assert!((pi - 0.5).abs() < 1e-15);
        }
        assert!(partially_biased_independent(&[1.0, 2.0], 1, 2).is_err());
    }

    #[test]
    fn pb_iteration_bound_substitution() {
        // L̄=2, h̄=3, μ=0.5, ε=0.1, τ=4, n=10, α=½:
        // max{(1−0.5)·2·2/(0.5·0.5), (0.5−0.1)·8·3/(0.1·0.25)}.
        let got = pb_independent_iteration_bound(2.0, 3.0, 0.5, 0.1, 4, 10);
        let left: f64 = 0.5 * 2.0 * 2.0 / (0.5 * 0.5);
        let right = (2.0 / 4.0 - 0.1) * 8.0 * 3.0 / (0.1 * 0.25);
        assert!((got - left.max(right)).abs() < 1e-12);
        let single = pb_single_iteration_bound(2.0, 0.0, 0.5, 0.1);
        assert!((single - 4.0 * 2.0 / (0.5 * 0.5)).abs() < 1e-12);
    }
}
