//! Expected-smoothness bounds ℒ and gradient noise σ² in closed form.
//!
//! The expected-smoothness constant is the smallest ℒ with
//! E‖∇f_v(x) − ∇f_v(x*)‖² ≤ 2ℒ(f(x) − f(x*)) for all x; together with
//! σ² = E‖∇f_v(x*)‖² it fixes stepsizes and iteration counts. This module
//! computes, per scheme: the enumerated bound ℒ_max and its
//! pairwise-probability relaxation, per-variant closed forms (including
//! the general constant-off-diagonal-ratio form), exact σ² formulas, and
//! — for quadratic problems whose components need not be convex — the
//! exact constant via the second moment of the stochastic Hessian.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::{self, dot, norm_sq, Matrix};
use crate::oracle::{self, OracleError};
use crate::problem::{FiniteSumProblem, ProblemKind, SmoothnessSpec};
use crate::sampling::{PairwiseProbabilities, SamplingScheme};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error("scheme must have at least two elements for this bound")]
    GroundSetTooSmall,
    #[error("off-diagonal ratio P_ij/(p_i p_j) is not constant (spread {spread:.3e})")]
    NonConstantRatio { spread: f64 },
    #[error("problem has no component curvature matrices")]
    NotQuadratic,
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Component curvature input for the ℒ formulas: exact matrices M_i when
/// the problem is quadratic, or the scalar model M_i = L_i·I otherwise.
#[derive(Clone, Copy)]
pub enum CurvatureModel<'a> {
    /// Scalar bounds L_i; subsets use Σ_{j∈C} L_j/p_j.
    Scalars(&'a [f64]),
    /// Explicit matrices; subsets use λ_max(Σ_{j∈C} M_j/p_j).
    Matrices(&'a [Matrix]),
    /// Matrices materialized on demand from a problem, with precomputed
    /// per-component bounds.
    Problem(&'a FiniteSumProblem, &'a [f64]),
}

impl CurvatureModel<'_> {
    pub fn len(&self) -> usize {
        match self {
            CurvatureModel::Scalars(l) => l.len(),
            CurvatureModel::Matrices(m) => m.len(),
            CurvatureModel::Problem(p, _) => p.n(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// L_i = λ_max(M_i).
    pub fn bound(&self, i: usize) -> f64 {
        match self {
            CurvatureModel::Scalars(l) => l[i],
            CurvatureModel::Matrices(m) => {
                linalg::sym_max_eigenvalue(&m[i]).expect("component matrix is symmetric")
            }
            CurvatureModel::Problem(_, bounds) => bounds[i],
        }
    }

    pub fn bounds(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.bound(i)).collect()
    }

    /// λ_max(Σ_{j∈C} w_j M_j) for subset C with weights w.
    fn weighted_subset_lmax(
        &self,
        subset: &[usize],
        weights: &[f64],
    ) -> Result<f64, ConstantsError> {
        match self {
            CurvatureModel::Scalars(l) => {
                Ok(subset.iter().zip(weights).map(|(&j, &w)| w * l[j]).sum())
            }
            CurvatureModel::Matrices(ms) => {
                let d = ms[0].rows();
                let mut sum = Matrix::zeros(d, d);
                for (&j, &w) in subset.iter().zip(weights) {
                    sum.add_scaled(w, &ms[j]);
                }
                Ok(linalg::sym_max_eigenvalue(&sum)?)
            }
            CurvatureModel::Problem(p, bounds) => match p.weighted_matrix_sum(subset, weights) {
                Some(sum) => Ok(linalg::sym_max_eigenvalue(&sum)?),
                None => Ok(subset
                    .iter()
                    .zip(weights)
                    .map(|(&j, &w)| w * bounds[j])
                    .sum()),
            },
        }
    }
}

/// The two upper bounds of the enumerated route: the exact ℒ_max and its
/// pairwise-probability relaxation. Both are valid; `tightest()` is used
/// downstream and both values are reported.
#[derive(Debug, Clone, Copy)]
pub struct LmaxBounds {
    /// max_i Σ_{C ∋ i} (p_C/p_i) L_C; only for enumerable supports.
    pub enumerated: Option<f64>,
    /// (1/n) max_i Σ_j P_ij L_j/(p_i p_j); always computable.
    pub pairwise: f64,
}

impl LmaxBounds {
    pub fn tightest(&self) -> f64 {
        match self.enumerated {
            Some(e) => e.min(self.pairwise),
            None => self.pairwise,
        }
    }
}

/// ℒ_max for an arbitrary proper sampling: the enumerated value when the
/// support fits under the oracle cap, plus the pairwise-form fallback.
pub fn lmax_general(
    scheme: &SamplingScheme,
    curvature: CurvatureModel<'_>,
) -> Result<LmaxBounds, ConstantsError> {
    let pairs = scheme.pairwise();
    let pairwise = lmax_pairwise_bound(&pairs, curvature);
    let enumerated = match oracle::enumerate_support(scheme) {
        Ok(support) => Some(lmax_enumerated(&support, curvature)?),
        Err(OracleError::TooLarge { .. }) => None,
    };
    Ok(LmaxBounds {
        enumerated,
        pairwise,
    })
}

/// max_i Σ_{C ∋ i} (p_C/p_i)·L_C with L_C = (1/n)·λ_max(Σ_{j∈C} M_j/p_j),
/// evaluated over an explicit support.
pub fn lmax_enumerated(
    support: &oracle::EnumerationSupport,
    curvature: CurvatureModel<'_>,
) -> Result<f64, ConstantsError> {
    let n = support.n();
    let p = support.marginals();
    let mut score = vec![0.0; n];
    let mut weights: Vec<f64> = Vec::new();
    for (subset, mass) in support.subsets() {
        if subset.is_empty() || *mass == 0.0 {
            continue;
        }
        weights.clear();
        weights.extend(subset.iter().map(|&j| 1.0 / p[j]));
        let l_c = curvature.weighted_subset_lmax(subset, &weights)? / n as f64;
        for &i in subset {
            score[i] += mass / p[i] * l_c;
        }
    }
    Ok(score.iter().cloned().fold(0.0, f64::max))
}

/// (1/n)·max_i Σ_j P_ij·L_j/(p_i p_j): the relaxation of ℒ_max that only
/// needs pairwise probabilities and scalar bounds.
pub fn lmax_pairwise_bound(pairs: &PairwiseProbabilities, curvature: CurvatureModel<'_>) -> f64 {
    let n = pairs.n();
    let bounds = curvature.bounds();
    let mut best = 0.0_f64;
    for i in 0..n {
        let pi = pairs.marginal(i);
        let mut acc = 0.0;
        for (j, &lj) in bounds.iter().enumerate() {
            let pij = pairs.at(i, j);
            if pij != 0.0 {
                acc += pij * lj / (pi * pairs.marginal(j));
            }
        }
        best = best.max(acc / n as f64);
    }
    best
}

/// Single-element sampling: ℒ_max = (1/n)·max_i L_i/p_i.
pub fn lmax_single_element(l_i: &[f64], p: &[f64]) -> f64 {
    let n = l_i.len() as f64;
    l_i.iter()
        .zip(p)
        .map(|(&l, &pi)| l / pi)
        .fold(0.0_f64, f64::max)
        / n
}

/// Partition sampling: ℒ_max = (1/n)·max_C λ_max(Σ_{j∈C} M_j)/q_C.
pub fn lmax_partition(
    curvature: CurvatureModel<'_>,
    groups: &[Vec<usize>],
    q: &[f64],
) -> Result<f64, ConstantsError> {
    let n = curvature.len() as f64;
    let mut best = 0.0_f64;
    for (group, &qc) in groups.iter().zip(q) {
        let ones = vec![1.0; group.len()];
        let lmax = curvature.weighted_subset_lmax(group, &ones)?;
        best = best.max(lmax / qc);
    }
    Ok(best / n)
}

/// Independent sampling: ℒ ≤ L + max_i ((1 − p_i)/p_i)·L_i/n.
pub fn cl_independent(l_full: f64, l_i: &[f64], p: &[f64]) -> f64 {
    let n = l_i.len() as f64;
    let extra = l_i
        .iter()
        .zip(p)
        .map(|(&l, &pi)| (1.0 - pi) / pi * l)
        .fold(0.0_f64, f64::max);
    l_full + extra / n
}

/// τ-nice sampling: ℒ ≤ (n(τ−1)/(τ(n−1)))·L + ((n−τ)/(τ(n−1)))·L_max.
pub fn cl_tau_nice(l_full: f64, l_max: f64, n: usize, tau: usize) -> Result<f64, ConstantsError> {
    if n < 2 {
        return Err(ConstantsError::GroundSetTooSmall);
    }
    let (nf, tf) = (n as f64, tau as f64);
    Ok(nf * (tf - 1.0) / (tf * (nf - 1.0)) * l_full + (nf - tf) / (tf * (nf - 1.0)) * l_max)
}

/// The constant off-diagonal ratio c₂ = P_ij/(p_i p_j), i ≠ j, of a
/// pairwise matrix. Errors when the ratio varies by more than 1e-12.
pub fn constant_offdiag_ratio(pairs: &PairwiseProbabilities) -> Result<f64, ConstantsError> {
    let n = pairs.n();
    if n < 2 {
        return Ok(1.0);
    }
    let mut c2 = f64::NAN;
    let mut spread = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let ratio = pairs.at(i, j) / (pairs.marginal(i) * pairs.marginal(j));
            if c2.is_nan() {
                c2 = ratio;
            } else {
                spread = spread.max((ratio - c2).abs());
            }
        }
    }
    if spread > 1e-12 {
        return Err(ConstantsError::NonConstantRatio { spread });
    }
    Ok(c2)
}

/// General form for schemes with constant off-diagonal ratio c₂:
/// ℒ ≤ c₂·L + max_i (L_i/(n p_i))·(1 − p_i c₂).
pub fn cl_constant_ratio(l_full: f64, l_i: &[f64], p: &[f64], c2: f64) -> f64 {
    let n = l_i.len() as f64;
    let extra = l_i
        .iter()
        .zip(p)
        .map(|(&l, &pi)| l / (n * pi) * (1.0 - pi * c2))
        .fold(f64::NEG_INFINITY, f64::max);
    c2 * l_full + extra
}

/// Same, but validating the premise against the scheme's pairwise matrix.
pub fn cl_constant_ratio_checked(
    l_full: f64,
    l_i: &[f64],
    pairs: &PairwiseProbabilities,
) -> Result<f64, ConstantsError> {
    let c2 = constant_offdiag_ratio(pairs)?;
    Ok(cl_constant_ratio(l_full, l_i, pairs.marginals(), c2))
}

/// σ² = (1/n²)·Σ_ij (P_ij/(p_i p_j))·⟨h_i, h_j⟩ — exact for any proper
/// sampling, any h.
pub fn sigma_general(pairs: &PairwiseProbabilities, h: &[Vec<f64>]) -> f64 {
    let n = pairs.n();
    debug_assert_eq!(h.len(), n);
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = pairs.at(i, j);
            if pij != 0.0 {
                acc += pij / (pairs.marginal(i) * pairs.marginal(j)) * dot(&h[i], &h[j]);
            }
        }
    }
    acc / (n * n) as f64
}

/// Single-element sampling: σ² = (1/n²)·Σ ‖h_i‖²/p_i. Exact for any h.
pub fn sigma_single_element(h: &[Vec<f64>], p: &[f64]) -> f64 {
    let n = h.len() as f64;
    h.iter()
        .zip(p)
        .map(|(hi, &pi)| norm_sq(hi) / pi)
        .sum::<f64>()
        / (n * n)
}

/// Independent sampling: σ² = (1/n²)·Σ ((1 − p_i)/p_i)·‖h_i‖².
/// Exact when Σ h_i = 0, which holds for h_i = ∇f_i(x*).
pub fn sigma_independent(h: &[Vec<f64>], p: &[f64]) -> f64 {
    let n = h.len() as f64;
    h.iter()
        .zip(p)
        .map(|(hi, &pi)| (1.0 - pi) / pi * norm_sq(hi))
        .sum::<f64>()
        / (n * n)
}

/// τ-nice sampling: σ² = (1/(nτ))·((n−τ)/(n−1))·Σ ‖h_i‖².
/// Exact when Σ h_i = 0. For n = 1 the noise is zero in that regime.
pub fn sigma_tau_nice(h: &[Vec<f64>], tau: usize) -> f64 {
    let n = h.len();
    if n <= 1 {
        return 0.0;
    }
    let (nf, tf) = (n as f64, tau as f64);
    let sum: f64 = h.iter().map(|hi| norm_sq(hi)).sum();
    (nf - tf) / (nf - 1.0) * sum / (nf * tf)
}

/// Partition sampling: σ² = (1/n²)·Σ_C ‖Σ_{i∈C} h_i‖²/q_C. Exact for any h.
pub fn sigma_partition(h: &[Vec<f64>], groups: &[Vec<usize>], q: &[f64]) -> f64 {
    let n = h.len() as f64;
    let d = h.first().map_or(0, Vec::len);
    let mut acc = 0.0;
    let mut sum = vec![0.0; d];
    for (group, &qc) in groups.iter().zip(q) {
        sum.fill(0.0);
        for &i in group {
            for (s, v) in sum.iter_mut().zip(&h[i]) {
                *s += v;
            }
        }
        acc += norm_sq(&sum) / qc;
    }
    acc / (n * n)
}

/// Closed-form σ² for a scheme, dispatching to the variant formulas.
pub fn gradient_noise(scheme: &SamplingScheme, h: &[Vec<f64>]) -> f64 {
    match scheme {
        SamplingScheme::SingleElement { p } => sigma_single_element(h, p),
        SamplingScheme::Independent { p } => sigma_independent(h, p),
        SamplingScheme::TauNice { tau, .. } => sigma_tau_nice(h, *tau),
        SamplingScheme::Partition { groups, q } => sigma_partition(h, groups, q),
        SamplingScheme::FullBatch { .. } => {
            // ‖(1/n) Σ h_i‖² = ‖∇f(x*)‖².
            let d = h.first().map_or(0, Vec::len);
            let mut mean = vec![0.0; d];
            for hi in h {
                for (m, v) in mean.iter_mut().zip(hi) {
                    *m += v;
                }
            }
            let n = h.len() as f64;
            for m in mean.iter_mut() {
                *m /= n;
            }
            norm_sq(&mean)
        }
    }
}

/// Exact expected smoothness for quadratic problems (convex or not), via
/// the second moment of the stochastic Hessian: with H_v = (1/n) Σ_{i∈S}
/// H_i/p_i and H_f = ∇²f, the constant is λ_max(H_f^{-1/2} E[H_v²]
/// H_f^{-1/2}). Valid whenever H_f ≻ 0; this is the route used for the
/// non-convex-sum family, where the convexity-based bounds do not apply.
pub fn exact_quadratic_smoothness(
    problem: &FiniteSumProblem,
    scheme: &SamplingScheme,
) -> Result<f64, ConstantsError> {
    let hf = problem.full_hessian().ok_or(ConstantsError::NotQuadratic)?;
    let n = problem.n();
    let d = problem.dim();
    let nf = n as f64;
    let p = scheme.marginals();
    let mut second_moment = Matrix::zeros(d, d);
    match scheme {
        SamplingScheme::Partition { groups, q } => {
            for (group, &qc) in groups.iter().zip(q) {
                let ones = vec![1.0; group.len()];
                let sum = problem
                    .weighted_matrix_sum(group, &ones)
                    .ok_or(ConstantsError::NotQuadratic)?;
                let sq = sum.matmul(&sum);
                second_moment.add_scaled(1.0 / (nf * nf * qc), &sq);
            }
        }
        _ => {
            let c2 = match scheme {
                SamplingScheme::SingleElement { .. } => 0.0,
                SamplingScheme::Independent { .. } | SamplingScheme::FullBatch { .. } => 1.0,
                SamplingScheme::TauNice { n, tau } => {
                    if *n > 1 {
                        (*n as f64) * (*tau as f64 - 1.0) / ((*tau as f64) * (*n as f64 - 1.0))
                    } else {
                        1.0
                    }
                }
                SamplingScheme::Partition { .. } => unreachable!(),
            };
            // E[H_v²] = c₂·H_f² + (1/n²)·Σ_i (1/p_i − c₂)·H_i², using that
            // the mean component Hessian equals H_f for these families.
            if c2 != 0.0 {
                let hf2 = hf.matmul(&hf);
                second_moment.add_scaled(c2, &hf2);
            }
            for (i, &pi) in p.iter().enumerate() {
                let w = (1.0 / pi - c2) / (nf * nf);
                if w == 0.0 {
                    continue;
                }
                let hi = problem
                    .component_matrix(i)
                    .ok_or(ConstantsError::NotQuadratic)?;
                let sq = hi.matmul(&hi);
                second_moment.add_scaled(w, &sq);
            }
        }
    }
    let chol = linalg::cholesky(&hf)?;
    let reduced = linalg::congruence_inv_cholesky(&chol, &second_moment);
    Ok(linalg::sym_max_eigenvalue(&reduced)?)
}

/// Which formula produced the ℒ value used downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothnessProvenance {
    /// Exact constant via the stochastic-Hessian second moment
    /// (quadratic problems with non-convex components).
    ExactQuadratic,
    /// Enumerated ℒ_max over the scheme's support with curvature matrices.
    ExactMatrix,
    /// Per-variant closed-form bound (the constant-ratio family).
    C2Form,
    /// Scalar fallback: the pairwise relaxation or L_max itself.
    ScalarBound,
}

impl SmoothnessProvenance {
    pub fn label(&self) -> &'static str {
        match self {
            SmoothnessProvenance::ExactQuadratic => "exact-quadratic",
            SmoothnessProvenance::ExactMatrix => "exact-matrix",
            SmoothnessProvenance::C2Form => "c2-form",
            SmoothnessProvenance::ScalarBound => "scalar-bound",
        }
    }
}

/// The ℒ bound selected for downstream use, with everything that was
/// computed along the way.
#[derive(Debug, Clone)]
pub struct SmoothnessBound {
    pub value: f64,
    pub provenance: SmoothnessProvenance,
    pub enumerated: Option<f64>,
    pub pairwise: Option<f64>,
}

/// Picks the tightest valid upper bound for ℒ.
///
/// Non-convex quadratic sums take the exact second-moment constant; the
/// convexity-based bounds can undershoot there. Convex problems take the
/// minimum over the enumerated bound (when the support is enumerable),
/// the per-variant closed form, the pairwise relaxation, and L_max.
pub fn expected_smoothness_bound(
    problem: &FiniteSumProblem,
    spec: &SmoothnessSpec,
    scheme: &SamplingScheme,
) -> Result<SmoothnessBound, ConstantsError> {
    if problem.kind() == ProblemKind::NonconvexSum {
        let value = exact_quadratic_smoothness(problem, scheme)?;
        return Ok(SmoothnessBound {
            value,
            provenance: SmoothnessProvenance::ExactQuadratic,
            enumerated: None,
            pairwise: None,
        });
    }
    let curvature = CurvatureModel::Problem(problem, &spec.component);
    let bounds = lmax_general(scheme, curvature)?;
    let variant = match scheme {
        SamplingScheme::SingleElement { p } => Some(lmax_single_element(&spec.component, p)),
        SamplingScheme::Independent { p } => Some(cl_independent(spec.full, &spec.component, p)),
        SamplingScheme::TauNice { n, tau } => cl_tau_nice(spec.full, spec.max, *n, *tau).ok(),
        SamplingScheme::Partition { groups, q } => lmax_partition(curvature, groups, q).ok(),
        SamplingScheme::FullBatch { .. } => Some(spec.full),
    };
    // Ladder order, later entries winning ties so that the higher-priority
    // formula is recorded when values coincide.
    let mut value = spec.max;
    let mut provenance = SmoothnessProvenance::ScalarBound;
    if bounds.pairwise <= value {
        value = bounds.pairwise;
        provenance = SmoothnessProvenance::ScalarBound;
    }
    if let Some(v) = variant {
        if v <= value {
            value = v;
            provenance = SmoothnessProvenance::C2Form;
        }
    }
    if let Some(e) = bounds.enumerated {
        if e <= value {
            value = e;
            provenance = SmoothnessProvenance::ExactMatrix;
        }
    }
    Ok(SmoothnessBound {
        value,
        provenance,
        enumerated: bounds.enumerated,
        pairwise: Some(bounds.pairwise),
    })
}

/// One row of the sampling-bound comparison table.
#[derive(Debug, Clone)]
pub struct BoundComparisonRow {
    pub family: &'static str,
    pub lmax_bound: f64,
    pub sigma_bound: f64,
}

/// Side-by-side upper bounds on ℒ_max and σ² for τ-nice, uniform
/// independent, and partially biased independent sampling at batch size τ.
pub fn sampling_bound_comparison(
    l_bar: f64,
    l_max: f64,
    h_bar: f64,
    n: usize,
    tau: usize,
) -> Result<[BoundComparisonRow; 3], ConstantsError> {
    if n < 2 {
        return Err(ConstantsError::GroundSetTooSmall);
    }
    let (nf, tf) = (n as f64, tau as f64);
    let frac = (tf - 1.0) / (nf - 1.0);
    Ok([
        BoundComparisonRow {
            family: "tau-nice",
            lmax_bound: nf / tf * frac * l_bar + (1.0 - frac) / tf * l_max,
            sigma_bound: (nf - tf) / (nf - 1.0) * h_bar / tf,
        },
        BoundComparisonRow {
            family: "uniform-independent",
            lmax_bound: l_bar + (1.0 / tf - 1.0 / nf) * l_max,
            sigma_bound: (1.0 / tf - 1.0 / nf) * h_bar,
        },
        BoundComparisonRow {
            family: "partially-biased-independent",
            lmax_bound: (1.0 + 2.0 / tf) * l_bar,
            sigma_bound: (2.0 / tf - 1.0 / nf) * h_bar,
        },
    ])
}

/// Everything the toolkit knows about a (problem, scheme, ε) triple:
/// smoothness constants, the selected ℒ bound and its provenance, the
/// gradient noise, and the stepsize/complexity plan built from them.
#[derive(Debug, Clone)]
pub struct ConstantsReport {
    pub scheme: String,
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub l_full: f64,
    pub l_max: f64,
    pub l_bar: f64,
    pub mu: f64,
    pub h_bar: f64,
    pub expected_smoothness: f64,
    pub provenance: SmoothnessProvenance,
    pub lmax_enumerated: Option<f64>,
    pub lmax_pairwise_bound: Option<f64>,
    pub sigma_sq: f64,
    /// Constant stepsize from the ε-target rule.
    pub gamma: f64,
    /// Iterations guaranteeing E‖x^k − x*‖² ≤ ε from distance² r0².
    pub k_target: u64,
    pub r0_sq: f64,
    /// Optimal batch size, for the families that define one.
    pub tau_star: Option<usize>,
    /// Total complexity at τ*, when defined.
    pub total_complexity: Option<f64>,
}
