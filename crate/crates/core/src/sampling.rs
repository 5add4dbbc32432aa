//! Mini-batch sampling schemes and their exact inclusion probabilities.
//!
//! A scheme assigns probabilities to subsets S of [n]; drawing one yields
//! the sparse reweighting vector v with v_i = 1/p_i on S and 0 elsewhere,
//! which makes (1/n) Σ v_i ∇f_i an unbiased gradient estimator. The
//! catalog covers single-element, independent, τ-nice, partition and
//! full-batch sampling.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("ground set must be nonempty")]
    EmptyGroundSet,
    #[error("marginal probability at index {index} is {value}; must be in (0, 1]")]
    BadMarginal { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected {expected}")]
    BadProbabilitySum { sum: f64, expected: f64 },
    #[error("batch size {tau} out of range for n = {n}")]
    BadBatchSize { tau: usize, n: usize },
    #[error("groups must form a disjoint cover of the ground set")]
    BadPartition,
}

/// One of the five supported sampling distributions over subsets of [n].
#[derive(Debug, Clone, PartialEq)]
pub enum SamplingScheme {
    /// |S| = 1 with ℙ[S = {i}] = p_i, Σ p_i = 1.
    SingleElement { p: Vec<f64> },
    /// Every index joins S independently with probability p_i; S may be empty.
    Independent { p: Vec<f64> },
    /// Uniform over all subsets of cardinality τ.
    TauNice { n: usize, tau: usize },
    /// S is always one group of a fixed partition, group C with probability q_C.
    Partition {
        groups: Vec<Vec<usize>>,
        q: Vec<f64>,
    },
    /// S = [n] with probability one.
    FullBatch { n: usize },
}

const PROB_SUM_TOL: f64 = 1e-9;

fn check_marginals(p: &[f64]) -> Result<(), SamplingError> {
    if p.is_empty() {
        return Err(SamplingError::EmptyGroundSet);
    }
    for (index, &value) in p.iter().enumerate() {
        if !(value > 0.0 && value <= 1.0) {
            return Err(SamplingError::BadMarginal { index, value });
        }
    }
    Ok(())
}

impl SamplingScheme {
    pub fn single_element(p: Vec<f64>) -> Result<Self, SamplingError> {
        check_marginals(&p)?;
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(SamplingError::BadProbabilitySum { sum, expected: 1.0 });
        }
        Ok(SamplingScheme::SingleElement { p })
    }

    pub fn single_element_uniform(n: usize) -> Result<Self, SamplingError> {
        if n == 0 {
            return Err(SamplingError::EmptyGroundSet);
        }
        Self::single_element(vec![1.0 / n as f64; n])
    }

    pub fn independent(p: Vec<f64>) -> Result<Self, SamplingError> {
        check_marginals(&p)?;
        Ok(SamplingScheme::Independent { p })
    }

    /// Independent sampling with uniform marginals p_i = τ/n, so E|S| = τ.
    pub fn independent_uniform(n: usize, tau: usize) -> Result<Self, SamplingError> {
        if n == 0 {
            return Err(SamplingError::EmptyGroundSet);
        }
        if tau < 1 || tau > n {
            return Err(SamplingError::BadBatchSize { tau, n });
        }
        Self::independent(vec![tau as f64 / n as f64; n])
    }

    pub fn tau_nice(n: usize, tau: usize) -> Result<Self, SamplingError> {
        if n == 0 {
            return Err(SamplingError::EmptyGroundSet);
        }
        if tau < 1 || tau > n {
            return Err(SamplingError::BadBatchSize { tau, n });
        }
        Ok(SamplingScheme::TauNice { n, tau })
    }

    pub fn partition(groups: Vec<Vec<usize>>, q: Vec<f64>) -> Result<Self, SamplingError> {
        if groups.is_empty() || groups.len() != q.len() {
            return Err(SamplingError::BadPartition);
        }
        let n: usize = groups.iter().map(|g| g.len()).sum();
        if n == 0 {
            return Err(SamplingError::EmptyGroundSet);
        }
        let mut seen = vec![false; n];
        for group in &groups {
            if group.is_empty() {
                return Err(SamplingError::BadPartition);
            }
            for &i in group {
                if i >= n || seen[i] {
                    return Err(SamplingError::BadPartition);
                }
                seen[i] = true;
            }
        }
        check_marginals(&q)?;
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(SamplingError::BadProbabilitySum { sum, expected: 1.0 });
        }
        Ok(SamplingScheme::Partition { groups, q })
    }

    pub fn full_batch(n: usize) -> Result<Self, SamplingError> {
        if n == 0 {
            return Err(SamplingError::EmptyGroundSet);
        }
        Ok(SamplingScheme::FullBatch { n })
    }

    pub fn n(&self) -> usize {
        match self {
            SamplingScheme::SingleElement { p } | SamplingScheme::Independent { p } => p.len(),
            SamplingScheme::TauNice { n, .. } | SamplingScheme::FullBatch { n } => *n,
            SamplingScheme::Partition { groups, .. } => groups.iter().map(|g| g.len()).sum(),
        }
    }

    /// Inclusion probabilities p_i = ℙ[i ∈ S].
    pub fn marginals(&self) -> Vec<f64> {
        match self {
            SamplingScheme::SingleElement { p } | SamplingScheme::Independent { p } => p.clone(),
            SamplingScheme::TauNice { n, tau } => vec![*tau as f64 / *n as f64; *n],
            SamplingScheme::FullBatch { n } => vec![1.0; *n],
            SamplingScheme::Partition { groups, q } => {
                let n = self.n();
                let mut p = vec![0.0; n];
                for (group, &qc) in groups.iter().zip(q) {
                    for &i in group {
                        p[i] = qc;
                    }
                }
                p
            }
        }
    }

    /// |S| when the scheme has fixed cardinality.
    pub fn fixed_cardinality(&self) -> Option<usize> {
        match self {
            SamplingScheme::SingleElement { .. } => Some(1),
            SamplingScheme::TauNice { tau, .. } => Some(*tau),
            SamplingScheme::FullBatch { n } => Some(*n),
            SamplingScheme::Partition { groups, .. } => {
                let len = groups[0].len();
                groups.iter().all(|g| g.len() == len).then_some(len)
            }
            SamplingScheme::Independent { p } => p.iter().all(|&pi| pi == 1.0).then_some(p.len()),
        }
    }

    /// Exact pairwise inclusion probabilities P_ij = ℙ[i ∈ S & j ∈ S].
    pub fn pairwise(&self) -> PairwiseProbabilities {
        let n = self.n();
        let p = self.marginals();
        let mut matrix = Matrix::zeros(n, n);
        match self {
            SamplingScheme::SingleElement { .. } => {
                for i in 0..n {
                    matrix.set(i, i, p[i]);
                }
            }
            SamplingScheme::Independent { .. } => {
                for i in 0..n {
                    for j in 0..n {
                        let v = if i == j { p[i] } else { p[i] * p[j] };
                        matrix.set(i, j, v);
                    }
                }
            }
            SamplingScheme::TauNice { n, tau } => {
                let off = if *n > 1 {
                    (*tau as f64) * (*tau as f64 - 1.0) / ((*n as f64) * (*n as f64 - 1.0))
                } else {
                    1.0
                };
                for i in 0..*n {
                    for j in 0..*n {
                        matrix.set(i, j, if i == j { p[i] } else { off });
                    }
                }
            }
            SamplingScheme::FullBatch { n } => {
                for i in 0..*n {
                    for j in 0..*n {
                        matrix.set(i, j, 1.0);
                    }
                }
            }
            SamplingScheme::Partition { groups, q } => {
                for (group, &qc) in groups.iter().zip(q) {
                    for &i in group {
                        for &j in group {
                            matrix.set(i, j, qc);
                        }
                    }
                }
            }
        }
        PairwiseProbabilities { p, matrix }
    }

    pub fn descriptor(&self) -> String {
        match self {
            SamplingScheme::SingleElement { p } => {
                if is_uniform(p) {
                    String::from("single-uniform")
                } else {
                    String::from("single-weighted")
                }
            }
            SamplingScheme::Independent { p } => {
                if is_uniform(p) {
                    format!("independent-uniform(E|S|={:.3})", p.iter().sum::<f64>())
                } else {
                    format!("independent-weighted(E|S|={:.3})", p.iter().sum::<f64>())
                }
            }
            SamplingScheme::TauNice { tau, .. } => format!("tau-nice({tau})"),
            SamplingScheme::Partition { groups, .. } => {
                format!("partition({} groups)", groups.len())
            }
            SamplingScheme::FullBatch { .. } => String::from("full-batch"),
        }
    }
}

fn is_uniform(p: &[f64]) -> bool {
    p.windows(2).all(|w| w[0] == w[1])
}

/// The matrix P with P_ij = ℙ[i ∈ S & j ∈ S] and marginals p_i = P_ii.
#[derive(Debug, Clone)]
pub struct PairwiseProbabilities {
    p: Vec<f64>,
    matrix: Matrix,
}

impl PairwiseProbabilities {
    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn marginal(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn marginals(&self) -> &[f64] {
        &self.p
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.matrix.at(i, j)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Builds from explicit data; used by tests and the oracle module.
    pub fn from_parts(p: Vec<f64>, matrix: Matrix) -> Self {
        debug_assert_eq!(matrix.rows(), p.len());
        debug_assert_eq!(matrix.cols(), p.len());
        PairwiseProbabilities { p, matrix }
    }
}

/// One drawn batch: the subset S and the nonzero entries of v = P̂⁻¹ e_S.
#[derive(Debug, Clone, Default)]
pub struct SamplingRealization {
    /// Indices in S (not necessarily sorted).
    pub indices: Vec<usize>,
    /// weights[k] = 1/p_{indices[k]}.
    pub weights: Vec<f64>,
}

impl SamplingRealization {
    pub fn clear(&mut self) {
        self.indices.clear();
        self.weights.clear();
    }

    /// Dense v for a ground set of size n; test helper.
    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (&i, &w) in self.indices.iter().zip(&self.weights) {
            v[i] = w;
        }
        v
    }
}

/// Draws batches from a scheme. Owns scratch state so that τ-nice draws
/// cost O(τ) after setup; one sampler per concurrent run.
#[derive(Debug, Clone)]
pub struct Sampler {
    scheme: SamplingScheme,
    marginals: Vec<f64>,
    /// Cumulative distribution for categorical variants.
    cumulative: Vec<f64>,
    /// Persistent permutation for τ-nice partial shuffles.
    perm: Vec<usize>,
}

impl Sampler {
    pub fn new(scheme: &SamplingScheme) -> Self {
        let marginals = scheme.marginals();
        let cumulative = match scheme {
            SamplingScheme::SingleElement { p } => cumsum(p),
            SamplingScheme::Partition { q, .. } => cumsum(q),
            _ => Vec::new(),
        };
        let perm = match scheme {
            SamplingScheme::TauNice { n, .. } => (0..*n).collect(),
            _ => Vec::new(),
        };
        Sampler {
            scheme: scheme.clone(),
            marginals,
            cumulative,
            perm,
        }
    }

    pub fn scheme(&self) -> &SamplingScheme {
        &self.scheme
    }

    pub fn draw<R: Rng>(&mut self, rng: &mut R, out: &mut SamplingRealization) {
        out.clear();
        match &self.scheme {
            SamplingScheme::SingleElement { .. } => {
                let i = categorical(&self.cumulative, rng);
                out.indices.push(i);
                out.weights.push(1.0 / self.marginals[i]);
            }
            SamplingScheme::Independent { p } => {
                for (i, &pi) in p.iter().enumerate() {
                    if rng.gen::<f64>() < pi {
                        out.indices.push(i);
                        out.weights.push(1.0 / pi);
                    }
                }
            }
            SamplingScheme::TauNice { n, tau } => {
                // Partial Fisher–Yates on a persistent permutation: the
                // array stays a permutation between draws, so each draw is
                // exactly uniform over τ-subsets at O(τ) cost.
                let w = *n as f64 / *tau as f64;
                for k in 0..*tau {
                    let j = rng.gen_range(k..*n);
                    self.perm.swap(k, j);
                    out.indices.push(self.perm[k]);
                    out.weights.push(w);
                }
            }
            SamplingScheme::Partition { groups, q } => {
                let c = categorical(&self.cumulative, rng);
                let w = 1.0 / q[c];
                for &i in &groups[c] {
                    out.indices.push(i);
                    out.weights.push(w);
                }
            }
            SamplingScheme::FullBatch { n } => {
                for i in 0..*n {
                    out.indices.push(i);
                    out.weights.push(1.0);
                }
            }
        }
    }

    pub fn draw_new<R: Rng>(&mut self, rng: &mut R) -> SamplingRealization {
        let mut out = SamplingRealization::default();
        self.draw(rng, &mut out);
        out
    }
}

fn cumsum(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(p.len());
    for &v in p {
        acc += v;
        out.push(acc);
    }
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn categorical<R: Rng>(cumulative: &[f64], rng: &mut R) -> usize {
    let u = rng.gen::<f64>();
    match cumulative.binary_search_by(|c| c.partial_cmp(&u).expect("finite")) {
        Ok(k) => (k + 1).min(cumulative.len() - 1),
        Err(k) => k.min(cumulative.len() - 1),
    }
}

/// Frequency estimates of the marginal and pairwise inclusion
/// probabilities over repeated draws, with binomial standard errors.
#[derive(Debug, Clone)]
pub struct EmpiricalMarginals {
    pub trials: u64,
    pub p_hat: Vec<f64>,
    pub p_stderr: Vec<f64>,
    pub pair_hat: Matrix,
    pub pair_stderr: Matrix,
}

pub fn empirical_marginals<R: Rng>(
    scheme: &SamplingScheme,
    trials: u64,
    rng: &mut R,
) -> EmpiricalMarginals {
    assert!(trials >= 1, "trials must be at least 1");
    let n = scheme.n();
    let mut sampler = Sampler::new(scheme);
    let mut real = SamplingRealization::default();
    let mut count = vec![0u64; n];
    let mut pair_count = vec![0u64; n * n];
    for _ in 0..trials {
        sampler.draw(rng, &mut real);
        for &i in &real.indices {
            count[i] += 1;
        }
        for &i in &real.indices {
            for &j in &real.indices {
                pair_count[i * n + j] += 1;
            }
        }
    }
    let t = trials as f64;
    let freq = |c: u64| c as f64 / t;
    let se = |f: f64| libm::sqrt(f * (1.0 - f) / t);
    let p_hat: Vec<f64> = count.iter().map(|&c| freq(c)).collect();
    let p_stderr: Vec<f64> = p_hat.iter().map(|&f| se(f)).collect();
    let pair_hat_data: Vec<f64> = pair_count.iter().map(|&c| freq(c)).collect();
    let pair_se_data: Vec<f64> = pair_hat_data.iter().map(|&f| se(f)).collect();
    EmpiricalMarginals {
        trials,
        p_hat,
        p_stderr,
        pair_hat: Matrix::from_vec(n, n, pair_hat_data).expect("square"),
        pair_stderr: Matrix::from_vec(n, n, pair_se_data).expect("square"),
    }
}

/// Per-index deviation of the empirical mean of v from the all-ones vector.
#[derive(Debug, Clone)]
pub struct UnbiasednessReport {
    pub trials: u64,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Indices whose |mean - 1| exceeds four standard errors.
    pub flagged: Vec<usize>,
}

impl UnbiasednessReport {
    pub fn is_clean(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Monte Carlo check that E[v] = 1 component-wise.
pub fn verify_unbiasedness<R: Rng>(
    scheme: &SamplingScheme,
    trials: u64,
    rng: &mut R,
) -> UnbiasednessReport {
    assert!(trials >= 1, "trials must be at least 1");
    let n = scheme.n();
    let mut sampler = Sampler::new(scheme);
    let mut real = SamplingRealization::default();
    // Streaming mean and sum of squares per component.
    let mut mean = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    for k in 0..trials {
        v.fill(0.0);
        sampler.draw(rng, &mut real);
        for (&i, &w) in real.indices.iter().zip(&real.weights) {
            v[i] = w;
        }
        let kf = (k + 1) as f64;
        for i in 0..n {
            let delta = v[i] - mean[i];
            mean[i] += delta / kf;
            m2[i] += delta * (v[i] - mean[i]);
        }
    }
    let t = trials as f64;
    let stderr: Vec<f64> = m2
        .iter()
        .map(|&s| {
            if trials > 1 {
                libm::sqrt(s / (t - 1.0) / t)
            } else {
                0.0
            }
        })
        .collect();
    let flagged = (0..n)
        .filter(|&i| (mean[i] - 1.0).abs() > 4.0 * stderr[i] && (mean[i] - 1.0).abs() > 1e-12)
        .collect();
    UnbiasednessReport {
        trials,
        mean,
        stderr,
        flagged,
    }
}
