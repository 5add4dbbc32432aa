//! Brute-force and Monte Carlo verifiers.
//!
//! Everything in here re-derives quantities from the raw definition of a
//! sampling scheme — explicit subset probabilities — rather than from the
//! closed forms in [`crate::constants`]. The test suites compare the two
//! routes; this module must stay independent of the formulas it checks.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::linalg::norm_sq;
use crate::sampling::{Sampler, SamplingRealization, SamplingScheme};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("ground set of size {n} exceeds the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
}

/// Largest ground set we will enumerate (2¹² = 4096 subsets worst case).
pub const MAX_ENUMERABLE: usize = 12;

/// The explicit support of a sampling scheme: every subset that can be
/// drawn, with its probability.
#[derive(Debug, Clone)]
pub struct EnumerationSupport {
    n: usize,
    subsets: Vec<(Vec<usize>, f64)>,
}

impl EnumerationSupport {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subsets(&self) -> &[(Vec<usize>, f64)] {
        &self.subsets
    }

    pub fn total_mass(&self) -> f64 {
        self.subsets.iter().map(|(_, p)| p).sum()
    }

    /// Marginals derived from the support itself, p_i = Σ_{C ∋ i} p_C.
    /// This is the definition, independent of any closed form.
    pub fn marginals(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n];
        for (subset, mass) in &self.subsets {
            for &i in subset {
                p[i] += mass;
            }
        }
        p
    }

    /// Pairwise inclusion probabilities derived from the support.
    pub fn pairwise_from_support(&self) -> Vec<f64> {
        let n = self.n;
        let mut pair = vec![0.0; n * n];
        for (subset, mass) in &self.subsets {
            for &i in subset {
                for &j in subset {
                    pair[i * n + j] += mass;
                }
            }
        }
        pair
    }
}

/// Lists the scheme's support. Rejects ground sets larger than
/// [`MAX_ENUMERABLE`].
pub fn enumerate_support(scheme: &SamplingScheme) -> Result<EnumerationSupport, OracleError> {
    let n = scheme.n();
    if n > MAX_ENUMERABLE {
        return Err(OracleError::TooLarge {
            n,
            cap: MAX_ENUMERABLE,
        });
    }
    let subsets = match scheme {
        SamplingScheme::SingleElement { p } => {
            p.iter().enumerate().map(|(i, &pi)| (vec![i], pi)).collect()
        }
        SamplingScheme::FullBatch { n } => {
            vec![((0..*n).collect(), 1.0)]
        }
        SamplingScheme::Partition { groups, q } => {
            groups.iter().cloned().zip(q.iter().cloned()).collect()
        }
        SamplingScheme::Independent { p } => {
            let mut subsets = Vec::with_capacity(1 << n);
            for mask in 0u32..(1u32 << n) {
                let mut subset = Vec::new();
                let mut mass = 1.0;
                for (i, &pi) in p.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        subset.push(i);
                        mass *= pi;
                    } else {
                        mass *= 1.0 - pi;
                    }
                }
                subsets.push((subset, mass));
            }
            subsets
        }
        SamplingScheme::TauNice { n, tau } => {
            let combos = combinations(*n, *tau);
            let mass = 1.0 / combos.len() as f64;
            combos.into_iter().map(|c| (c, mass)).collect()
        }
    };
    Ok(EnumerationSupport { n, subsets })
}

/// All τ-subsets of {0, …, n-1} in lexicographic order.
fn combinations(n: usize, tau: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(tau);
    fn recurse(
        n: usize,
        tau: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == tau {
            out.push(current.clone());
            return;
        }
        let remaining = tau - current.len();
        for i in start..=(n - remaining) {
            current.push(i);
            recurse(n, tau, i + 1, current, out);
            current.pop();
        }
    }
    recurse(n, tau, 0, &mut current, &mut out);
    out
}

/// σ² = E‖∇f_v(x*)‖² by direct summation over the support:
/// Σ_C p_C ‖(1/n) Σ_{i∈C} h_i/p_i‖².
pub fn exact_sigma(support: &EnumerationSupport, h: &[Vec<f64>]) -> f64 {
    let n = support.n();
    debug_assert_eq!(h.len(), n);
    let p = support.marginals();
    let d = h.first().map_or(0, Vec::len);
    let mut acc = 0.0;
    let mut g = vec![0.0; d];
    for (subset, mass) in support.subsets() {
        g.fill(0.0);
        for &i in subset {
            let w = 1.0 / (p[i] * n as f64);
            for (gk, hk) in g.iter_mut().zip(&h[i]) {
                *gk += w * hk;
            }
        }
        acc += mass * norm_sq(&g);
    }
    acc
}

/// E‖∇f_v(x) − ∇f_v(x*)‖² by support enumeration, given the component
/// gradients at x and at x*.
pub fn exact_expected_centered_sqnorm(
    support: &EnumerationSupport,
    grads_x: &[Vec<f64>],
    grads_star: &[Vec<f64>],
) -> f64 {
    let n = support.n();
    debug_assert_eq!(grads_x.len(), n);
    debug_assert_eq!(grads_star.len(), n);
    let p = support.marginals();
    let d = grads_x.first().map_or(0, Vec::len);
    let mut acc = 0.0;
    let mut g = vec![0.0; d];
    for (subset, mass) in support.subsets() {
        g.fill(0.0);
        for &i in subset {
            let w = 1.0 / (p[i] * n as f64);
            for ((gk, xk), sk) in g.iter_mut().zip(&grads_x[i]).zip(&grads_star[i]) {
                *gk += w * (xk - sk);
            }
        }
        acc += mass * norm_sq(&g);
    }
    acc
}

/// E‖∇f_v(x)‖² by support enumeration.
pub fn exact_expected_sqnorm(support: &EnumerationSupport, grads_x: &[Vec<f64>]) -> f64 {
    let n = support.n();
    debug_assert_eq!(grads_x.len(), n);
    let p = support.marginals();
    let d = grads_x.first().map_or(0, Vec::len);
    let mut acc = 0.0;
    let mut g = vec![0.0; d];
    for (subset, mass) in support.subsets() {
        g.fill(0.0);
        for &i in subset {
            let w = 1.0 / (p[i] * n as f64);
            for (gk, xk) in g.iter_mut().zip(&grads_x[i]) {
                *gk += w * xk;
            }
        }
        acc += mass * norm_sq(&g);
    }
    acc
}

/// What [`mc_estimate`] should average over draws.
pub enum McQuantity<'a> {
    /// ‖(1/n) Σ_{i∈S} h_i/p_i‖², whose mean is σ².
    GradientNoise { h: &'a [Vec<f64>] },
    /// ‖(1/n) Σ_{i∈S} (g_i − g*_i)/p_i‖², whose mean is the
    /// expected-smoothness left-hand side at one point.
    CenteredSqNorm {
        grads_x: &'a [Vec<f64>],
        grads_star: &'a [Vec<f64>],
    },
    /// The sampling vector v itself (per-component means should be 1).
    SamplingVectorMean,
}

/// Sample means with standard errors; scalar quantities use `values[0]`.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub trials: u64,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
}

impl McEstimate {
    pub fn value(&self) -> f64 {
        self.values[0]
    }

    pub fn stderr(&self) -> f64 {
        self.stderrs[0]
    }

    /// |value − reference| in standard-error units (∞ if stderr is 0 and
    /// the deviation is not).
    pub fn deviation_in_se(&self, k: usize, reference: f64) -> f64 {
        let dev = (self.values[k] - reference).abs();
        if dev == 0.0 {
            0.0
        } else if self.stderrs[k] == 0.0 {
            f64::INFINITY
        } else {
            dev / self.stderrs[k]
        }
    }
}

/// Statistical fallback for ground sets too large to enumerate: streaming
/// mean and standard error of the requested functional over `trials` draws.
pub fn mc_estimate<R: Rng>(
    scheme: &SamplingScheme,
    quantity: McQuantity<'_>,
    trials: u64,
    rng: &mut R,
) -> McEstimate {
    assert!(
        trials >= 1000,
        "need at least 10^3 trials for a stable stderr"
    );
    let n = scheme.n();
    let nf = n as f64;
    let p = scheme.marginals();
    let mut sampler = Sampler::new(scheme);
    let mut real = SamplingRealization::default();
    let dim = match quantity {
        McQuantity::SamplingVectorMean => n,
        _ => 1,
    };
    let mut mean = vec![0.0; dim];
    let mut m2 = vec![0.0; dim];
    let mut sample = vec![0.0; dim];
    let mut g: Vec<f64> = match &quantity {
        McQuantity::GradientNoise { h } => vec![0.0; h.first().map_or(0, Vec::len)],
        McQuantity::CenteredSqNorm { grads_x, .. } => {
            vec![0.0; grads_x.first().map_or(0, Vec::len)]
        }
        McQuantity::SamplingVectorMean => Vec::new(),
    };
    for k in 0..trials {
        sampler.draw(rng, &mut real);
        match &quantity {
            McQuantity::GradientNoise { h } => {
                g.fill(0.0);
                for &i in &real.indices {
                    let w = 1.0 / (p[i] * nf);
                    for (gk, hk) in g.iter_mut().zip(&h[i]) {
                        *gk += w * hk;
                    }
                }
                sample[0] = norm_sq(&g);
            }
            McQuantity::CenteredSqNorm {
                grads_x,
                grads_star,
            } => {
                g.fill(0.0);
                for &i in &real.indices {
                    let w = 1.0 / (p[i] * nf);
                    for ((gk, xk), sk) in g.iter_mut().zip(&grads_x[i]).zip(&grads_star[i]) {
                        *gk += w * (xk - sk);
                    }
                }
                sample[0] = norm_sq(&g);
            }
            McQuantity::SamplingVectorMean => {
                sample.fill(0.0);
                for (&i, &w) in real.indices.iter().zip(&real.weights) {
                    sample[i] = w;
                }
            }
        }
        let kf = (k + 1) as f64;
        for i in 0..dim {
            let delta = sample[i] - mean[i];
            mean[i] += delta / kf;
            m2[i] += delta * (sample[i] - mean[i]);
        }
    }
    let t = trials as f64;
    let stderrs = m2.iter().map(|&s| libm::sqrt(s / (t - 1.0) / t)).collect();
    McEstimate {
        trials,
        values: mean,
        stderrs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tau_nice_support_size_and_mass() {
        let scheme = SamplingScheme::tau_nice(4, 2).unwrap();
        let support = enumerate_support(&scheme).unwrap();
        assert_eq!(support.subsets().len(), 6);
        for (_, mass) in support.subsets() {
            assert!((mass - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((support.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_support_is_power_set() {
        let scheme = SamplingScheme::independent(vec![0.5, 0.5]).unwrap();
        let support = enumerate_support(&scheme).unwrap();
        assert_eq!(support.subsets().len(), 4);
        for (_, mass) in support.subsets() {
            assert!((mass - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn support_masses_sum_to_one_across_variants() {
        let schemes = [
            SamplingScheme::single_element(vec![0.1, 0.2, 0.7]).unwrap(),
            SamplingScheme::independent(vec![0.3, 0.9, 0.5]).unwrap(),
            SamplingScheme::tau_nice(5, 3).unwrap(),
            SamplingScheme::partition(vec![vec![0, 2], vec![1]], vec![0.4, 0.6]).unwrap(),
            SamplingScheme::full_batch(4).unwrap(),
        ];
        for scheme in schemes {
            let support = enumerate_support(&scheme).unwrap();
            assert!((support.total_mass() - 1.0).abs() < 1e-12, "{:?}", scheme);
            // Support-derived marginals must match the scheme's closed form.
            let from_support = support.marginals();
            for (a, b) in from_support.iter().zip(scheme.marginals()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn enumeration_rejects_large_ground_sets() {
        let scheme = SamplingScheme::tau_nice(13, 2).unwrap();
        assert!(matches!(
            enumerate_support(&scheme),
            Err(OracleError::TooLarge { n: 13, .. })
        ));
    }

    #[test]
    fn exact_sigma_zero_for_zero_h_and_full_batch() {
        let h = vec![vec![0.0, 0.0]; 3];
        let scheme = SamplingScheme::tau_nice(3, 2).unwrap();
        let support = enumerate_support(&scheme).unwrap();
        assert_eq!(exact_sigma(&support, &h), 0.0);

        // Full batch with mean-zero h sums to the zero gradient.
        let h = vec![vec![1.0], vec![-2.0], vec![1.0]];
        let scheme = SamplingScheme::full_batch(3).unwrap();
        let support = enumerate_support(&scheme).unwrap();
        assert!(exact_sigma(&support, &h) < 1e-30);
    }

    #[test]
    fn centered_sqnorm_vanishes_at_the_same_point() {
        let grads = vec![vec![1.0, 2.0], vec![-0.5, 0.3]];
        let scheme = SamplingScheme::single_element_uniform(2).unwrap();
        let support = enumerate_support(&scheme).unwrap();
        assert_eq!(
            exact_expected_centered_sqnorm(&support, &grads, &grads),
            0.0
        );
    }

    #[test]
    fn mc_sigma_matches_enumeration() {
        let h = vec![vec![1.0, 0.0], vec![-1.0, 2.0], vec![0.0, -2.0]];
        let scheme = SamplingScheme::tau_nice(3, 2).unwrap();
        let support = enumerate_support(&scheme).unwrap();
        let exact = exact_sigma(&support, &h);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let est = mc_estimate(
            &scheme,
            McQuantity::GradientNoise { h: &h },
            50_000,
            &mut rng,
        );
        assert!(est.deviation_in_se(0, exact) <= 4.0);
    }

    #[test]
    fn mc_stderr_shrinks_with_trials() {
        let h = vec![vec![1.0], vec![-3.0], vec![2.5], vec![0.5]];
        let scheme = SamplingScheme::single_element_uniform(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let small = mc_estimate(
            &scheme,
            McQuantity::GradientNoise { h: &h },
            10_000,
            &mut rng,
        );
        let large = mc_estimate(
            &scheme,
            McQuantity::GradientNoise { h: &h },
            40_000,
            &mut rng,
        );
        // Quadrupling trials should halve the standard error, within 20%.
        let ratio = small.stderr() / large.stderr();
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }
}
