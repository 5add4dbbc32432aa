//! The SGD loop x^{k+1} = x^k − γ^k ∇f_{v^k}(x^k) with trajectory
//! recording.
//!
//! A run is sequential; distinct runs own their generator state and may
//! execute concurrently. Epochs are counted as realized gradient
//! evaluations divided by n, which matters for independent sampling where
//! |S| is random.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::{axpy, dist_sq};
use crate::problem::FiniteSumProblem;
use crate::sampling::{Sampler, SamplingRealization, SamplingScheme};
use crate::schedule::StepsizePlan;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(
        "iterate became non-finite at iteration {iteration}; stepsize too large or bad constants"
    )]
    Diverged { iteration: u64 },
    #[error("multi-seed aggregation needs at least two seeds")]
    TooFewSeeds,
}

/// Configuration of a single run. The starting point is a standard
/// Gaussian drawn from `x0_seed`; `sampling_seed` drives the batch draws,
/// so runs sharing `x0_seed` start from the same iterate.
#[derive(Debug, Clone)]
pub struct RunConfig<'a> {
    pub scheme: &'a SamplingScheme,
    pub plan: &'a StepsizePlan,
    pub x0_seed: u64,
    pub sampling_seed: u64,
    /// Budget in epochs (gradient evaluations / n).
    pub max_epochs: f64,
    /// Hard iteration cap; `None` derives one from the epoch budget.
    pub max_iterations: Option<u64>,
    /// Stop once ‖x^k − x*‖² falls below this.
    pub stop_threshold: Option<f64>,
    /// Record every this-many iterations; `None` picks ⌈k_est/1000⌉.
    pub record_stride: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub iteration: u64,
    pub epochs: f64,
    pub rel_error: f64,
    pub stepsize: f64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub trajectory: Vec<TrajectoryPoint>,
    pub iterations: u64,
    pub epochs: f64,
    pub final_x: Vec<f64>,
    pub initial_error_sq: f64,
    pub final_error_sq: f64,
    pub sampling_seed: u64,
    /// Filled in by callers that have a clock; the core has none.
    pub wall_clock_secs: Option<f64>,
}

/// Standard Gaussian d-vector from a seed.
pub fn standard_gaussian_vector(seed: u64, d: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn expected_batch_size(scheme: &SamplingScheme) -> f64 {
    scheme.marginals().iter().sum()
}

/// Runs SGD against a known minimizer, recording the relative error
/// ‖x^k − x*‖²/‖x⁰ − x*‖² along the way. The point at k = 0 is always
/// recorded (relative error exactly 1), as is the final iterate.
pub fn sgd_run(
    problem: &FiniteSumProblem,
    x_star: &[f64],
    config: &RunConfig<'_>,
) -> Result<RunRecord, EngineError> {
    let d = problem.dim();
    let n = problem.n() as f64;
    let mut x = standard_gaussian_vector(config.x0_seed, d);
    let r0_sq = dist_sq(&x, x_star);
    let rel = |err_sq: f64| if r0_sq > 0.0 { err_sq / r0_sq } else { err_sq };

    let mean_batch = expected_batch_size(config.scheme).max(1.0);
    let k_cap = config
        .max_iterations
        .unwrap_or_else(|| libm::ceil(config.max_epochs * n / mean_batch).max(1.0) as u64);
    let stride = config
        .record_stride
        .unwrap_or_else(|| k_cap.div_ceil(1000).max(1));

    let mut sampler = Sampler::new(config.scheme);
    let mut rng = ChaCha8Rng::seed_from_u64(config.sampling_seed);
    let mut real = SamplingRealization::default();
    let mut g = vec![0.0; d];

    let mut trajectory = Vec::new();
    let mut epochs = 0.0_f64;
    let mut k: u64 = 0;
    let mut err_sq;
    let mut last_recorded = u64::MAX;
    loop {
        err_sq = dist_sq(&x, x_star);
        if k % stride == 0 {
            trajectory.push(TrajectoryPoint {
                iteration: k,
                epochs,
                rel_error: rel(err_sq),
                stepsize: config.plan.stepsize(k),
            });
            last_recorded = k;
        }
        let stopped = config.stop_threshold.is_some_and(|t| err_sq <= t);
        if stopped || k >= k_cap || epochs >= config.max_epochs {
            break;
        }
        let gamma = config.plan.stepsize(k);
        sampler.draw(&mut rng, &mut real);
        problem.sampled_grad(&real.indices, &real.weights, &x, &mut g);
        axpy(-gamma, &g, &mut x);
        epochs += real.indices.len() as f64 / n;
        k += 1;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(EngineError::Diverged { iteration: k });
        }
    }
    if last_recorded != k {
        trajectory.push(TrajectoryPoint {
            iteration: k,
            epochs,
            rel_error: rel(err_sq),
            stepsize: config.plan.stepsize(k),
        });
    }
    Ok(RunRecord {
        trajectory,
        iterations: k,
        epochs,
        final_x: x,
        initial_error_sq: r0_sq,
        final_error_sq: err_sq,
        sampling_seed: config.sampling_seed,
        wall_clock_secs: None,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct AggregatePoint {
    pub iteration: u64,
    pub epochs_mean: f64,
    pub rel_mean: f64,
    pub rel_stderr: f64,
    pub abs_mean: f64,
    pub abs_stderr: f64,
    pub stepsize: f64,
}

/// Seed-averaged trajectories aligned by iteration.
#[derive(Debug, Clone)]
pub struct MultiSeedRecord {
    pub points: Vec<AggregatePoint>,
    pub seeds: Vec<u64>,
    pub initial_error_sq: f64,
}

impl MultiSeedRecord {
    pub fn final_point(&self) -> &AggregatePoint {
        self.points.last().expect("trajectory is never empty")
    }
}

/// Runs one configuration under several sampling seeds, all starting from
/// the x⁰ drawn from the shared `x0_seed`, and averages the error
/// trajectories pointwise. Early stopping is disabled so that every run
/// lands on the same iteration grid.
pub fn multi_seed_run(
    problem: &FiniteSumProblem,
    x_star: &[f64],
    config: &RunConfig<'_>,
    seeds: &[u64],
) -> Result<MultiSeedRecord, EngineError> {
    if seeds.len() < 2 {
        return Err(EngineError::TooFewSeeds);
    }
    let n = problem.n() as f64;
    let mean_batch = expected_batch_size(config.scheme).max(1.0);
    let k_cap = config
        .max_iterations
        .unwrap_or_else(|| libm::ceil(config.max_epochs * n / mean_batch).max(1.0) as u64);
    let stride = config
        .record_stride
        .unwrap_or_else(|| k_cap.div_ceil(1000).max(1));

    struct Accumulator {
        iteration: u64,
        stepsize: f64,
        epochs_mean: f64,
        rel_mean: f64,
        rel_m2: f64,
        abs_mean: f64,
        abs_m2: f64,
    }
    let mut acc: Vec<Accumulator> = Vec::new();
    let mut initial_error_sq = 0.0;
    for (run_idx, &seed) in seeds.iter().enumerate() {
        let run_config = RunConfig {
            sampling_seed: seed,
            max_iterations: Some(k_cap),
            max_epochs: f64::INFINITY,
            stop_threshold: None,
            record_stride: Some(stride),
            ..config.clone()
        };
        let record = sgd_run(problem, x_star, &run_config)?;
        initial_error_sq = record.initial_error_sq;
        if run_idx == 0 {
            acc = record
                .trajectory
                .iter()
                .map(|pt| Accumulator {
                    iteration: pt.iteration,
                    stepsize: pt.stepsize,
                    epochs_mean: 0.0,
                    rel_mean: 0.0,
                    rel_m2: 0.0,
                    abs_mean: 0.0,
                    abs_m2: 0.0,
                })
                .collect();
        }
        debug_assert_eq!(record.trajectory.len(), acc.len());
        let count = (run_idx + 1) as f64;
        for (slot, pt) in acc.iter_mut().zip(&record.trajectory) {
            slot.epochs_mean += (pt.epochs - slot.epochs_mean) / count;
            let rel_delta = pt.rel_error - slot.rel_mean;
            slot.rel_mean += rel_delta / count;
            slot.rel_m2 += rel_delta * (pt.rel_error - slot.rel_mean);
            let abs = pt.rel_error * record.initial_error_sq;
            let abs_delta = abs - slot.abs_mean;
            slot.abs_mean += abs_delta / count;
            slot.abs_m2 += abs_delta * (abs - slot.abs_mean);
        }
    }
    let count = seeds.len() as f64;
    let stderr = |m2: f64| libm::sqrt(m2 / (count - 1.0) / count);
    let points = acc
        .into_iter()
        .map(|a| AggregatePoint {
            iteration: a.iteration,
            epochs_mean: a.epochs_mean,
            rel_mean: a.rel_mean,
            rel_stderr: stderr(a.rel_m2),
            abs_mean: a.abs_mean,
            abs_stderr: stderr(a.abs_m2),
            stepsize: a.stepsize,
        })
        .collect();
    Ok(MultiSeedRecord {
        points,
        seeds: seeds.to_vec(),
        initial_error_sq,
    })
}
