//! `sgdsamp verify`: runs the oracle battery — closed forms against
//! enumeration, planners against exhaustive scans, samplers against
//! statistics — and reports one pass/fail line per check.

use std::path::Path;

use anyhow::Result;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sgdsamp_core::constants::{
    cl_independent, expected_smoothness_bound, gradient_noise, lmax_general, lmax_single_element,
    sigma_independent, sigma_single_element, CurvatureModel,
};
use sgdsamp_core::engine::{sgd_run, RunConfig};
use sgdsamp_core::linalg::{axpy, norm_sq, Matrix};
use sgdsamp_core::oracle::{
    enumerate_support, exact_expected_sqnorm, exact_sigma, mc_estimate, McQuantity,
};
use sgdsamp_core::problem::{
    make_logistic, make_nonconvex_sum, make_ridge, solve_minimizer, FiniteSumProblem,
};
use sgdsamp_core::sampling::SamplingScheme;
use sgdsamp_core::schedule::{
    partially_biased_independent, partially_biased_single, waterfill, BatchPlan, StepsizePlan,
};

use crate::csvio::{emit_csv, format_float};

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// The measured worst case, in the check's own units.
    pub worst: f64,
    pub detail: String,
}

fn gaussian_vec<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize, d: usize) -> Matrix {
    Matrix::from_vec(
        n,
        d,
        (0..n * d).map(|_| StandardNormal.sample(rng)).collect(),
    )
    .unwrap()
}

fn mean_zero_vectors<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<Vec<f64>> {
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

fn random_scheme<R: Rng>(rng: &mut R, n: usize) -> SamplingScheme {
    match rng.gen_range(0..5) {
        0 => {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
            let total: f64 = raw.iter().sum();
            SamplingScheme::single_element(raw.iter().map(|v| v / total).collect()).unwrap()
        }
        1 => SamplingScheme::tau_nice(n, rng.gen_range(1..=n)).unwrap(),
        2 => {
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.15..1.0)).collect();
            SamplingScheme::independent(p).unwrap()
        }
        3 if n >= 2 => {
            let cut = rng.gen_range(1..n);
            let groups = vec![(0..cut).collect::<Vec<_>>(), (cut..n).collect::<Vec<_>>()];
            let q0 = rng.gen_range(0.2..0.8);
            SamplingScheme::partition(groups, vec![q0, 1.0 - q0]).unwrap()
        }
        _ => SamplingScheme::full_batch(n).unwrap(),
    }
}

fn component_grads(problem: &FiniteSumProblem, x: &[f64]) -> Vec<Vec<f64>> {
    (0..problem.n())
        .map(|i| {
            let mut g = vec![0.0; problem.dim()];
            problem.component_grad(i, x, &mut g);
            g
        })
        .collect()
}

fn sigma_exactness(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..60 {
        let n = rng.gen_range(2..=10);
        let d = rng.gen_range(1..=5);
        let h = mean_zero_vectors(&mut rng, n, d);
        let scheme = random_scheme(&mut rng, n);
        let support = enumerate_support(&scheme).unwrap();
        let brute = exact_sigma(&support, &h);
        let closed = gradient_noise(&scheme, &h);
        let dev = (brute - closed).abs() / brute.abs().max(closed.abs()).max(1.0);
        worst = worst.max(dev);
    }
    CheckResult {
        name: "sigma-closed-form-vs-enumeration",
        passed: worst <= 1e-12,
        worst,
        detail: format!("max relative deviation {worst:.2e} over 60 instances"),
    }
}

fn lmax_chain(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut ok = true;
    for _ in 0..30 {
        let n = rng.gen_range(2..=8);
        let d = rng.gen_range(2..=5);
        let a = gaussian_matrix(&mut rng, n, d);
        let y = gaussian_vec(&mut rng, n);
        let (problem, spec) = make_ridge(a, y, rng.gen_range(0.05..0.5)).unwrap();
        let scheme = match rng.gen_range(0..3) {
            0 => SamplingScheme::single_element_uniform(n).unwrap(),
            1 => SamplingScheme::tau_nice(n, rng.gen_range(1..=n)).unwrap(),
            _ => SamplingScheme::full_batch(n).unwrap(),
        };
        let curv = CurvatureModel::Problem(&problem, &spec.component);
        let lmax = lmax_general(&scheme, curv).unwrap().enumerated.unwrap();
        let lower_gap = spec.full - lmax;
        let upper_gap = lmax - spec.max;
        worst = worst.max(lower_gap).max(upper_gap);
        ok &= lower_gap <= 1e-9 && upper_gap <= 1e-9;
    }
    CheckResult {
        name: "expected-smoothness-chain",
        passed: ok,
        worst,
        detail: format!("worst chain violation {worst:.2e} over 30 instances"),
    }
}

fn second_moment_bound(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<(FiniteSumProblem, sgdsamp_core::problem::SmoothnessSpec)> = {
        let a = gaussian_matrix(&mut rng, 8, 3);
        let y = gaussian_vec(&mut rng, 8);
        let ridge = make_ridge(a, y, 0.2).unwrap();
        let a = gaussian_matrix(&mut rng, 8, 3);
        let y: Vec<f64> = (0..8)
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let logistic = make_logistic(a, y, 0.3).unwrap();
        let a = gaussian_matrix(&mut rng, 8, 3);
        let b = gaussian_vec(&mut rng, 3);
        let nonconvex = make_nonconvex_sum(a, b, seed).unwrap();
        vec![ridge, logistic, nonconvex]
    };
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for (problem, spec) in &instances {
        let cert = solve_minimizer(problem).unwrap();
        let f_star = problem.value(&cert.x_star);
        for _ in 0..3 {
            let scheme = random_scheme(&mut rng, problem.n());
            let support = enumerate_support(&scheme).unwrap();
            let bound = expected_smoothness_bound(problem, spec, &scheme).unwrap();
            let sigma_sq = gradient_noise(&scheme, &cert.component_grads);
            for _ in 0..40 {
                let x = gaussian_vec(&mut rng, problem.dim());
                let grads = component_grads(problem, &x);
                let lhs = exact_expected_sqnorm(&support, &grads);
                let rhs = 4.0 * bound.value * (problem.value(&x) - f_star) + 2.0 * sigma_sq;
                let margin = lhs - rhs;
                worst = worst.max(margin);
                ok &= margin <= 1e-9;
            }
        }
    }
    CheckResult {
        name: "gradient-second-moment-bound",
        passed: ok,
        worst,
        detail: format!("worst bound margin {worst:.2e} (<= 0 means slack)"),
    }
}

fn sampler_unbiasedness(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for n in [4usize, 7] {
        for _ in 0..2 {
            let scheme = random_scheme(&mut rng, n);
            let est = mc_estimate(&scheme, McQuantity::SamplingVectorMean, 40_000, &mut rng);
            for k in 0..n {
                worst = worst.max(est.deviation_in_se(k, 1.0).min(1e6));
            }
        }
    }
    CheckResult {
        name: "sampling-vector-unbiasedness",
        passed: worst <= 4.0,
        worst,
        detail: format!("max |mean - 1| of v is {worst:.2} standard errors"),
    }
}

fn tau_star_scan(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut ok = true;
    for trial in 0..30 {
        let n = rng.gen_range(2..=150);
        let l_max: f64 = rng.gen_range(0.5..20.0);
        let l_full = rng.gen_range(l_max / n as f64..=l_max);
        let h_bar = if trial % 5 == 0 {
            0.0
        } else {
            rng.gen_range(0.0..50.0)
        };
        let mu = rng.gen_range(0.01..1.0_f64).min(l_full);
        let epsilon = rng.gen_range(1e-3..1.0);
        for plan in [
            BatchPlan::independent(l_full, l_max, h_bar, mu, epsilon, n).unwrap(),
            BatchPlan::tau_nice(l_full, l_max, h_bar, mu, epsilon, n).unwrap(),
        ] {
            let t_star = plan.total_complexity(plan.tau_star);
            let t_scan = (1..=n)
                .map(|t| plan.total_complexity(t))
                .fold(f64::INFINITY, f64::min);
            let rel = (t_star - t_scan) / t_scan.max(1e-300);
            worst = worst.max(rel);
            ok &= rel <= 1e-12;
        }
    }
    CheckResult {
        name: "optimal-batch-size-vs-scan",
        passed: ok,
        worst,
        detail: format!("worst relative excess of T(tau*) over the scan minimum {worst:.2e}"),
    }
}

fn waterfill_optimality(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for _ in 0..10 {
        let w: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..5.0)).collect();
        let budget = rng.gen_range(1..=2) as f64;
        let p = waterfill(&w, budget).unwrap();
        let objective = |p: &[f64]| {
            w.iter()
                .zip(p)
                .map(|(&wi, &pi)| wi / pi)
                .fold(0.0_f64, f64::max)
        };
        let wf = objective(&p);
        let steps = 60usize;
        let mut grid_best = f64::INFINITY;
        for i in 1..=steps {
            for j in 1..=steps {
                let p1 = i as f64 / steps as f64;
                let p2 = j as f64 / steps as f64;
                let p3 = budget - p1 - p2;
                if p3 <= 0.0 || p3 > 1.0 {
                    continue;
                }
                grid_best = grid_best.min(objective(&[p1, p2, p3]));
            }
        }
        let margin = wf - grid_best;
        worst = worst.max(margin);
        ok &= margin <= 1e-6;
    }
    CheckResult {
        name: "waterfill-vs-grid-search",
        passed: ok,
        worst,
        detail: format!("worst excess over the grid optimum {worst:.2e}"),
    }
}

fn importance_guarantees(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for _ in 0..50 {
        let n = rng.gen_range(2..=16);
        let l: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..10.0)).collect();
        let h = mean_zero_vectors(&mut rng, n, 3);
        let l_bar: f64 = l.iter().sum::<f64>() / n as f64;
        let h_bar: f64 = h.iter().map(|v| norm_sq(v)).sum::<f64>() / n as f64;

        let plan = partially_biased_single(&l).unwrap();
        let m1 = lmax_single_element(&l, &plan.p) - 2.0 * l_bar;
        let m2 = sigma_single_element(&h, &plan.p) - 2.0 * h_bar;
        worst = worst.max(m1).max(m2);
        ok &= m1 <= 1e-12 && m2 <= 1e-12;

        if n >= 2 {
            let tau = rng.gen_range(2..=n);
            let plan = partially_biased_independent(&l, tau, n).unwrap();
            let m3 = cl_independent(l_bar, &l, &plan.p) - (1.0 + 2.0 / tau as f64) * l_bar;
            let m4 = sigma_independent(&h, &plan.p) - (2.0 / tau as f64 - 1.0 / n as f64) * h_bar;
            worst = worst.max(m3).max(m4);
            ok &= m3 <= 1e-12 && m4 <= 1e-12;
        }
    }
    CheckResult {
        name: "partially-biased-guarantees",
        passed: ok,
        worst,
        detail: format!("worst guarantee margin {worst:.2e} (<= 0 means slack)"),
    }
}

fn gd_recovery(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(&mut rng, 20, 4);
    let y = gaussian_vec(&mut rng, 20);
    let (problem, spec) = make_ridge(a, y, 0.05).unwrap();
    let cert = solve_minimizer(&problem).unwrap();
    let scheme = SamplingScheme::full_batch(20).unwrap();
    let plan = StepsizePlan::constant(1.0 / (2.0 * spec.full));
    let config = RunConfig {
        scheme: &scheme,
        plan: &plan,
        x0_seed: seed,
        sampling_seed: seed,
        max_epochs: f64::INFINITY,
        max_iterations: Some(80),
        stop_threshold: None,
        record_stride: Some(1),
    };
    let record = sgd_run(&problem, &cert.x_star, &config).unwrap();
    let rate = 1.0 - spec.mu / (2.0 * spec.full);
    let mut bound = 1.0;
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for pt in &record.trajectory {
        let margin = pt.rel_error - bound;
        worst = worst.max(margin);
        ok &= margin <= 1e-10;
        bound *= rate;
    }
    CheckResult {
        name: "gradient-descent-recovery",
        passed: ok,
        worst,
        detail: format!("worst excess over the GD contraction bound {worst:.2e}"),
    }
}

/// Runs the whole battery; returns true when every check passed.
pub fn run(seed: u64, out_dir: &Path) -> Result<bool> {
    std::fs::create_dir_all(out_dir)?;
    let results = vec![
        sigma_exactness(seed),
        lmax_chain(seed.wrapping_add(1)),
        second_moment_bound(seed.wrapping_add(2)),
        sampler_unbiasedness(seed.wrapping_add(3)),
        tau_star_scan(seed.wrapping_add(4)),
        waterfill_optimality(seed.wrapping_add(5)),
        importance_guarantees(seed.wrapping_add(6)),
        gd_recovery(seed.wrapping_add(7)),
    ];
    let mut all = true;
    for r in &results {
        println!(
            "[{}] {} — {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all &= r.passed;
    }
    let path = out_dir.join("verify_report.csv");
    emit_csv(
        &path,
        &["check", "status", "worst_case", "detail"],
        &results,
        |r| {
            vec![
                r.name.to_string(),
                if r.passed { "pass" } else { "fail" }.to_string(),
                format_float(r.worst),
                r.detail.clone(),
            ]
        },
    )?;
    println!("wrote {}", path.display());
    Ok(all)
}
