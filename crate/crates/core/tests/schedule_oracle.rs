//! Planner outputs checked against exhaustive search: τ* against the
//! integer scan of T(τ), water-filling against projected grid search, and
//! the importance-sampling constructions against their guaranteed bounds.

mod common;

use common::*;
use rand::Rng;
use sgdsamp_core::constants::{
    cl_independent, lmax_single_element, sigma_independent, sigma_single_element,
};
use sgdsamp_core::schedule::{
    independent_importance, partially_biased_independent, partially_biased_single,
    single_element_importance, waterfill, BatchPlan,
};

#[test]
fn tau_star_matches_exhaustive_scan_on_random_tuples() {
    let mut r = rng(61);
    for trial in 0..50 {
        let n = r.gen_range(2..=200);
        let l_max: f64 = r.gen_range(0.5..20.0);
        // L is constrained to [L_max/n, L_max] in exact arithmetic.
        let l_full = r.gen_range(l_max / n as f64..=l_max);
        let h_bar = if trial % 5 == 0 {
            0.0
        } else {
            r.gen_range(0.0..50.0)
        };
        let mu = r.gen_range(0.01..1.0_f64).min(l_full);
        let epsilon = r.gen_range(1e-3..1.0);

        for plan in [
            BatchPlan::independent(l_full, l_max, h_bar, mu, epsilon, n).unwrap(),
            BatchPlan::tau_nice(l_full, l_max, h_bar, mu, epsilon, n).unwrap(),
        ] {
            let scan = (1..=n)
                .min_by(|&a, &b| {
                    plan.total_complexity(a)
                        .partial_cmp(&plan.total_complexity(b))
                        .unwrap()
                })
                .unwrap();
            let t_plan = plan.total_complexity(plan.tau_star);
            let t_scan = plan.total_complexity(scan);
            // Indices must agree whenever the scan minimum is unique;
            // under ties value-optimality is the contract.
            assert!(
                t_plan <= t_scan * (1.0 + 1e-12),
                "trial {trial} {:?}: T({}) = {t_plan} > T({scan}) = {t_scan}",
                plan.family,
                plan.tau_star
            );
            let unique = (1..=n)
                .filter(|&t| plan.total_complexity(t) <= t_scan * (1.0 + 1e-12))
                .count()
                == 1;
            if unique {
                assert_eq!(plan.tau_star, scan, "trial {trial} {:?}", plan.family);
            }
            if h_bar == 0.0 {
                assert_eq!(plan.tau_star, 1, "zero noise must give tau* = 1");
            }
        }
    }
}

#[test]
fn waterfill_beats_every_grid_point() {
    let objective = |w: &[f64], p: &[f64]| -> f64 {
        w.iter()
            .zip(p)
            .filter(|(&wi, _)| wi > 0.0)
            .map(|(&wi, &pi)| wi / pi)
            .fold(0.0_f64, f64::max)
    };
    let mut r = rng(62);
    for _ in 0..20 {
        let w: Vec<f64> = (0..3).map(|_| r.gen_range(0.1..5.0)).collect();
        let budget = r.gen_range(1..=2) as f64;
        let p = waterfill(&w, budget).unwrap();
        let sum: f64 = p.iter().sum();
        assert!((sum - budget).abs() < 1e-12);
        assert!(p.iter().all(|&pi| pi > 0.0 && pi <= 1.0 + 1e-15));
        let wf = objective(&w, &p);

        // Projected grid over {Σp = budget, 0 < p ≤ 1}.
        let steps = 100usize;
        let mut grid_best = f64::INFINITY;
        for i in 1..=steps {
            for j in 1..=steps {
                let p1 = i as f64 / steps as f64;
                let p2 = j as f64 / steps as f64;
                let p3 = budget - p1 - p2;
                if p3 <= 0.0 || p3 > 1.0 {
                    continue;
                }
                grid_best = grid_best.min(objective(&w, &[p1, p2, p3]));
            }
        }
        assert!(
            wf <= grid_best + 1e-6,
            "waterfill {wf} worse than grid {grid_best} for w {w:?} budget {budget}"
        );
    }
}

/// The interpolated single-element probabilities give an iteration bound
/// within twice the grid-search minimum over the simplex (n = 4, step
/// 0.05).
#[test]
fn single_importance_within_twice_the_grid_minimum() {
    let mut r = rng(63);
    for _ in 0..10 {
        let n = 4usize;
        let l: Vec<f64> = (0..n).map(|_| r.gen_range(0.2..5.0)).collect();
        let h = mean_zero_vectors(&mut r, n, 3);
        let h_norms: Vec<f64> = h.iter().map(|v| sgdsamp_core::linalg::norm(v)).collect();
        let mu = r.gen_range(0.05..1.0);
        let epsilon = r.gen_range(0.01..0.5);
        let bound = |p: &[f64]| -> f64 {
            (2.0 * lmax_single_element(&l, p) / mu)
                .max(4.0 * sigma_single_element(&h, p) / (epsilon * mu * mu))
        };
        let plan = single_element_importance(&l, &h_norms, mu, epsilon).unwrap();
        let plan_bound = bound(&plan.p);

        let steps = 20usize; // step 0.05 over the 3-simplex
        let mut grid_best = f64::INFINITY;
        for i in 1..steps {
            for j in 1..(steps - i) {
                for k in 1..(steps - i - j) {
                    let m = steps - i - j - k;
                    if m == 0 {
                        continue;
                    }
                    let p = [
                        i as f64 / steps as f64,
                        j as f64 / steps as f64,
                        k as f64 / steps as f64,
                        m as f64 / steps as f64,
                    ];
                    grid_best = grid_best.min(bound(&p));
                }
            }
        }
        assert!(
            plan_bound <= 2.0 * grid_best + 1e-9,
            "plan bound {plan_bound} vs 2x grid minimum {grid_best}"
        );
    }
}

#[test]
fn partially_biased_single_guarantees_hold() {
    let mut r = rng(64);
    for _ in 0..100 {
        let n = r.gen_range(2..=20);
        let l: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..10.0)).collect();
        let h = mean_zero_vectors(&mut r, n, 3);
        let l_bar: f64 = l.iter().sum::<f64>() / n as f64;
        let h_bar: f64 = h
            .iter()
            .map(|v| sgdsamp_core::linalg::norm_sq(v))
            .sum::<f64>()
            / n as f64;
        let plan = partially_biased_single(&l).unwrap();
        let sum: f64 = plan.p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(lmax_single_element(&l, &plan.p) <= 2.0 * l_bar + 1e-12);
        assert!(sigma_single_element(&h, &plan.p) <= 2.0 * h_bar + 1e-12);
    }
}

#[test]
fn partially_biased_independent_guarantees_hold() {
    let mut r = rng(65);
    for _ in 0..100 {
        let n = r.gen_range(2..=20);
        let tau = r.gen_range(2..=n);
        let l: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..10.0)).collect();
        let h = mean_zero_vectors(&mut r, n, 3);
        let l_bar: f64 = l.iter().sum::<f64>() / n as f64;
        let h_bar: f64 = h
            .iter()
            .map(|v| sgdsamp_core::linalg::norm_sq(v))
            .sum::<f64>()
            / n as f64;
        let plan = partially_biased_independent(&l, tau, n).unwrap();
        let sum: f64 = plan.p.iter().sum();
        assert!((sum - tau as f64).abs() < 1e-10, "sum {sum} tau {tau}");
        assert!(plan.p.iter().all(|&pi| pi > 0.0 && pi <= 1.0 + 1e-15));
        // ℒ_max route: L̄ + max (1−p_i)/p_i·L_i/n ≤ (1 + 2/τ)·L̄.
        let lmax_bound = cl_independent(l_bar, &l, &plan.p);
        assert!(
            lmax_bound <= (1.0 + 2.0 / tau as f64) * l_bar + 1e-12,
            "lmax {lmax_bound} vs {}",
            (1.0 + 2.0 / tau as f64) * l_bar
        );
        let sigma = sigma_independent(&h, &plan.p);
        let cap = (2.0 / tau as f64 - 1.0 / n as f64) * h_bar;
        assert!(sigma <= cap + 1e-12, "sigma {sigma} vs cap {cap}");
    }
}

#[test]
fn independent_importance_guarantees_hold() {
    let mut r = rng(66);
    for _ in 0..100 {
        let n = r.gen_range(2..=20);
        let tau = r.gen_range(1..=n);
        let l: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..10.0)).collect();
        let h = mean_zero_vectors(&mut r, n, 3);
        let h_norms: Vec<f64> = h.iter().map(|v| sgdsamp_core::linalg::norm(v)).collect();
        let l_bar: f64 = l.iter().sum::<f64>() / n as f64;
        let mu = r.gen_range(0.05..1.0);
        let epsilon = r.gen_range(0.01..0.5);
        let plan = independent_importance(&l, &h_norms, mu, epsilon, tau).unwrap();
        let sum: f64 = plan.p.iter().sum();
        assert!((sum - tau as f64).abs() < 1e-10);
        assert!(plan.p.iter().all(|&pi| pi > 0.0 && pi <= 1.0 + 1e-15));
        let alpha = plan.alpha;
        assert!(alpha > 0.0 && alpha <= 1.0);
        let lmax_bound = cl_independent(l_bar, &l, &plan.p);
        assert!(
            lmax_bound <= (1.0 + 1.0 / (alpha * tau as f64)) * l_bar + 1e-12,
            "lmax {lmax_bound} alpha {alpha}"
        );
        if alpha < 1.0 {
            let mean_h = h_norms.iter().sum::<f64>() / n as f64;
            let sigma_cap = mean_h * mean_h / ((1.0 - alpha) * tau as f64);
            let sigma = sigma_independent(&h, &plan.p);
            assert!(sigma <= sigma_cap + 1e-12, "sigma {sigma} cap {sigma_cap}");
        }
    }
    // α must equal 1 exactly under zero noise.
    let plan = independent_importance(&[1.0, 2.0, 3.0], &[0.0; 3], 0.5, 0.1, 2).unwrap();
    assert_eq!(plan.alpha, 1.0);
}

mod waterfill_properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Feasibility is invariant over random weights and budgets: the
        /// output sums to the budget, respects the box, and clipped
        /// entries carry the largest weights.
        #[test]
        fn waterfill_feasibility(
            raw in proptest::collection::vec(0.01f64..10.0, 2..10),
            budget_frac in 0.05f64..1.0,
        ) {
            let n = raw.len();
            let budget = (budget_frac * n as f64).max(1e-3);
            let p = waterfill(&raw, budget).unwrap();
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - budget).abs() <= 1e-10 * budget.max(1.0));
            prop_assert!(p.iter().all(|&pi| pi > 0.0 && pi <= 1.0 + 1e-15));
            // Unclipped entries share one weight/probability ratio, and
            // clipped entries would exceed it.
            let ratio = raw
                .iter()
                .zip(&p)
                .filter(|(_, &pi)| pi < 1.0)
                .map(|(&w, &pi)| w / pi)
                .fold(0.0_f64, f64::max);
            for (&w, &pi) in raw.iter().zip(&p) {
                if pi >= 1.0 && ratio > 0.0 {
                    prop_assert!(w >= ratio * (1.0 - 1e-9));
                }
            }
        }
    }
}
