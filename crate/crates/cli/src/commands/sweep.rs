//! `sgdsamp sweep`: the (τ, γ(τ), T(τ)) tables for both mini-batch
//! families and the constant-to-decreasing switching-time study.

use anyhow::Result;
use sgdsamp_core::engine::{multi_seed_run, RunConfig};
use sgdsamp_core::sampling::SamplingScheme;
use sgdsamp_core::schedule::{build_report, BatchPlan, StepsizeMode, StepsizePlan};

use super::Workbench;
use crate::csvio::{emit_csv, format_float};
use crate::svg::{write_log_chart, Series};

struct SweepRow {
    family: &'static str,
    tau: usize,
    smoothness_term: f64,
    noise_term: f64,
    gamma: f64,
    total_complexity: f64,
    is_tau_star: bool,
}

fn family_rows(plan: &BatchPlan, family: &'static str, stride: usize) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    let mut tau = 1;
    while tau <= plan.n {
        rows.push(SweepRow {
            family,
            tau,
            smoothness_term: plan.smoothness_term(tau),
            noise_term: plan.noise_term(tau),
            gamma: plan.stepsize(tau),
            total_complexity: plan.total_complexity(tau),
            is_tau_star: tau == plan.tau_star,
        });
        if tau == plan.n {
            break;
        }
        tau = (tau + stride).min(plan.n);
    }
    rows
}

pub fn run(workbench: &Workbench, svg: bool) -> Result<()> {
    let n = workbench.problem.n();
    let spec = &workbench.spec;
    let epsilon = workbench.config.experiment.epsilon;
    let h_bar = workbench.cert.h_bar();
    let stride = (n / 500).max(1);

    let mut rows = Vec::new();
    let tau_nice = BatchPlan::tau_nice(spec.full, spec.max, h_bar, spec.mu, epsilon, n);
    if let Ok(plan) = &tau_nice {
        rows.extend(family_rows(plan, "tau-nice", stride));
    }
    let independent = BatchPlan::independent(spec.full, spec.max, h_bar, spec.mu, epsilon, n)?;
    rows.extend(family_rows(&independent, "independent-uniform", stride));

    let path = workbench.out_path("stepsize_sweep.csv");
    emit_csv(
        &path,
        &[
            "family",
            "tau",
            "smoothness_term",
            "noise_term",
            "gamma",
            "total_complexity",
            "is_tau_star",
        ],
        &rows,
        |r| {
            vec![
                r.family.to_string(),
                r.tau.to_string(),
                format_float(r.smoothness_term),
                format_float(r.noise_term),
                format_float(r.gamma),
                format_float(r.total_complexity),
                (r.is_tau_star as u8).to_string(),
            ]
        },
    )?;
    println!("wrote {}", path.display());
    for (family, plan) in [
        ("tau-nice", tau_nice.ok()),
        ("independent-uniform", Some(independent)),
    ] {
        if let Some(plan) = plan {
            println!(
                "{family:<22} tau* = {:<6} gamma(1) = {:.3e}  gamma(n) = {:.3e}",
                plan.tau_star,
                plan.stepsize(1),
                plan.stepsize(n)
            );
        }
    }

    let study = switching_study(workbench)?;
    let path = workbench.out_path("switching_study.csv");
    emit_csv(
        &path,
        &[
            "variant",
            "k_switch",
            "iteration",
            "epochs_mean",
            "rel_error_mean",
            "rel_error_stderr",
        ],
        &study,
        |r| {
            vec![
                r.variant.clone(),
                r.k_switch.to_string(),
                r.iteration.to_string(),
                format_float(r.epochs_mean),
                format_float(r.rel_mean),
                format_float(r.rel_stderr),
            ]
        },
    )?;
    println!("wrote {}", path.display());

    if svg {
        let mut series: Vec<Series> = Vec::new();
        for row in &study {
            if series
                .last()
                .map(|s: &Series| s.label != row.variant)
                .unwrap_or(true)
            {
                series.push(Series {
                    label: row.variant.clone(),
                    points: Vec::new(),
                });
            }
            series
                .last_mut()
                .unwrap()
                .points
                .push((row.iteration as f64, row.rel_mean));
        }
        let path = workbench.out_path("switching_study.svg");
        write_log_chart(&path, "switching-time study", "iteration", &series)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

struct StudyRow {
    variant: String,
    k_switch: u64,
    iteration: u64,
    epochs_mean: f64,
    rel_mean: f64,
    rel_stderr: f64,
}

/// Compares switching at {0.3, 0.7, 1.0}× the theoretical moment and at
/// the bound-minimizing moment against the constant-stepsize baseline,
/// under uniform single-element sampling.
fn switching_study(workbench: &Workbench) -> Result<Vec<StudyRow>> {
    let n = workbench.problem.n();
    let scheme = SamplingScheme::single_element_uniform(n)?;
    let epsilon = workbench.config.experiment.epsilon;
    let r0_sq = workbench.r0_sq();
    let report = build_report(
        &workbench.problem,
        &workbench.spec,
        &workbench.cert,
        &scheme,
        epsilon,
        r0_sq,
    )?;
    let cl = report.expected_smoothness;
    let mu = workbench.spec.mu;
    let theoretical = StepsizePlan::switching(cl, mu);
    let k_theory = theoretical.k_switch.expect("switching plan");
    let horizon = (20 * k_theory).max(2000);
    let optimal = optimal_switch_moment(cl, mu, report.sigma_sq, r0_sq, horizon);

    let seeds = workbench.config.experiment.seeds.clone();
    anyhow::ensure!(
        seeds.len() >= 2,
        "the switching study needs at least two seeds"
    );
    let mut out = Vec::new();
    let variants: Vec<(String, Option<u64>)> = vec![
        ("constant".to_string(), None),
        (
            "switch-0.3x".to_string(),
            Some(((k_theory as f64) * 0.3) as u64),
        ),
        (
            "switch-0.7x".to_string(),
            Some(((k_theory as f64) * 0.7) as u64),
        ),
        ("switch-1.0x".to_string(), Some(k_theory)),
        ("switch-optimal".to_string(), Some(optimal)),
    ];
    for (variant, k_switch) in variants {
        let plan = match k_switch {
            None => StepsizePlan::constant(1.0 / (2.0 * cl)),
            Some(k) => {
                let mut plan = StepsizePlan::switching(cl, mu);
                plan.k_switch = Some(k);
                plan
            }
        };
        debug_assert!(matches!(
            plan.mode,
            StepsizeMode::Constant | StepsizeMode::Switching
        ));
        let config = RunConfig {
            scheme: &scheme,
            plan: &plan,
            x0_seed: workbench.config.base_seed(),
            sampling_seed: 0,
            max_epochs: f64::INFINITY,
            max_iterations: Some(horizon),
            stop_threshold: None,
            record_stride: Some((horizon / 500).max(1)),
        };
        let agg = multi_seed_run(&workbench.problem, &workbench.cert.x_star, &config, &seeds)?;
        for pt in &agg.points {
            out.push(StudyRow {
                variant: variant.clone(),
                k_switch: k_switch.unwrap_or(0),
                iteration: pt.iteration,
                epochs_mean: pt.epochs_mean,
                rel_mean: pt.rel_mean,
                rel_stderr: pt.rel_stderr,
            });
        }
        println!(
            "switching study {variant:<16} k_switch = {:<8} final mean rel error = {:.3e}",
            k_switch
                .map(|k| k.to_string())
                .unwrap_or_else(|| "-".into()),
            agg.final_point().rel_mean
        );
    }
    Ok(out)
}

/// Minimizes the decreasing-stepsize error bound over the switching
/// moment by direct scan: at final iteration k, switching at k* costs
/// (k*)²·(1 − μ/(2ℒ))^{k*}·r0² + (σ²/μ²)·(8(k − k*) + (k*)²·μ/ℒ).
fn optimal_switch_moment(cl: f64, mu: f64, sigma_sq: f64, r0_sq: f64, horizon: u64) -> u64 {
    let theta: f64 = 1.0 - mu / (2.0 * cl);
    let mut best = (f64::INFINITY, 1u64);
    for k_star in 1..horizon {
        let ks = k_star as f64;
        let transient = ks * ks * (ks * theta.ln()).exp() * r0_sq;
        let noise = sigma_sq / (mu * mu) * (8.0 * (horizon - k_star) as f64 + ks * ks * mu / cl);
        let value = transient + noise;
        if value < best.0 {
            best = (value, k_star);
        }
    }
    best.1
}
