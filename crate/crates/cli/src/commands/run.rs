//! `sgdsamp run`: execute the configured SGD variants and write their
//! error trajectories, per seed and seed-averaged.

use std::time::Instant;

use anyhow::Result;
use sgdsamp_core::engine::{multi_seed_run, sgd_run, RunConfig};
use sgdsamp_core::schedule::{build_report, StepsizePlan};

use super::{resolve_all_schemes, ResolvedScheme, Workbench};
use crate::config::StepsizeKind;
use crate::csvio::{emit_csv, format_float};
use crate::svg::{write_log_chart, Series};

const TRAJECTORY_HEADER: &[&str] = &["iteration", "epochs", "rel_error", "stepsize"];
const MEAN_HEADER: &[&str] = &[
    "iteration",
    "epochs_mean",
    "rel_error_mean",
    "rel_error_stderr",
    "abs_error_mean",
    "abs_error_stderr",
    "stepsize",
];

struct SummaryRow {
    label: String,
    gamma: f64,
    k_target: u64,
    sigma_sq: f64,
    expected_smoothness: f64,
    final_rel_mean: f64,
}

pub fn run(workbench: &Workbench, svg: bool) -> Result<()> {
    let schemes = resolve_all_schemes(workbench)?;
    let epsilon = workbench.config.experiment.epsilon;
    let r0_sq = workbench.r0_sq();
    let seeds = workbench.config.experiment.seeds.clone();
    let mut summaries = Vec::new();
    let mut mean_series = Vec::new();
    for ResolvedScheme { label, scheme } in &schemes {
        let report = build_report(
            &workbench.problem,
            &workbench.spec,
            &workbench.cert,
            scheme,
            epsilon,
            r0_sq,
        )?;
        let plan = match workbench.config.stepsize_kind() {
            StepsizeKind::Constant => StepsizePlan::constant_for(
                report.expected_smoothness,
                report.sigma_sq,
                workbench.spec.mu,
                epsilon,
                r0_sq,
            ),
            StepsizeKind::Switching => {
                StepsizePlan::switching(report.expected_smoothness, workbench.spec.mu)
            }
        };
        let base = RunConfig {
            scheme,
            plan: &plan,
            x0_seed: workbench.config.base_seed(),
            sampling_seed: 0,
            max_epochs: workbench.config.max_epochs(),
            max_iterations: None,
            stop_threshold: workbench.config.stop_threshold(),
            record_stride: None,
        };
        let started = Instant::now();
        for &seed in &seeds {
            let config = RunConfig {
                sampling_seed: seed,
                ..base.clone()
            };
            let seed_started = Instant::now();
            let mut record = sgd_run(&workbench.problem, &workbench.cert.x_star, &config)?;
            record.wall_clock_secs = Some(seed_started.elapsed().as_secs_f64());
            let path = workbench.out_path(&format!("run_{label}_seed{seed}.csv"));
            emit_csv(&path, TRAJECTORY_HEADER, &record.trajectory, |pt| {
                vec![
                    pt.iteration.to_string(),
                    format_float(pt.epochs),
                    format_float(pt.rel_error),
                    format_float(pt.stepsize),
                ]
            })?;
        }
        let final_rel_mean = if seeds.len() >= 2 {
            let agg = multi_seed_run(&workbench.problem, &workbench.cert.x_star, &base, &seeds)?;
            let path = workbench.out_path(&format!("run_{label}_mean.csv"));
            emit_csv(&path, MEAN_HEADER, &agg.points, |pt| {
                vec![
                    pt.iteration.to_string(),
                    format_float(pt.epochs_mean),
                    format_float(pt.rel_mean),
                    format_float(pt.rel_stderr),
                    format_float(pt.abs_mean),
                    format_float(pt.abs_stderr),
                    format_float(pt.stepsize),
                ]
            })?;
            if svg {
                mean_series.push(Series {
                    label: label.clone(),
                    points: agg
                        .points
                        .iter()
                        .map(|p| (p.epochs_mean, p.rel_mean))
                        .collect(),
                });
            }
            agg.final_point().rel_mean
        } else {
            f64::NAN
        };
        let wall = started.elapsed().as_secs_f64();
        println!(
            "{label:<28} gamma = {:.3e}  k_target = {:>8}  final mean rel error = {:.3e}  [{wall:.2}s]",
            plan.gamma, report.k_target, final_rel_mean
        );
        summaries.push(SummaryRow {
            label: label.clone(),
            gamma: plan.gamma,
            k_target: report.k_target,
            sigma_sq: report.sigma_sq,
            expected_smoothness: report.expected_smoothness,
            final_rel_mean,
        });
    }
    let path = workbench.out_path("runs_summary.csv");
    emit_csv(
        &path,
        &[
            "scheme",
            "gamma",
            "k_target",
            "sigma_sq",
            "expected_smoothness",
            "final_rel_error_mean",
        ],
        &summaries,
        |s| {
            vec![
                s.label.clone(),
                format_float(s.gamma),
                s.k_target.to_string(),
                format_float(s.sigma_sq),
                format_float(s.expected_smoothness),
                format_float(s.final_rel_mean),
            ]
        },
    )?;
    println!("wrote {}", path.display());
    if svg && !mean_series.is_empty() {
        let path = workbench.out_path("runs.svg");
        write_log_chart(
            &path,
            "seed-averaged relative error by epochs",
            "epochs",
            &mean_series,
        )?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
