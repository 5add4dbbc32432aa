//! `sgdsamp constants`: the full constants-and-plan report for every
//! configured scheme, plus the side-by-side sampling bound comparison.

use anyhow::Result;
use sgdsamp_core::constants::sampling_bound_comparison;
use sgdsamp_core::schedule::build_report;
use sgdsamp_core::ConstantsReport;

use super::{resolve_all_schemes, Workbench};
use crate::config::TauValue;
use crate::csvio::{emit_csv, format_float, format_opt_float, format_opt_usize};

const REPORT_HEADER: &[&str] = &[
    "scheme",
    "n",
    "d",
    "lambda",
    "epsilon",
    "l_full",
    "l_max",
    "l_bar",
    "mu",
    "h_bar",
    "expected_smoothness",
    "provenance",
    "lmax_enumerated",
    "lmax_pairwise_bound",
    "sigma_sq",
    "gamma",
    "k_target",
    "tau_star",
    "total_complexity",
];

pub fn report_row(report: &ConstantsReport, lambda: f64) -> Vec<String> {
    vec![
        report.scheme.clone(),
        report.n.to_string(),
        report.d.to_string(),
        format_float(lambda),
        format_float(report.epsilon),
        format_float(report.l_full),
        format_float(report.l_max),
        format_float(report.l_bar),
        format_float(report.mu),
        format_float(report.h_bar),
        format_float(report.expected_smoothness),
        report.provenance.label().to_string(),
        format_opt_float(report.lmax_enumerated),
        format_opt_float(report.lmax_pairwise_bound),
        format_float(report.sigma_sq),
        format_float(report.gamma),
        report.k_target.to_string(),
        format_opt_usize(report.tau_star),
        format_opt_float(report.total_complexity),
    ]
}

pub fn run(workbench: &Workbench) -> Result<()> {
    let schemes = resolve_all_schemes(workbench)?;
    let epsilon = workbench.config.experiment.epsilon;
    let r0_sq = workbench.r0_sq();
    let mut reports = Vec::new();
    for resolved in &schemes {
        let report = build_report(
            &workbench.problem,
            &workbench.spec,
            &workbench.cert,
            &resolved.scheme,
            epsilon,
            r0_sq,
        )?;
        println!(
            "{:<28} cL = {:>12.6} ({})  sigma2 = {:>12.6}  gamma = {:.3e}  k = {}{}",
            resolved.label,
            report.expected_smoothness,
            report.provenance.label(),
            report.sigma_sq,
            report.gamma,
            report.k_target,
            report
                .tau_star
                .map(|t| format!("  tau* = {t}"))
                .unwrap_or_default(),
        );
        reports.push(report);
    }
    let path = workbench.out_path("constants.csv");
    let lambda = workbench.lambda;
    emit_csv(&path, REPORT_HEADER, &reports, |r| report_row(r, lambda))?;
    println!("wrote {}", path.display());

    // One comparison block per distinct configured batch size τ ≥ 2.
    let mut taus: Vec<usize> = workbench
        .config
        .schemes
        .iter()
        .filter_map(|s| match s.tau {
            Some(TauValue::Fixed(t)) if t >= 2 => Some(t),
            _ => None,
        })
        .collect();
    taus.sort_unstable();
    taus.dedup();
    if !taus.is_empty() && workbench.problem.n() >= 2 {
        let mut rows: Vec<(usize, &'static str, f64, f64)> = Vec::new();
        for &tau in &taus {
            let block = sampling_bound_comparison(
                workbench.spec.mean,
                workbench.spec.max,
                workbench.cert.h_bar(),
                workbench.problem.n(),
                tau,
            )?;
            for row in block {
                rows.push((tau, row.family, row.lmax_bound, row.sigma_bound));
            }
        }
        let path = workbench.out_path("bound_comparison.csv");
        emit_csv(
            &path,
            &["tau", "sampling", "lmax_bound", "sigma_bound"],
            &rows,
            |(tau, family, lmax, sigma)| {
                vec![
                    tau.to_string(),
                    family.to_string(),
                    format_float(*lmax),
                    format_float(*sigma),
                ]
            },
        )?;
        println!("wrote {}", path.display());
    }
    emit_importance_tables(workbench, &taus)?;
    Ok(())
}

/// Per-index probability tables of every importance construction the
/// problem admits, one row per (construction, index).
fn emit_importance_tables(workbench: &Workbench, taus: &[usize]) -> Result<()> {
    use sgdsamp_core::schedule::{
        independent_importance, partially_biased_independent, partially_biased_single,
        single_element_importance,
    };
    let spec = &workbench.spec;
    let cert = &workbench.cert;
    let epsilon = workbench.config.experiment.epsilon;
    let n = workbench.problem.n();
    let mut plans: Vec<(String, sgdsamp_core::ImportancePlan)> = vec![
        (
            "single-importance".into(),
            single_element_importance(&spec.component, &cert.h_norms(), spec.mu, epsilon)?,
        ),
        (
            "single-pb".into(),
            partially_biased_single(&spec.component)?,
        ),
    ];
    for &tau in taus {
        plans.push((
            format!("independent-importance-{tau}"),
            independent_importance(&spec.component, &cert.h_norms(), spec.mu, epsilon, tau)?,
        ));
        plans.push((
            format!("independent-pb-{tau}"),
            partially_biased_independent(&spec.component, tau, n)?,
        ));
    }
    let mut rows: Vec<(String, f64, usize, f64)> = Vec::new();
    for (label, plan) in &plans {
        for (index, &p) in plan.p.iter().enumerate() {
            rows.push((label.clone(), plan.alpha, index, p));
        }
    }
    let path = workbench.out_path("importance_plans.csv");
    emit_csv(
        &path,
        &["construction", "alpha", "index", "p"],
        &rows,
        |(label, alpha, index, p)| {
            vec![
                label.clone(),
                format_float(*alpha),
                index.to_string(),
                format_float(*p),
            ]
        },
    )?;
    println!("wrote {}", path.display());
    Ok(())
}
