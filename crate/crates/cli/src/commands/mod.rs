//! Subcommand implementations behind the `sgdsamp` binary.

pub mod constants;
pub mod gen;
pub mod run;
pub mod sweep;
pub mod verify;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sgdsamp_core::engine::standard_gaussian_vector;
use sgdsamp_core::linalg::dist_sq;
use sgdsamp_core::problem::{
    make_logistic, make_nonconvex_sum, make_ridge, solve_minimizer, FiniteSumProblem,
    MinimizerCertificate, SmoothnessSpec,
};
use sgdsamp_core::sampling::SamplingScheme;
use sgdsamp_core::schedule::{
    independent_importance, partially_biased_independent, partially_biased_single,
    single_element_importance, BatchPlan,
};

use crate::config::{
    resolve_output_dir, DataSource, ExperimentConfig, SchemeConfig, SchemeKind, TauValue,
};
use crate::dataset::{gen_synthetic, parse_libsvm, Dataset, SyntheticTask};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Everything a command needs after loading a config: the dataset, the
/// constructed problem with its constants, the certified minimizer, and
/// the output directory.
pub struct Workbench {
    pub config: ExperimentConfig,
    pub dataset: Dataset,
    pub problem: FiniteSumProblem,
    pub spec: SmoothnessSpec,
    pub cert: MinimizerCertificate,
    pub lambda: f64,
    pub out_dir: PathBuf,
}

impl Workbench {
    pub fn from_config(config: ExperimentConfig, out_flag: Option<&Path>) -> Result<Self> {
        let dataset = load_dataset(&config)?;
        let n = dataset.n();
        let lambda = config.experiment.lambda.unwrap_or(1.0 / n as f64);
        let (problem, spec) = build_problem(&dataset, config.dataset.task, lambda, &config)?;
        let cert = solve_minimizer(&problem).context("failed to certify the minimizer")?;
        let out_dir = resolve_output_dir(out_flag, config.experiment.output_dir.as_deref());
        std::fs::create_dir_all(&out_dir)
            .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
        Ok(Workbench {
            config,
            dataset,
            problem,
            spec,
            cert,
            lambda,
            out_dir,
        })
    }

    /// Squared distance from the shared Gaussian start to x*.
    pub fn r0_sq(&self) -> f64 {
        let x0 = standard_gaussian_vector(self.config.base_seed(), self.problem.dim());
        dist_sq(&x0, &self.cert.x_star)
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    match config.dataset.source {
        DataSource::Synthetic => {
            let n = config.dataset.n.expect("validated");
            let d = config.dataset.d.expect("validated");
            let seed = config.dataset.seed.unwrap_or(0);
            Ok(gen_synthetic(config.dataset.task, n, d, seed))
        }
        DataSource::Libsvm => {
            let path = config.dataset.path.as_ref().expect("validated");
            Ok(parse_libsvm(path)?)
        }
    }
}

fn build_problem(
    dataset: &Dataset,
    task: SyntheticTask,
    lambda: f64,
    config: &ExperimentConfig,
) -> Result<(FiniteSumProblem, SmoothnessSpec)> {
    let a = dataset.a.clone();
    match task {
        SyntheticTask::Ridge => Ok(make_ridge(a, dataset.y.clone(), lambda)?),
        SyntheticTask::Logistic => {
            let y = dataset.binarized_labels()?;
            Ok(make_logistic(a, y, lambda)?)
        }
        SyntheticTask::Nonconvex => {
            let seed = config.base_seed();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let b: Vec<f64> = (0..dataset.d()).map(|_| rng.gen_range(0.0..10.0)).collect();
            Ok(make_nonconvex_sum(a, b, seed)?)
        }
    }
}

/// A scheme ready to run, with a file-system-friendly label.
pub struct ResolvedScheme {
    pub label: String,
    pub scheme: SamplingScheme,
}

pub fn resolve_scheme(workbench: &Workbench, config: &SchemeConfig) -> Result<ResolvedScheme> {
    let n = workbench.problem.n();
    let spec = &workbench.spec;
    let cert = &workbench.cert;
    let epsilon = workbench.config.experiment.epsilon;
    let tau = match &config.tau {
        None => None,
        Some(TauValue::Fixed(t)) => Some(*t),
        Some(TauValue::Named(_)) => {
            let plan = match config.kind {
                SchemeKind::TauNice => {
                    BatchPlan::tau_nice(spec.full, spec.max, cert.h_bar(), spec.mu, epsilon, n)?
                }
                SchemeKind::IndependentUniform => {
                    BatchPlan::independent(spec.full, spec.max, cert.h_bar(), spec.mu, epsilon, n)?
                }
                _ => bail!("optimal tau is undefined for {}", config.kind.label()),
            };
            Some(plan.tau_star)
        }
    };
    let (label, scheme) = match config.kind {
        SchemeKind::SingleUniform => (
            "single-uniform".to_string(),
            SamplingScheme::single_element_uniform(n)?,
        ),
        SchemeKind::SingleImportance => {
            let plan =
                single_element_importance(&spec.component, &cert.h_norms(), spec.mu, epsilon)?;
            (
                "single-importance".to_string(),
                SamplingScheme::single_element(plan.p)?,
            )
        }
        SchemeKind::SinglePartiallyBiased => {
            let plan = partially_biased_single(&spec.component)?;
            (
                "single-pb".to_string(),
                SamplingScheme::single_element(plan.p)?,
            )
        }
        SchemeKind::TauNice => {
            let tau = tau.expect("validated");
            (format!("tau-nice-{tau}"), SamplingScheme::tau_nice(n, tau)?)
        }
        SchemeKind::IndependentUniform => {
            let tau = tau.expect("validated");
            (
                format!("independent-uniform-{tau}"),
                SamplingScheme::independent_uniform(n, tau)?,
            )
        }
        SchemeKind::IndependentImportance => {
            let tau = tau.expect("validated");
            let plan =
                independent_importance(&spec.component, &cert.h_norms(), spec.mu, epsilon, tau)?;
            (
                format!("independent-importance-{tau}"),
                SamplingScheme::independent(plan.p)?,
            )
        }
        SchemeKind::IndependentPartiallyBiased => {
            let tau = tau.expect("validated");
            let plan = partially_biased_independent(&spec.component, tau, n)?;
            (
                format!("independent-pb-{tau}"),
                SamplingScheme::independent(plan.p)?,
            )
        }
        SchemeKind::Partition => {
            let tau = tau.expect("validated").min(n);
            let groups: Vec<Vec<usize>> = (0..n)
                .collect::<Vec<_>>()
                .chunks(tau)
                .map(|c| c.to_vec())
                .collect();
            let q: Vec<f64> = groups.iter().map(|g| g.len() as f64 / n as f64).collect();
            (
                format!("partition-{tau}"),
                SamplingScheme::partition(groups, q)?,
            )
        }
        SchemeKind::FullBatch => ("full-batch".to_string(), SamplingScheme::full_batch(n)?),
    };
    Ok(ResolvedScheme { label, scheme })
}

pub fn resolve_all_schemes(workbench: &Workbench) -> Result<Vec<ResolvedScheme>> {
    if workbench.config.schemes.is_empty() {
        bail!("config declares no [[schemes]]");
    }
    workbench
        .config
        .schemes
        .iter()
        .map(|s| resolve_scheme(workbench, s))
        .collect()
}
