//! SGD under arbitrary sampling.
//!
//! The crate builds finite-sum problems (ridge, regularized logistic,
//! sums of non-convex quadratics), draws mini-batches from a catalog of
//! sampling schemes, computes the expected-smoothness and gradient-noise
//! constants of each (problem, scheme) pair in closed form, turns those
//! constants into stepsize and mini-batch plans, and runs the resulting
//! SGD variants. A brute-force oracle module re-derives every closed form
//! by support enumeration or Monte Carlo so that nothing is trusted on
//! faith.
//!
//! The crate is `no_std` + `alloc`; all file and CLI concerns live in the
//! companion `sgdsamp-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod constants;
pub mod engine;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod sampling;
pub mod schedule;

pub use constants::ConstantsReport;
pub use engine::{RunConfig, RunRecord};
pub use problem::{FiniteSumProblem, MinimizerCertificate, SmoothnessSpec};
pub use sampling::{PairwiseProbabilities, Sampler, SamplingRealization, SamplingScheme};
pub use schedule::{BatchPlan, ImportancePlan, StepsizePlan};

// Problems and schemes are immutable after construction and shared across
// concurrent runs; each run owns its sampler and generator state.
#[cfg(test)]
mod concurrency_contract {
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn shared_types_are_send_and_sync() {
        assert_send_sync::<crate::FiniteSumProblem>();
        assert_send_sync::<crate::SmoothnessSpec>();
        assert_send_sync::<crate::MinimizerCertificate>();
        assert_send_sync::<crate::SamplingScheme>();
        assert_send_sync::<crate::PairwiseProbabilities>();
        assert_send_sync::<crate::StepsizePlan>();
        assert_send_sync::<crate::BatchPlan>();
        assert_send_sync::<crate::ConstantsReport>();
    }
}
