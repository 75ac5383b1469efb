//! Seeded Monte Carlo engine, path diagnostics and regret aggregation.
//!
//! Every replication owns a ChaCha8 stream seeded with
//! `base_seed XOR splitmix64(rep)`, and each period consumes one uniform per
//! product. Results therefore do not depend on thread scheduling, and two
//! policies run on the same seed share their random numbers.

mod bounds;
mod diagnostics;
mod engine;
mod ho;
mod multi;
mod regret;
mod rng;
mod stats;

pub use bounds::{constant_bound, stopping_time_bound, sufficient_inventory_bound, ConstantBound};
pub use diagnostics::{
    diagnostics, gamma, harmonic_identity_check, harmonic_series, resolving_path_residual, stopping_time, Diagnostics,
};
pub use engine::{simulate, simulate_crn, simulate_revenue, simulate_with_stream, PeriodRecord, SimTrace};
pub use ho::{hindsight_info, ho_sample, HoSample};
pub use multi::{estimate_multi_regret, simulate_multi, MultiPathSummary, MultiRegretReport};
pub use regret::{
    estimate_regret, fluid_value, monte_carlo, DpUnavailable, RegretEntry, RegretOptions, RegretReport, ValueMethod,
};
pub use rng::{replication_seed, splitmix64, UniformStream};
pub use stats::{linear_fit, mean_ci, pairwise_sum, spearman, LinearFit, MeanCi, Spearman, Z95, Z99};

use thiserror::Error;

use crate::demand::DemandError;
use crate::policies::PolicyError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("period with {tau} remaining: {source}")]
    Policy { tau: usize, source: PolicyError },
    #[error(transparent)]
    Solver(#[from] PolicyError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
