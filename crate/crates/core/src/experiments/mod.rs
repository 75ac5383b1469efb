//! Preset experiments and their CSV output: the regret table, the gap and
//! concavity sweeps, and the hindsight-benchmark comparison.
//!
//! Every runner is deterministic given its config and base seed. Horizons are
//! processed on the rayon pool and collected in order, so reruns produce
//! byte-identical CSV.

mod config;
mod ho;
mod sweep;
mod table;

pub use config::{ExperimentConfig, HoCompareConfig, SweepConfig, SweepKind, Y0Rule};
pub use ho::{run_ho_compare, HoCompare, HoCompareRow};
pub use sweep::{run_sweep, SweepResult, SweepRow};
pub use table::{
    build_policy, format_table2, regret_rows, run_experiment, run_table2, RegretRow, TABLE2_DENSE_LIMIT,
};

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::demand::DemandError;
use crate::policies::PolicyError;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl From<PolicyError> for ExperimentError {
    fn from(e: PolicyError) -> Self {
        ExperimentError::Sim(e.into())
    }
}

impl From<DemandError> for ExperimentError {
    fn from(e: DemandError) -> Self {
        ExperimentError::Sim(e.into())
    }
}

fn policy_error(e: &SimError) -> Option<&PolicyError> {
    match e {
        SimError::Policy { source, .. } => Some(source),
        SimError::Solver(p) => Some(p),
        _ => None,
    }
}

impl ExperimentError {
    /// A size limit refused the run.
    pub fn is_resource_guard(&self) -> bool {
        match self {
            ExperimentError::ResourceGuard(_) => true,
            ExperimentError::Sim(e) => matches!(policy_error(e), Some(PolicyError::ResourceGuard(_))),
            _ => false,
        }
    }

    /// The demand model failed validation.
    pub fn is_model_invalid(&self) -> bool {
        let demand = match self {
            ExperimentError::Sim(SimError::Demand(d)) => Some(d),
            ExperimentError::Sim(e) => match policy_error(e) {
                Some(PolicyError::Demand(d)) => Some(d),
                _ => None,
            },
            _ => None,
        };
        matches!(demand, Some(DemandError::Invalid(_)))
    }
}

/// Writes `rows` as CSV with a header row. Floats keep full precision.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String, ExperimentError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
