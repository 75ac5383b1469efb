//! Fluid approximation: deterministic relaxation of the pricing problem.
//!
//! For one product the solution is the closed-form min rule. For several
//! products the fluid problem is a box-constrained concave quadratic program,
//! solved exactly by a primal active-set method. [`partial_optimum`] pins the
//! inventory-constrained products and re-optimizes the rest.

mod boxqp;
mod multi;
mod partial;
#[cfg(test)]
mod properties;
mod single;

pub use multi::{active_partition, kkt_residuals, solve_fluid_multi, KktResiduals, Partition};
pub use partial::{partial_optimum, PartialOptimum};
pub use single::{fluid_rate, solve_fluid_single, SingleFluid};

pub(crate) use boxqp::{maximize_box_qp, Bound};

use serde::Serialize;
use thiserror::Error;

use crate::demand::DemandError;

/// Membership tolerance for the active set.
pub const ACTIVE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluidError {
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error("invalid right-hand side: {0}")]
    Infeasible(String),
    #[error("quadratic objective is not strictly concave on the working set")]
    NotConcave,
    #[error("active-set iteration did not converge after {changes} working-set changes")]
    NoConvergence { changes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "warning", rename_all = "kebab-case")]
pub enum FluidWarning {
    /// Single product: the right-hand side was below `d_lo` and was raised to it.
    ClampedToDomain { requested: f64 },
    /// Single product: the right-hand side equals `x^u` (up to tolerance).
    Boundary,
    /// An inventory constraint is active with a multiplier at most the tolerance.
    Degenerate { product: usize, multiplier: f64 },
}

/// Solution of the fluid problem for a given inventory right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluidSolution {
    /// Constrained-optimal demand rates.
    pub x_c: Vec<f64>,
    /// Multipliers of the inventory constraints `x_c <= x`.
    pub lambda: Vec<f64>,
    /// Products whose inventory constraint binds (0-based).
    pub active_set: Vec<usize>,
    /// Revenue per period at `x_c`.
    pub objective: f64,
    #[serde(skip)]
    pub lower_dual: Vec<f64>,
    #[serde(skip)]
    pub box_dual: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<FluidWarning>,
}

impl FluidSolution {
    pub fn is_degenerate(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, FluidWarning::Degenerate { .. } | FluidWarning::Boundary))
    }
}
