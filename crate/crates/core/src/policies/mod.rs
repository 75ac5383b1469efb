//! Pricing policies and their exact evaluation.
//!
//! A policy maps the state `(inventory, periods remaining)` to a price. The
//! static policy commits to the fluid price once; the re-solving heuristic
//! re-solves the fluid model every period with the current normalized
//! inventory; the DP policy reads the Bellman-optimal action; the
//! hindsight-optimum policy is granted the realized mean noise in advance.

mod dp;
mod dp_multi;
mod evaluate;
mod multi;

pub use dp::{dp_value, dp_value_slice, solve_dp, ValueTable, DENSE_HORIZON_LIMIT};
pub use dp_multi::{solve_dp_multi, MULTI_STATE_LIMIT};
pub use evaluate::evaluate_policy_exact;
pub use multi::{evaluate_multi_resolving_exact, MultiDecision, MultiResolvingPolicy};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::{DemandError, DemandModel};
use crate::fluid::{fluid_rate, FluidError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error(transparent)]
    Fluid(#[from] FluidError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("state (t = {t}, y = {y}) outside the value table")]
    OutsideTable { t: usize, y: f64 },
    #[error("policy chose demand rate {rate} outside [{lo}, {hi}] at (t = {t}, y = {y})")]
    RateOutOfDomain { rate: f64, lo: f64, hi: f64, t: usize, y: usize },
}

/// Price posted for one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyDecision {
    pub price: f64,
    pub demand_rate: f64,
    /// Inventory is exhausted: price is `+inf` and no demand arrives.
    pub shut_off: bool,
}

impl PolicyDecision {
    pub const SHUT_OFF: PolicyDecision = PolicyDecision {
        price: f64::INFINITY,
        demand_rate: 0.0,
        shut_off: true,
    };

    /// Posts `f^-1(rate)`.
    #[inline]
    pub fn at_rate(model: &DemandModel, rate: f64) -> Self {
        PolicyDecision {
            price: model.price_for_rate(rate),
            demand_rate: rate,
            shut_off: false,
        }
    }
}

pub trait PricingPolicy: Send + Sync {
    fn name(&self) -> &str;

    /// Decision with `remaining >= 1` periods left and `inventory` units on hand.
    fn decide(&self, inventory: f64, remaining: usize) -> Result<PolicyDecision, PolicyError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Static,
    Resolving,
    Dp,
    Ho,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Static => "static",
            PolicyKind::Resolving => "resolving",
            PolicyKind::Dp => "dp",
            PolicyKind::Ho => "ho",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(PolicyKind::Static),
            "resolving" => Ok(PolicyKind::Resolving),
            "dp" => Ok(PolicyKind::Dp),
            "ho" => Ok(PolicyKind::Ho),
            other => Err(format!("unknown policy {other:?} (expected static, resolving, dp or ho)")),
        }
    }
}

/// `p_t = f^-1(min(x_T, x^u))` for as long as inventory lasts.
#[derive(Debug, Clone)]
pub struct StaticPolicy {
    decision: PolicyDecision,
}

impl StaticPolicy {
    pub fn new(model: &DemandModel, x_t: f64) -> Self {
        let rate = fluid_rate(model, x_t).rate;
        Self {
            decision: PolicyDecision::at_rate(model, rate),
        }
    }

    pub fn price(&self) -> f64 {
        self.decision.price
    }
}

impl PricingPolicy for StaticPolicy {
    fn name(&self) -> &str {
        "static"
    }

    #[inline]
    fn decide(&self, inventory: f64, _remaining: usize) -> Result<PolicyDecision, PolicyError> {
        Ok(if inventory <= 0.0 { PolicyDecision::SHUT_OFF } else { self.decision })
    }
}

/// Re-solves the fluid model with right-hand side `y / t` each period.
#[derive(Debug, Clone)]
pub struct ResolvingPolicy {
    model: DemandModel,
}

impl ResolvingPolicy {
    pub fn new(model: &DemandModel) -> Self {
        Self { model: *model }
    }
}

impl PricingPolicy for ResolvingPolicy {
    fn name(&self) -> &str {
        "resolving"
    }

    #[inline]
    fn decide(&self, inventory: f64, remaining: usize) -> Result<PolicyDecision, PolicyError> {
        if inventory <= 0.0 {
            return Ok(PolicyDecision::SHUT_OFF);
        }
        let rate = fluid_rate(&self.model, inventory / remaining as f64).rate;
        Ok(PolicyDecision::at_rate(&self.model, rate))
    }
}

/// Reads the Bellman-optimal action from a solved [`ValueTable`].
#[derive(Debug, Clone)]
pub struct DpPolicy {
    table: Arc<ValueTable>,
}

impl DpPolicy {
    pub fn new(table: Arc<ValueTable>) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &ValueTable {
        &self.table
    }
}

impl PricingPolicy for DpPolicy {
    fn name(&self) -> &str {
        "dp"
    }

    fn decide(&self, inventory: f64, remaining: usize) -> Result<PolicyDecision, PolicyError> {
        let y = inventory.round();
        if (inventory - y).abs() > 1e-9 || y < 0.0 || y > self.table.max_inventory() as f64 || remaining > self.table.horizon() {
            return Err(PolicyError::OutsideTable { t: remaining, y: inventory });
        }
        Ok(self.table.decision(remaining, y as usize))
    }
}

/// Realized mean noise over the horizon, known to the hindsight policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HindsightInfo {
    pub xi_bar: f64,
}

/// Fixed price `f^-1(clip(x_T + xi_bar, d_lo, d_hi))`. Defined for additive
/// i.i.d. noise only, where the realized demand curve for every fixed price is
/// determined by `xi_bar`.
#[derive(Debug, Clone)]
pub struct HoPolicy {
    decision: PolicyDecision,
    info: HindsightInfo,
}

impl HoPolicy {
    pub fn new(model: &DemandModel, x_t: f64, info: HindsightInfo) -> Result<Self, PolicyError> {
        if model.is_bernoulli() {
            return Err(PolicyError::Unsupported(
                "hindsight benchmark needs price-independent additive noise".into(),
            ));
        }
        if info.xi_bar.abs() > model.noise_bound() + 1e-12 {
            return Err(PolicyError::Unsupported(format!(
                "|xi_bar| = {} exceeds the noise bound {}",
                info.xi_bar.abs(),
                model.noise_bound()
            )));
        }
        let iv = model.interval();
        let rate = (x_t + info.xi_bar).clamp(iv.d_lo, iv.d_hi);
        Ok(Self {
            decision: PolicyDecision::at_rate(model, rate),
            info,
        })
    }

    pub fn info(&self) -> HindsightInfo {
        self.info
    }

    pub fn demand_rate(&self) -> f64 {
        self.decision.demand_rate
    }
}

impl PricingPolicy for HoPolicy {
    fn name(&self) -> &str {
        "ho"
    }

    fn decide(&self, inventory: f64, _remaining: usize) -> Result<PolicyDecision, PolicyError> {
        Ok(if inventory <= 0.0 { PolicyDecision::SHUT_OFF } else { self.decision })
    }
}
