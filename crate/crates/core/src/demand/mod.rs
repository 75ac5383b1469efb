//! Demand models: the price-to-demand curve, its inverse, the revenue curve
//! in demand-rate space, and the noise families that drive the simulator.
//!
//! Single-product models are linear, `f(p) = alpha - beta * p`, with either
//! Bernoulli unit sales or additive uniform noise. Multi-product models are
//! specified directly through a strictly concave quadratic revenue function
//! on a box of demand rates (see [`multi`]).

mod linear;
pub mod multi;
mod wasserstein;

pub use linear::{AssumptionConstants, DemandKind, DemandModel, DemandSpec, PriceInterval};
pub use multi::{MultiDemandModel, MultiDemandSpec, MultiKind, MultiValidation};
pub use wasserstein::wasserstein2_discrete;
pub(crate) use linear::unit_uniform;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed when checking that a price or rate lies in its interval.
pub const DOMAIN_TOL: f64 = 1e-12;

/// One violated modelling assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Short assumption tag, e.g. `"A1"` or `"B2"`.
    pub assumption: String,
    pub message: String,
}

impl Violation {
    pub(crate) fn new(assumption: &str, message: impl Into<String>) -> Self {
        Self {
            assumption: assumption.to_string(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.assumption, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemandError {
    #[error("{what} {value} outside [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("model violates {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("malformed model: {0}")]
    Malformed(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Any model accepted on the command line, dispatched on its `"kind"` field.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    Single(DemandModel),
    Multi(MultiDemandModel),
}

impl ModelFile {
    /// Parses a model JSON object. Multi-product models are returned without
    /// assumption checks; call [`MultiDemandModel::validate`] for those.
    pub fn from_json(text: &str) -> Result<Self, DemandError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| DemandError::Malformed(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, DemandError> {
        let kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| DemandError::Malformed("missing string field \"kind\"".into()))?
            .to_string();
        if kind.starts_with("linear-") {
            let spec: DemandSpec =
                serde_json::from_value(value).map_err(|e| DemandError::Malformed(e.to_string()))?;
            Ok(Self::Single(DemandModel::try_from(spec)?))
        } else if kind.starts_with("quadratic-") {
            let spec: MultiDemandSpec =
                serde_json::from_value(value).map_err(|e| DemandError::Malformed(e.to_string()))?;
            Ok(Self::Multi(MultiDemandModel::try_from(spec)?))
        } else {
            Err(DemandError::Malformed(format!("unknown model kind {kind:?}")))
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            Self::Single(m) => serde_json::to_string(m),
            Self::Multi(m) => serde_json::to_string(m),
        }
        .expect("models always serialize")
    }
}
