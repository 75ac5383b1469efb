use rayon::prelude::*;
use serde::Serialize;

use crate::demand::DemandModel;
use crate::policies::{dp_value, evaluate_policy_exact, PolicyError, PolicyKind, ResolvingPolicy, StaticPolicy};

use super::{ho_sample, mean_ci, replication_seed, simulate_revenue, MeanCi, SimError, Z95};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueMethod {
    /// Closed form, e.g. the fluid value.
    Analytic,
    Exact,
    MonteCarlo,
}

/// Why `regret_vs_dp` is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DpUnavailable {
    /// The exact DP needs unit (Bernoulli) sales.
    ContinuousSales,
}

impl DpUnavailable {
    pub fn code(&self) -> &'static str {
        match self {
            DpUnavailable::ContinuousSales => "continuous-sales",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretEntry {
    /// `fluid` or a policy name.
    pub policy: String,
    pub value: f64,
    /// Zero for exact and analytic values.
    pub ci_half_width: f64,
    pub regret_vs_dp: Option<f64>,
    pub regret_vs_fluid: f64,
    pub method: ValueMethod,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub horizon: usize,
    pub y0: usize,
    /// `T r(min(y0 / T, x^u))`.
    pub fluid_value: f64,
    pub dp_value: Option<f64>,
    pub dp_unavailable: Option<DpUnavailable>,
    pub base_seed: u64,
    pub entries: Vec<RegretEntry>,
}

impl RegretReport {
    pub fn entry(&self, policy: &str) -> Option<&RegretEntry> {
        self.entries.iter().find(|e| e.policy == policy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretOptions {
    pub replications: usize,
    pub base_seed: u64,
    /// Normal quantile of the confidence interval.
    pub z: f64,
}

impl Default for RegretOptions {
    fn default() -> Self {
        Self {
            replications: 10_000,
            base_seed: 0,
            z: Z95,
        }
    }
}

/// `T r(min(y0 / T, x^u))`, using the quadratic formula below `d_lo`.
pub fn fluid_value(model: &DemandModel, horizon: usize, y0: usize) -> f64 {
    let x = (y0 as f64 / horizon as f64).min(model.unconstrained_optimum());
    horizon as f64 * model.revenue_formula(x)
}

/// Mean and confidence interval of `sample(seed_rep)` over replications,
/// evaluated in parallel and reduced in replication order.
pub fn monte_carlo<F>(replications: usize, base_seed: u64, z: f64, sample: F) -> Result<MeanCi, SimError>
where
    F: Fn(u64) -> Result<f64, SimError> + Sync,
{
    if replications == 0 {
        return Err(SimError::InvalidInput("replications must be at least 1".into()));
    }
    let values = (0..replications as u64)
        .into_par_iter()
        .map(|rep| sample(replication_seed(base_seed, rep)))
        .collect::<Result<Vec<f64>, SimError>>()?;
    Ok(mean_ci(&values, z))
}

fn policy_value(
    model: &DemandModel,
    kind: PolicyKind,
    horizon: usize,
    y0: usize,
    dp: Option<f64>,
    opts: &RegretOptions,
) -> Result<(f64, f64, ValueMethod, usize), SimError> {
    let x_t = y0 as f64 / horizon as f64;
    let y = y0 as f64;
    if model.is_bernoulli() {
        let v = match kind {
            PolicyKind::Static => evaluate_policy_exact(model, &StaticPolicy::new(model, x_t), horizon, y0)?,
            PolicyKind::Resolving => evaluate_policy_exact(model, &ResolvingPolicy::new(model), horizon, y0)?,
            PolicyKind::Dp => dp.expect("dp value computed for Bernoulli models"),
            PolicyKind::Ho => {
                return Err(PolicyError::Unsupported("hindsight benchmark needs additive noise".into()).into());
            }
        };
        return Ok((v, 0.0, ValueMethod::Exact, 0));
    }
    let ci = match kind {
        PolicyKind::Static => {
            let p = StaticPolicy::new(model, x_t);
            monte_carlo(opts.replications, opts.base_seed, opts.z, |s| simulate_revenue(model, &p, horizon, y, s))?
        }
        PolicyKind::Resolving => {
            let p = ResolvingPolicy::new(model);
            monte_carlo(opts.replications, opts.base_seed, opts.z, |s| simulate_revenue(model, &p, horizon, y, s))?
        }
        PolicyKind::Ho => monte_carlo(opts.replications, opts.base_seed, opts.z, |s| {
            Ok(ho_sample(model, x_t, horizon, s)?.value)
        })?,
        PolicyKind::Dp => {
            return Err(PolicyError::Unsupported("exact dynamic program needs integer (Bernoulli) sales".into()).into());
        }
    };
    Ok((ci.mean, ci.half_width, ValueMethod::MonteCarlo, opts.replications))
}

/// Regret of each policy against the DP optimum (when available) and the fluid
/// value, for every horizon in `horizons` with initial inventory `y0_rule(T)`.
///
/// Bernoulli models are evaluated exactly and `replications` is ignored.
pub fn estimate_regret(
    model: &DemandModel,
    horizons: &[usize],
    y0_rule: impl Fn(usize) -> usize,
    policies: &[PolicyKind],
    opts: &RegretOptions,
) -> Result<Vec<RegretReport>, SimError> {
    horizons
        .iter()
        .map(|&horizon| {
            if horizon == 0 {
                return Err(SimError::InvalidInput("horizon must be at least 1".into()));
            }
            let y0 = y0_rule(horizon);
            let fluid = fluid_value(model, horizon, y0);
            let (dp, dp_unavailable) = if model.is_bernoulli() {
                (Some(dp_value(model, horizon, y0)?), None)
            } else {
                (None, Some(DpUnavailable::ContinuousSales))
            };
            let mut entries = vec![RegretEntry {
                policy: "fluid".into(),
                value: fluid,
                ci_half_width: 0.0,
                regret_vs_dp: dp.map(|v| v - fluid),
                regret_vs_fluid: 0.0,
                method: ValueMethod::Analytic,
                replications: 0,
            }];
            for &kind in policies {
                let (value, ci, method, replications) = policy_value(model, kind, horizon, y0, dp, opts)?;
                entries.push(RegretEntry {
                    policy: kind.as_str().into(),
                    value,
                    ci_half_width: ci,
                    regret_vs_dp: dp.map(|v| v - value),
                    regret_vs_fluid: fluid - value,
                    method,
                    replications,
                });
            }
            Ok(RegretReport {
                horizon,
                y0,
                fluid_value: fluid,
                dp_value: dp,
                dp_unavailable,
                base_seed: opts.base_seed,
                entries,
            })
        })
        .collect()
}
