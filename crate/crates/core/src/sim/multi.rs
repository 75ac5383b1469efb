use nalgebra::DVector;
use serde::Serialize;

use crate::demand::{MultiDemandModel, MultiKind};
use crate::policies::{evaluate_multi_resolving_exact, solve_dp_multi, MultiResolvingPolicy};

use super::{monte_carlo, MeanCi, SimError, UniformStream};

/// Summary of one multi-product path under the re-solving policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiPathSummary {
    pub realized_revenue: f64,
    /// `sum_t r(x_t)`: expected revenue given the path's decisions. Also an
    /// unbiased estimator of the policy value, though not a lower-variance one.
    pub expected_revenue: f64,
    pub final_inventory: Vec<f64>,
    /// Periods whose fluid solution flagged a degenerate active constraint.
    pub degenerate_periods: usize,
}

pub fn simulate_multi(
    model: &MultiDemandModel,
    policy: &MultiResolvingPolicy,
    horizon: usize,
    y0: &[f64],
    seed: u64,
) -> Result<MultiPathSummary, SimError> {
    let n = model.n();
    if y0.len() != n || y0.iter().any(|y| !(*y >= 0.0)) {
        return Err(SimError::InvalidInput(format!("need {n} nonnegative initial inventories")));
    }
    let bernoulli = model.kind() == MultiKind::QuadraticBernoulli;
    let mut stream = UniformStream::new(seed);
    let mut y = y0.to_vec();
    let mut out = MultiPathSummary {
        realized_revenue: 0.0,
        expected_revenue: 0.0,
        final_inventory: Vec::new(),
        degenerate_periods: 0,
    };
    for tau in (1..=horizon).rev() {
        let dec = policy.decide(&y, tau).map_err(|source| SimError::Policy { tau, source })?;
        out.degenerate_periods += dec.degenerate as usize;
        out.expected_revenue += model.revenue(&DVector::from_column_slice(&dec.demand_rates));
        for k in 0..n {
            let u = stream.next_uniform();
            if dec.shut_off[k] {
                continue;
            }
            let rate = dec.demand_rates[k];
            let demand = if bernoulli {
                if u < rate {
                    1.0
                } else {
                    0.0
                }
            } else {
                rate + model.noise_from_uniform(rate, u)
            };
            let sales = demand.min(y[k]).max(0.0);
            if sales > 0.0 {
                out.realized_revenue += dec.prices[k] * sales;
                y[k] -= sales;
            }
        }
    }
    out.final_inventory = y;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiRegretReport {
    pub horizon: usize,
    pub y0: Vec<usize>,
    pub dp_value: f64,
    /// Exact value of the re-solving policy on the inventory lattice.
    pub exact_value: f64,
    /// Monte Carlo estimate of the re-solving value.
    pub estimate: MeanCi,
    /// `dp_value - estimate.mean`, with half-width `estimate.half_width`.
    pub regret: f64,
}

/// Re-solving regret against the two-product DP, by Monte Carlo with the
/// exact lattice value alongside as a cross-check.
pub fn estimate_multi_regret(
    model: &MultiDemandModel,
    horizons: &[usize],
    y0_rule: impl Fn(usize) -> Vec<usize>,
    replications: usize,
    base_seed: u64,
    z: f64,
) -> Result<Vec<MultiRegretReport>, SimError> {
    let policy = MultiResolvingPolicy::new(model);
    horizons
        .iter()
        .map(|&horizon| {
            let y0 = y0_rule(horizon);
            let dp_value = solve_dp_multi(model, horizon, &y0)?;
            let exact_value = evaluate_multi_resolving_exact(model, horizon, &y0)?;
            let start: Vec<f64> = y0.iter().map(|&v| v as f64).collect();
            let estimate = monte_carlo(replications, base_seed, z, |s| {
                Ok(simulate_multi(model, &policy, horizon, &start, s)?.realized_revenue)
            })?;
            Ok(MultiRegretReport {
                horizon,
                y0,
                dp_value,
                exact_value,
                regret: dp_value - estimate.mean,
                estimate,
            })
        })
        .collect()
}
