use serde::Serialize;

use crate::demand::DemandModel;
use crate::policies::{PricingPolicy, PolicyDecision};

use super::{SimError, UniformStream};

/// One period of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodRecord {
    pub tau_remaining: usize,
    pub price: f64,
    pub demand_rate: f64,
    pub xi: f64,
    /// `demand_rate + xi`, before censoring by inventory.
    pub realized_demand: f64,
    pub inventory_after: f64,
    pub revenue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub seed: u64,
    pub initial_inventory: f64,
    /// Ordered by `tau_remaining = T, T-1, ..., 1`.
    pub records: Vec<PeriodRecord>,
    pub total_revenue: f64,
}

impl SimTrace {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn final_inventory(&self) -> f64 {
        self.records.last().map_or(self.initial_inventory, |r| r.inventory_after)
    }

    pub fn units_sold(&self) -> f64 {
        self.initial_inventory - self.final_inventory()
    }

    /// Inventory on hand at the start of each period, same order as `records`.
    pub fn inventory_before(&self) -> Vec<f64> {
        std::iter::once(self.initial_inventory)
            .chain(self.records.iter().map(|r| r.inventory_after))
            .take(self.records.len())
            .collect()
    }

    /// `xi` in record order (element 0 is `tau = T`).
    pub fn noise(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.xi).collect()
    }
}

/// Runs the inventory dynamics forward and hands each period to `sink`.
/// Returns total revenue.
pub(crate) fn run_path<P: PricingPolicy + ?Sized>(
    model: &DemandModel,
    policy: &P,
    horizon: usize,
    y0: f64,
    stream: &mut UniformStream,
    mut sink: impl FnMut(PeriodRecord),
) -> Result<f64, SimError> {
    if !(y0 >= 0.0) || !y0.is_finite() {
        return Err(SimError::InvalidInput(format!("initial inventory {y0} must be finite and nonnegative")));
    }
    let bernoulli = model.is_bernoulli();
    let mut y = y0;
    let mut total = 0.0;
    for tau in (1..=horizon).rev() {
        let dec = if y > 0.0 {
            policy.decide(y, tau).map_err(|source| SimError::Policy { tau, source })?
        } else {
            PolicyDecision::SHUT_OFF
        };
        // one uniform per period regardless of the decision keeps streams aligned
        let u = stream.next_uniform();
        let (xi, demand) = if dec.shut_off {
            (0.0, 0.0)
        } else if bernoulli {
            let sold = if u < dec.demand_rate { 1.0 } else { 0.0 };
            (sold - dec.demand_rate, sold)
        } else {
            let xi = model.noise_from_uniform(dec.demand_rate, u);
            (xi, dec.demand_rate + xi)
        };
        let sales = demand.min(y).max(0.0);
        let revenue = if sales > 0.0 { dec.price * sales } else { 0.0 };
        y -= sales;
        total += revenue;
        sink(PeriodRecord {
            tau_remaining: tau,
            price: dec.price,
            demand_rate: dec.demand_rate,
            xi,
            realized_demand: demand,
            inventory_after: y,
            revenue,
        });
    }
    Ok(total)
}

/// Simulates one path with the uniforms of `stream`.
pub fn simulate_with_stream<P: PricingPolicy + ?Sized>(
    model: &DemandModel,
    policy: &P,
    horizon: usize,
    y0: f64,
    stream: &mut UniformStream,
) -> Result<SimTrace, SimError> {
    let mut records = Vec::with_capacity(horizon);
    let total_revenue = run_path(model, policy, horizon, y0, stream, |r| records.push(r))?;
    Ok(SimTrace {
        seed: stream.seed(),
        initial_inventory: y0,
        records,
        total_revenue,
    })
}

pub fn simulate<P: PricingPolicy + ?Sized>(
    model: &DemandModel,
    policy: &P,
    horizon: usize,
    y0: f64,
    seed: u64,
) -> Result<SimTrace, SimError> {
    simulate_with_stream(model, policy, horizon, y0, &mut UniformStream::new(seed))
}

/// Total revenue of one path without recording it.
pub fn simulate_revenue<P: PricingPolicy + ?Sized>(
    model: &DemandModel,
    policy: &P,
    horizon: usize,
    y0: f64,
    seed: u64,
) -> Result<f64, SimError> {
    run_path(model, policy, horizon, y0, &mut UniformStream::new(seed), |_| {})
}

/// Runs every policy on the same uniform stream (common random numbers).
pub fn simulate_crn(
    model: &DemandModel,
    policies: &[&dyn PricingPolicy],
    horizon: usize,
    y0: f64,
    seed: u64,
) -> Result<Vec<SimTrace>, SimError> {
    policies.iter().map(|p| simulate(model, *p, horizon, y0, seed)).collect()
}
