use crate::demand::DemandModel;

use super::{PolicyDecision, PolicyError};

/// Largest horizon for which [`solve_dp`] keeps the full table.
pub const DENSE_HORIZON_LIMIT: usize = 1 << 13;
const DENSE_ENTRY_LIMIT: usize = 1 << 26;

/// Optimal value `V[t][y]` for `t <= horizon`, `y <= max_inventory`.
///
/// Only values are stored. The optimal action at `(t, y)` depends on row
/// `t - 1` alone and is recomputed on demand.
#[derive(Debug, Clone)]
pub struct ValueTable {
    model: DemandModel,
    horizon: usize,
    max_inventory: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn model(&self) -> &DemandModel {
        &self.model
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn max_inventory(&self) -> usize {
        self.max_inventory
    }

    #[inline]
    fn row(&self, t: usize) -> &[f64] {
        let w = self.max_inventory + 1;
        &self.values[t * w..(t + 1) * w]
    }

    /// `V[t][y]`. Panics outside the table.
    #[inline]
    pub fn value(&self, t: usize, y: usize) -> f64 {
        self.row(t)[y]
    }

    /// Optimal demand rate with `t >= 1` periods left and `y >= 1` units.
    #[inline]
    pub fn action(&self, t: usize, y: usize) -> f64 {
        let prev = self.row(t - 1);
        optimal_rate(&self.model, prev[y - 1] - prev[y])
    }

    pub fn decision(&self, t: usize, y: usize) -> PolicyDecision {
        if y == 0 || t == 0 {
            PolicyDecision::SHUT_OFF
        } else {
            PolicyDecision::at_rate(&self.model, self.action(t, y))
        }
    }

    /// `(t, y, demand_rate, price)` for every state with stock and time left.
    pub fn actions(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (1..=self.horizon).flat_map(move |t| {
            (1..=self.max_inventory).map(move |y| {
                let d = self.action(t, y);
                (t, y, d, self.model.price_for_rate(d))
            })
        })
    }
}

/// Maximizer of `r(d) + d * diff` over `[d_lo, d_hi]`, where `diff = V[t-1][y-1] - V[t-1][y]`.
#[inline]
fn optimal_rate(model: &DemandModel, diff: f64) -> f64 {
    let iv = model.interval();
    (0.5 * (model.alpha() + model.beta() * diff)).clamp(iv.d_lo, iv.d_hi)
}

/// One Bellman backup from `prev = V[t-1][..]` into `cur = V[t][..]`.
#[inline]
fn bellman_step(model: &DemandModel, prev: &[f64], cur: &mut [f64]) {
    cur[0] = 0.0;
    for y in 1..cur.len() {
        let diff = prev[y - 1] - prev[y];
        let d = optimal_rate(model, diff);
        cur[y] = model.revenue_formula(d) + prev[y] + d * diff;
    }
}

fn require_bernoulli(model: &DemandModel) -> Result<(), PolicyError> {
    if model.is_bernoulli() {
        Ok(())
    } else {
        Err(PolicyError::Unsupported(
            "exact dynamic program needs integer (Bernoulli) sales".into(),
        ))
    }
}

pub fn solve_dp(model: &DemandModel, horizon: usize, max_inventory: usize) -> Result<ValueTable, PolicyError> {
    require_bernoulli(model)?;
    if horizon > DENSE_HORIZON_LIMIT {
        return Err(PolicyError::ResourceGuard(format!(
            "dense value table limited to T <= {DENSE_HORIZON_LIMIT}; use the sliced solver"
        )));
    }
    let w = max_inventory + 1;
    let entries = (horizon + 1).checked_mul(w).filter(|&e| e <= DENSE_ENTRY_LIMIT).ok_or_else(|| {
        PolicyError::ResourceGuard(format!("value table with {} x {w} entries is too large", horizon + 1))
    })?;
    let mut values = vec![0.0; entries];
    for t in 1..=horizon {
        let (done, rest) = values.split_at_mut(t * w);
        bellman_step(model, &done[(t - 1) * w..], &mut rest[..w]);
    }
    Ok(ValueTable {
        model: *model,
        horizon,
        max_inventory,
        values,
    })
}

/// `V[T][0..=y0]` with two rows of memory.
pub fn dp_value_slice(model: &DemandModel, horizon: usize, y0: usize) -> Result<Vec<f64>, PolicyError> {
    require_bernoulli(model)?;
    let mut prev = vec![0.0; y0 + 1];
    let mut cur = vec![0.0; y0 + 1];
    for _ in 0..horizon {
        bellman_step(model, &prev, &mut cur);
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev)
}

/// Optimal expected revenue `V[T][y0]`.
pub fn dp_value(model: &DemandModel, horizon: usize, y0: usize) -> Result<f64, PolicyError> {
    Ok(dp_value_slice(model, horizon, y0)?[y0])
}
