use nalgebra::DVector;
use serde::Serialize;

use crate::demand::{MultiDemandModel, MultiKind};
use crate::fluid::solve_fluid_multi;

use super::{PolicyError, MULTI_STATE_LIMIT};

/// Prices for all products in one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiDecision {
    pub prices: Vec<f64>,
    pub demand_rates: Vec<f64>,
    pub shut_off: Vec<bool>,
    /// The fluid solution had an active constraint with a near-zero multiplier.
    pub degenerate: bool,
}

/// Re-solves the multi-product fluid problem with right-hand side `y / t`.
#[derive(Debug, Clone)]
pub struct MultiResolvingPolicy {
    model: MultiDemandModel,
}

impl MultiResolvingPolicy {
    pub fn new(model: &MultiDemandModel) -> Self {
        Self { model: model.clone() }
    }

    pub fn decide(&self, inventory: &[f64], remaining: usize) -> Result<MultiDecision, PolicyError> {
        let rhs: Vec<f64> = inventory.iter().map(|&y| y.max(0.0) / remaining as f64).collect();
        let sol = solve_fluid_multi(&self.model, &rhs)?;
        let degenerate = sol.is_degenerate();
        let x = DVector::from_vec(sol.x_c);
        let p = self.model.prices_for_rates(&x);
        let shut_off: Vec<bool> = inventory.iter().map(|&y| y <= 0.0).collect();
        let prices = (0..x.len()).map(|k| if shut_off[k] { f64::INFINITY } else { p[k] }).collect();
        Ok(MultiDecision {
            prices,
            demand_rates: x.iter().copied().collect(),
            shut_off,
            degenerate,
        })
    }
}

/// Expected revenue of the multi-product re-solving policy under independent
/// Bernoulli sales, by backward recursion over the inventory lattice.
pub fn evaluate_multi_resolving_exact(model: &MultiDemandModel, horizon: usize, y0: &[usize]) -> Result<f64, PolicyError> {
    let n = model.n();
    if y0.len() != n {
        return Err(PolicyError::Unsupported(format!("expected {n} initial inventories, got {}", y0.len())));
    }
    if model.kind() != MultiKind::QuadraticBernoulli {
        return Err(PolicyError::Unsupported("exact evaluation needs integer (Bernoulli) sales".into()));
    }
    model.require_valid()?;
    let states = y0.iter().try_fold(1usize, |acc, &y| acc.checked_mul(y + 1));
    match states.and_then(|s| s.checked_mul(horizon.max(1) << n)) {
        Some(work) if work <= MULTI_STATE_LIMIT * 4 => {}
        _ => return Err(PolicyError::ResourceGuard("inventory lattice too large for exact evaluation".into())),
    }
    let states = states.unwrap_or(0);
    let policy = MultiResolvingPolicy::new(model);
    // mixed radix: stride[k] = prod_{j > k} (y0_j + 1)
    let mut stride = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * (y0[k + 1] + 1);
    }
    let mut prev = vec![0.0; states];
    let mut cur = vec![0.0; states];
    let mut y = vec![0usize; n];
    for t in 1..=horizon {
        for s in 0..states {
            let mut rem = s;
            for k in 0..n {
                y[k] = rem / stride[k];
                rem %= stride[k];
            }
            let inv: Vec<f64> = y.iter().map(|&v| v as f64).collect();
            let dec = policy.decide(&inv, t)?;
            let x = DVector::from_column_slice(&dec.demand_rates);
            let mut value = model.revenue(&x);
            for mask in 0..(1usize << n) {
                let mut prob = 1.0;
                let mut next = s;
                for k in 0..n {
                    if mask >> k & 1 == 1 {
                        if y[k] == 0 {
                            prob = 0.0;
                            break;
                        }
                        prob *= x[k];
                        next -= stride[k];
                    } else {
                        prob *= 1.0 - x[k];
                    }
                }
                if prob > 0.0 {
                    value += prob * prev[next];
                }
            }
            cur[s] = value;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[states - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::solve_dp_multi;

    #[test]
    fn decision_on_instance() {
        let m = MultiDemandModel::two_product_instance();
        let p = MultiResolvingPolicy::new(&m);
        let d = p.decide(&[4.0, 4.0], 16).unwrap();
        assert!((d.demand_rates[0] - 0.25).abs() < 1e-14 && (d.demand_rates[1] - 0.25).abs() < 1e-14);
        // p = g + H x / 2 = 1 - 0.3125
        assert!((d.prices[0] - 0.6875).abs() < 1e-14);
        assert!(!d.degenerate);
        let d = p.decide(&[0.0, 4.0], 16).unwrap();
        assert!(d.shut_off[0] && d.prices[0].is_infinite());
        assert_eq!(d.demand_rates[0], 0.0);
    }

    #[test]
    fn resolving_below_dp_and_one_period_exact() {
        let m = MultiDemandModel::two_product_instance();
        for t in [1, 2, 4, 8, 16] {
            let y = t / 4 + 1;
            let r = evaluate_multi_resolving_exact(&m, t, &[y, y]).unwrap();
            let v = solve_dp_multi(&m, t, &[y, y]).unwrap();
            assert!(r <= v + 1e-12, "T={t}: {r} > {v}");
        }
        // one period with one unit each: rhs = 1 > x^u, so x = (0.4, 0.4)
        let r = evaluate_multi_resolving_exact(&m, 1, &[1, 1]).unwrap();
        assert!((r - 0.4).abs() < 1e-14);
    }
}
