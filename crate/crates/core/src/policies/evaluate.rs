use crate::demand::{DemandModel, DOMAIN_TOL};

use super::{PolicyError, PricingPolicy};

/// Expected revenue of `policy` from `(horizon, y0)` under Bernoulli sales,
/// by backward recursion over the reachable `(t, y)` lattice.
pub fn evaluate_policy_exact<P: PricingPolicy + ?Sized>(
    model: &DemandModel,
    policy: &P,
    horizon: usize,
    y0: usize,
) -> Result<f64, PolicyError> {
    if !model.is_bernoulli() {
        return Err(PolicyError::Unsupported(
            "exact evaluation needs integer (Bernoulli) sales".into(),
        ));
    }
    let iv = model.interval();
    let mut prev = vec![0.0; y0 + 1];
    let mut cur = vec![0.0; y0 + 1];
    for t in 1..=horizon {
        cur[0] = 0.0;
        for y in 1..=y0 {
            let dec = policy.decide(y as f64, t)?;
            if dec.shut_off {
                cur[y] = prev[y];
                continue;
            }
            let d = dec.demand_rate;
            if !(d >= iv.d_lo - DOMAIN_TOL && d <= iv.d_hi + DOMAIN_TOL) {
                return Err(PolicyError::RateOutOfDomain { rate: d, lo: iv.d_lo, hi: iv.d_hi, t, y });
            }
            cur[y] = d * dec.price + d * prev[y - 1] + (1.0 - d) * prev[y];
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[y0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{solve_dp, DpPolicy, ResolvingPolicy, StaticPolicy};
    use std::sync::Arc;

    /// `p E[min(Bin(T, d), y0)]` for the static policy.
    fn static_closed_form(m: &DemandModel, t: usize, y0: usize, d: f64) -> f64 {
        let mut pmf = vec![0.0; t + 1];
        pmf[0] = (1.0 - d).powi(t as i32);
        for k in 1..=t {
            pmf[k] = pmf[k - 1] * (t - k + 1) as f64 / k as f64 * d / (1.0 - d);
        }
        let sales: f64 = pmf.iter().enumerate().map(|(k, p)| p * k.min(y0) as f64).sum();
        m.price_for_rate(d) * sales
    }

    #[test]
    fn static_matches_binomial() {
        let m = DemandModel::benchmark_instance();
        for (t, y0) in [(16, 5), (64, 20), (200, 63)] {
            let x = y0 as f64 / t as f64;
            let exact = evaluate_policy_exact(&m, &StaticPolicy::new(&m, x), t, y0).unwrap();
            let closed = static_closed_form(&m, t, y0, x.min(0.375));
            assert!((exact - closed).abs() < 1e-10, "T={t}: {exact} vs {closed}");
        }
    }

    #[test]
    fn dp_policy_reproduces_dp_value() {
        let m = DemandModel::benchmark_instance();
        let table = Arc::new(solve_dp(&m, 300, 100).unwrap());
        let v = evaluate_policy_exact(&m, &DpPolicy::new(table.clone()), 300, 100).unwrap();
        assert!((v - table.value(300, 100)).abs() < 1e-9);
    }

    #[test]
    fn resolving_below_dp() {
        let m = DemandModel::benchmark_instance();
        for k in 4..=9 {
            let t = 1usize << k;
            let y0 = 5 * t / 16;
            let table = solve_dp(&m, t, y0).unwrap();
            let r = evaluate_policy_exact(&m, &ResolvingPolicy::new(&m), t, y0).unwrap();
            let s = evaluate_policy_exact(&m, &StaticPolicy::new(&m, 5.0 / 16.0), t, y0).unwrap();
            assert!(r <= table.value(t, y0) + 1e-9);
            assert!(s <= table.value(t, y0) + 1e-9);
        }
    }
}
