use rayon::prelude::*;
use serde::Serialize;

use crate::policies::PolicyError;
use crate::sim::{ho_sample, monte_carlo, spearman, Spearman, Z95};

use super::{ExperimentError, HoCompareConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoCompareRow {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub fluid_value: f64,
    pub ho_value: f64,
    /// `fluid_value - ho_value`, estimated per replication.
    pub gap: f64,
    pub ci_half_width: f64,
    /// `(m / 2) w^2 / 3`, the second-order term of the gap.
    pub gap_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoCompare {
    pub rows: Vec<HoCompareRow>,
    /// Rank correlation of gap against `T`; `None` with fewer than three horizons.
    pub trend: Option<Spearman>,
}

/// Hindsight benchmark value against the fluid value `T r(x_T)` per horizon.
pub fn run_ho_compare(cfg: &HoCompareConfig) -> Result<HoCompare, ExperimentError> {
    let model = &cfg.model;
    if model.is_bernoulli() {
        return Err(PolicyError::Unsupported("the hindsight benchmark needs additive noise".into()).into());
    }
    let w = model.noise_half_width();
    let gap_bound = 0.5 * model.assumption_constants().m * w * w / 3.0;
    let rows = cfg
        .t_list
        .par_iter()
        .map(|&horizon| {
            let fluid = horizon as f64 * model.revenue_formula(cfg.x_t);
            let gap = monte_carlo(cfg.replications, cfg.base_seed, Z95, |s| {
                Ok(fluid - ho_sample(model, cfg.x_t, horizon, s)?.value)
            })?;
            Ok(HoCompareRow {
                horizon,
                fluid_value: fluid,
                ho_value: fluid - gap.mean,
                gap: gap.mean,
                ci_half_width: gap.half_width,
                gap_bound,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let trend = (rows.len() >= 3).then(|| {
        let t: Vec<f64> = rows.iter().map(|r| r.horizon as f64).collect();
        let g: Vec<f64> = rows.iter().map(|r| r.gap).collect();
        spearman(&t, &g)
    });
    Ok(HoCompare { rows, trend })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::DemandModel;

    #[test]
    fn zero_noise_gap_is_exactly_zero() {
        let cfg = HoCompareConfig {
            model: DemandModel::linear_additive(0.75, 0.5, 0.0, 1.0, 0.0).unwrap(),
            t_list: vec![8, 64],
            x_t: 0.3,
            replications: 50,
            base_seed: 1,
        };
        for r in run_ho_compare(&cfg).unwrap().rows {
            assert_eq!(r.gap, 0.0);
            assert_eq!(r.ci_half_width, 0.0);
        }
    }

    #[test]
    fn bernoulli_rejected() {
        let cfg = HoCompareConfig {
            model: DemandModel::benchmark_instance(),
            ..HoCompareConfig::preset()
        };
        assert!(run_ho_compare(&cfg).is_err());
    }
}
