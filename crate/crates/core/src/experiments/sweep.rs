use rayon::prelude::*;
use serde::Serialize;

use crate::demand::DemandModel;
use crate::policies::{dp_value, evaluate_policy_exact, ResolvingPolicy};
use crate::sim::fluid_value;

use super::{ExperimentError, SweepConfig, SweepKind, Y0Rule};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep: SweepKind,
    /// `x_T` for a gap sweep, `a = b` for a concavity sweep.
    pub parameter: f64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub y0: usize,
    pub dp_value: f64,
    pub resolving_value: f64,
    pub regret_vs_dp: f64,
    pub regret_vs_fluid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// For a gap sweep containing `x_T = x^u`: whether re-solving regret is
    /// strictly increasing over the horizon grid at that value.
    pub boundary_increasing: Option<bool>,
}

impl SweepResult {
    pub fn curve(&self, parameter: f64) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.parameter == parameter).collect()
    }
}

fn setting(cfg: &SweepConfig, value: f64) -> Result<(DemandModel, Y0Rule), ExperimentError> {
    match cfg.kind {
        SweepKind::Gap => Ok((DemandModel::benchmark_instance(), Y0Rule::from_decimal(value)?)),
        SweepKind::Concavity => {
            let x_t = cfg.x_t.expect("validated");
            Ok((DemandModel::linear_bernoulli(value, value, 0.0, 1.0)?, Y0Rule::from_decimal(x_t)?))
        }
    }
}

/// Exact re-solving regret curves for each sweep value.
///
/// Both the DP and the policy evaluation keep two time slices, so horizons
/// up to `2^20` fit in memory; the cost is `O(T y0)` per cell.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, ExperimentError> {
    cfg.validate()?;
    let settings = cfg
        .values
        .iter()
        .map(|&v| setting(cfg, v).map(|s| (v, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<(f64, DemandModel, Y0Rule, usize)> = settings
        .iter()
        .flat_map(|&(v, (m, rule))| cfg.t_list.iter().map(move |&t| (v, m, rule, t)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(parameter, model, rule, horizon)| {
            let y0 = rule.apply(horizon);
            let dp = dp_value(&model, horizon, y0)?;
            let resolving = evaluate_policy_exact(&model, &ResolvingPolicy::new(&model), horizon, y0)?;
            Ok(SweepRow {
                sweep: cfg.kind,
                parameter,
                horizon,
                y0,
                dp_value: dp,
                resolving_value: resolving,
                regret_vs_dp: dp - resolving,
                regret_vs_fluid: fluid_value(&model, horizon, y0) - resolving,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let boundary = DemandModel::benchmark_instance().unconstrained_optimum();
    let boundary_increasing = (cfg.kind == SweepKind::Gap && cfg.values.contains(&boundary)).then(|| {
        rows.iter()
            .filter(|r| r.parameter == boundary)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1].regret_vs_dp > w[0].regret_vs_dp)
    });
    Ok(SweepResult {
        rows,
        boundary_increasing,
    })
}
