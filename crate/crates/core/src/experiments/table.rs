use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::demand::DemandModel;
use crate::policies::{solve_dp, DpPolicy, HoPolicy, PolicyKind, PricingPolicy, ResolvingPolicy, StaticPolicy};
use crate::sim::{estimate_regret, hindsight_info, RegretOptions, RegretReport, Z95};

use super::{ExperimentConfig, ExperimentError};

/// Largest horizon [`run_table2`] accepts without the sliced-DP opt-in.
pub const TABLE2_DENSE_LIMIT: usize = 1 << 15;

/// One CSV row of a regret experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretRow {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub policy: String,
    pub value: f64,
    pub ci_half_width: f64,
    /// Empty when the exact DP is unavailable.
    pub regret_vs_dp: Option<f64>,
    pub regret_vs_fluid: f64,
}

pub fn regret_rows(reports: &[RegretReport]) -> Vec<RegretRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.entries.iter().map(move |e| RegretRow {
                horizon: r.horizon,
                policy: e.policy.clone(),
                value: e.value,
                ci_half_width: e.ci_half_width,
                regret_vs_dp: e.regret_vs_dp,
                regret_vs_fluid: e.regret_vs_fluid,
            })
        })
        .collect()
}

/// Regret of every configured policy at every horizon, one horizon per task.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RegretReport>, ExperimentError> {
    cfg.validate()?;
    let opts = RegretOptions {
        replications: cfg.replications,
        base_seed: cfg.base_seed,
        z: Z95,
    };
    let rule = cfg.y0_rule;
    let reports = cfg
        .t_list
        .par_iter()
        .map(|&t| estimate_regret(&cfg.model, &[t], |h| rule.apply(h), &cfg.policies, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(reports.into_iter().flatten().collect())
}

/// The fluid / static / re-solving regret table, evaluated exactly.
///
/// Horizons above [`TABLE2_DENSE_LIMIT`] are refused unless `sliced_dp` is set.
pub fn run_table2(cfg: &ExperimentConfig, sliced_dp: bool) -> Result<Vec<RegretReport>, ExperimentError> {
    cfg.validate()?;
    if !cfg.model.is_bernoulli() {
        return Err(ExperimentError::Config("table2 is evaluated exactly and needs a Bernoulli model".into()));
    }
    if cfg.policies.contains(&PolicyKind::Ho) {
        return Err(ExperimentError::Config("the hindsight benchmark needs additive noise".into()));
    }
    if let Some(&t) = cfg.t_list.iter().find(|&&t| t > TABLE2_DENSE_LIMIT) {
        if !sliced_dp {
            return Err(ExperimentError::ResourceGuard(format!(
                "T = {t} exceeds {TABLE2_DENSE_LIMIT}; pass --sliced-dp to evaluate it"
            )));
        }
    }
    run_experiment(cfg)
}

fn column_label(t: usize) -> String {
    if t.is_power_of_two() {
        t.trailing_zeros().to_string()
    } else {
        format!("T={t}")
    }
}

/// Regret vs DP rounded to two decimals, one row per policy and one column
/// per horizon (labelled by `log2 T`).
pub fn format_table2(reports: &[RegretReport]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let names: Vec<&str> = first.entries.iter().map(|e| e.policy.as_str()).collect();
    let width = 9;
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "log2 T");
    for r in reports {
        let _ = write!(out, "{:>width$}", column_label(r.horizon));
    }
    out.push('\n');
    for name in names {
        let _ = write!(out, "{name:<10}");
        for r in reports {
            let cell = r
                .entry(name)
                .and_then(|e| e.regret_vs_dp)
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into());
            let _ = write!(out, "{cell:>width$}");
        }
        out.push('\n');
    }
    out
}

/// A single policy instance for one path.
///
/// `dp` solves the dense table for `(horizon, y0)`. `ho` reads the hindsight
/// mean from the noise the path seeded with `seed` will draw.
pub fn build_policy(
    model: &DemandModel,
    kind: PolicyKind,
    horizon: usize,
    y0: usize,
    seed: u64,
) -> Result<Box<dyn PricingPolicy>, ExperimentError> {
    if horizon == 0 {
        return Err(ExperimentError::Config("horizon must be at least 1".into()));
    }
    let x_t = y0 as f64 / horizon as f64;
    Ok(match kind {
        PolicyKind::Static => Box::new(StaticPolicy::new(model, x_t)),
        PolicyKind::Resolving => Box::new(ResolvingPolicy::new(model)),
        PolicyKind::Dp => Box::new(DpPolicy::new(Arc::new(solve_dp(model, horizon, y0)?))),
        PolicyKind::Ho => Box::new(HoPolicy::new(model, x_t, hindsight_info(model, horizon, seed))?),
    })
}
