use serde::Serialize;

use crate::demand::DemandModel;

use super::{SimError, SimTrace};

/// Harmonic noise series and stopping time of a re-solving path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `xi_bar[t - 1]` is `sum_{tau = t+1}^{T} xi_tau / (tau - 1)` for `t = 1..=T`.
    pub xi_bar_series: Vec<f64>,
    pub gamma: f64,
    pub t_sharp: usize,
}

impl Diagnostics {
    /// `xi_bar_{-> t}` for `1 <= t <= T`.
    pub fn xi_bar(&self, t: usize) -> f64 {
        self.xi_bar_series[t - 1]
    }
}

/// `min(x_T - d_lo, x^u - x_T, -r'(x_T) / r''(x_T))`.
pub fn gamma(model: &DemandModel, x_t: f64) -> f64 {
    let d_lo = model.interval().d_lo;
    let x_u = model.unconstrained_optimum();
    (x_t - d_lo)
        .min(x_u - x_t)
        .min(-model.revenue_slope(x_t) / model.revenue_curvature())
}

/// `xi_bar_{-> t}` for `t = 1..=T` from noise in record order (element 0 is `tau = T`).
pub fn harmonic_series(xi: &[f64]) -> Vec<f64> {
    let horizon = xi.len();
    let mut out = vec![0.0; horizon];
    let mut acc = 0.0;
    for t in (1..horizon).rev() {
        // add xi_{t+1} / t
        acc += xi[horizon - t - 1] / t as f64;
        out[t - 1] = acc;
    }
    out
}

/// `max{tau in [2, T] : |xi_bar_{-> tau-1}| > gamma}`, or 2 when the set is empty.
pub fn stopping_time(xi_bar_series: &[f64], gamma: f64) -> usize {
    (2..=xi_bar_series.len())
        .rev()
        .find(|&tau| xi_bar_series[tau - 2].abs() > gamma)
        .unwrap_or(2)
}

pub fn diagnostics(trace: &SimTrace, model: &DemandModel, x_t: f64) -> Diagnostics {
    let xi_bar_series = harmonic_series(&trace.noise());
    let gamma = gamma(model, x_t);
    let t_sharp = stopping_time(&xi_bar_series, gamma);
    Diagnostics { xi_bar_series, gamma, t_sharp }
}

/// `max_{tau >= T# - 1} |y_tau / tau - (x_T - xi_bar_{-> tau})|` on a re-solving trace.
pub fn resolving_path_residual(trace: &SimTrace, diag: &Diagnostics, x_t: f64) -> f64 {
    let horizon = trace.horizon();
    let before = trace.inventory_before();
    let lowest = diag.t_sharp.saturating_sub(1).max(1);
    (lowest..=horizon)
        .map(|tau| (before[horizon - tau] / tau as f64 - (x_t - diag.xi_bar(tau))).abs())
        .fold(0.0, f64::max)
}

/// Residual of the telescoping identity
/// `sum_{tau=T#}^{T} [D_tau - Dbar_{->tau} + Xbar_{->tau} - X_tau] - (T# - 1)(Dbar_{->T#-1} - Xbar_{->T#-1})`
/// with `X = xi_r - xi_star`. Sequences run from `tau = T` down to `tau = T#`.
pub fn harmonic_identity_check(t_sharp: usize, delta: &[f64], xi_r: &[f64], xi_star: &[f64]) -> Result<f64, SimError> {
    let len = delta.len();
    if xi_r.len() != len || xi_star.len() != len {
        return Err(SimError::InvalidInput(format!(
            "sequence lengths differ: {}, {}, {}",
            len,
            xi_r.len(),
            xi_star.len()
        )));
    }
    if t_sharp < 2 || len == 0 {
        return Err(SimError::InvalidInput("need T# >= 2 and at least one period".into()));
    }
    let horizon = t_sharp + len - 1;
    // bar_{-> t} = sum_{tau = t+1}^{T} v_tau / (tau - 1), built from tau = T downwards
    let bars = |v: &[f64]| {
        let mut out = vec![0.0; len + 1];
        let mut acc = 0.0;
        for i in 0..len {
            let tau = horizon - i;
            out[i] = acc;
            acc += v[i] / (tau - 1) as f64;
        }
        out[len] = acc;
        out
    };
    let delta_bar = bars(delta);
    let xi_delta: Vec<f64> = xi_r.iter().zip(xi_star).map(|(a, b)| a - b).collect();
    let xi_bar = bars(&xi_delta);
    let body: f64 = (0..len).map(|i| delta[i] - delta_bar[i] + xi_bar[i] - xi_delta[i]).sum();
    Ok(body - (t_sharp - 1) as f64 * (delta_bar[len] - xi_bar[len]))
}
