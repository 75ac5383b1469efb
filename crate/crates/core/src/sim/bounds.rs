use serde::Serialize;

use crate::demand::{DemandError, DemandModel};

use super::diagnostics::gamma;

/// Terms of the explicit regret constant for the re-solving heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantBound {
    /// `M^2 B^4 / (2m)`.
    pub third_derivative: f64,
    /// `2 (|r''(x_T)| L B)^2 / m`.
    pub wasserstein: f64,
    /// `3 |r''(x_T)| B^2`.
    pub curvature: f64,
    /// `r(x^u) (1 + 4 B^4 / gamma^4)`.
    pub stopping: f64,
    pub total: f64,
}

/// `2 + 4 B^4 / gamma^4`, the bound on `E[T#]`.
pub fn stopping_time_bound(model: &DemandModel, x_t: f64) -> f64 {
    let b = model.noise_bound();
    2.0 + 4.0 * b.powi(4) / gamma(model, x_t).powi(4)
}

pub fn constant_bound(model: &DemandModel, x_t: f64) -> Result<ConstantBound, DemandError> {
    let d_lo = model.interval().d_lo;
    let x_u = model.unconstrained_optimum();
    if !(x_t > d_lo && x_t < x_u) {
        return Err(DemandError::OutOfDomain { what: "x_T (open interval)", value: x_t, lo: d_lo, hi: x_u });
    }
    let c = model.assumption_constants();
    let b = c.noise_bound;
    let curv = model.revenue_curvature().abs();
    let third_derivative = c.big_m * c.big_m * b.powi(4) / (2.0 * c.m);
    let wasserstein = 2.0 * (curv * c.wasserstein_lipschitz * b).powi(2) / c.m;
    let curvature = 3.0 * curv * b * b;
    let stopping = model.max_revenue_rate() * (stopping_time_bound(model, x_t) - 1.0);
    Ok(ConstantBound {
        third_derivative,
        wasserstein,
        curvature,
        stopping,
        total: third_derivative + wasserstein + curvature + stopping,
    })
}

/// Cap on the regret of the fixed price `f^-1(x^u)` when `x_T > x^u`:
/// `f^-1(x^u) B^2 / (4 (x_T - x^u))`, from `E[(S - a)^+] <= Var(S) / (4a)`
/// for total sales `S` with mean `T x^u`, `a = T (x_T - x^u)`.
pub fn sufficient_inventory_bound(model: &DemandModel, x_t: f64) -> Result<f64, DemandError> {
    let x_u = model.unconstrained_optimum();
    if !(x_t > x_u) {
        return Err(DemandError::OutOfDomain { what: "x_T (above x^u)", value: x_t, lo: x_u, hi: f64::INFINITY });
    }
    let b = model.noise_bound();
    Ok(model.price_for_rate(x_u) * b * b / (4.0 * (x_t - x_u)))
}
