use crate::demand::DemandModel;

use super::{FluidError, FluidSolution, FluidWarning, ACTIVE_TOL};

/// Allocation-free single-product fluid solution; the hot path of the exact evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleFluid {
    /// `min(max(x, d_lo), x^u)`.
    pub rate: f64,
    /// `r'(rate)` when the inventory constraint binds, else 0.
    pub lambda: f64,
    pub active: bool,
    pub clamped: bool,
    pub boundary: bool,
}

#[inline]
pub fn fluid_rate(model: &DemandModel, x: f64) -> SingleFluid {
    let d_lo = model.interval().d_lo;
    let x_u = model.unconstrained_optimum();
    let active = x <= x_u;
    let clamped = x < d_lo;
    let rate = x.max(d_lo).min(x_u);
    SingleFluid {
        rate,
        lambda: if active { model.revenue_slope(rate) } else { 0.0 },
        active,
        clamped,
        boundary: (x - x_u).abs() <= ACTIVE_TOL,
    }
}

pub fn solve_fluid_single(model: &DemandModel, x: f64) -> Result<FluidSolution, FluidError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(FluidError::Infeasible(format!("inventory rate {x} must be finite and nonnegative")));
    }
    let s = fluid_rate(model, x);
    let mut warnings = Vec::new();
    if s.clamped {
        warnings.push(FluidWarning::ClampedToDomain { requested: x });
    }
    if s.boundary {
        warnings.push(FluidWarning::Boundary);
    }
    Ok(FluidSolution {
        x_c: vec![s.rate],
        lambda: vec![s.lambda],
        active_set: if s.active { vec![0] } else { vec![] },
        objective: model.revenue_formula(s.rate),
        lower_dual: vec![0.0],
        box_dual: vec![0.0],
        warnings,
    })
}
