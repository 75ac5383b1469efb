use nalgebra::DVector;
use serde::Serialize;

use crate::demand::MultiDemandModel;

use super::{maximize_box_qp, Bound, FluidError, FluidSolution, FluidWarning, ACTIVE_TOL};

/// Maximizes `r` over `D ∩ {0 <= x' <= x}`.
///
/// The upper bound of each product is `min(x_k, box_hi_k)`; when the inventory
/// is the tighter of the two its multiplier is reported in `lambda`, otherwise
/// in `box_dual`.
pub fn solve_fluid_multi(model: &MultiDemandModel, x: &[f64]) -> Result<FluidSolution, FluidError> {
    let n = model.n();
    if x.len() != n {
        return Err(FluidError::Infeasible(format!("expected {n} inventory rates, got {}", x.len())));
    }
    if let Some(k) = (0..n).find(|&k| !(x[k] >= 0.0) || !x[k].is_finite()) {
        return Err(FluidError::Infeasible(format!("inventory rate x[{k}] = {} must be finite and nonnegative", x[k])));
    }
    let box_hi = model.box_hi();
    let lo = DVector::zeros(n);
    let hi = DVector::from_fn(n, |k, _| x[k].min(box_hi[k]));
    let sol = maximize_box_qp(model.hessian(), model.gradient_at_zero(), &lo, &hi)?;

    let mut lambda = vec![0.0; n];
    let mut box_dual = vec![0.0; n];
    let mut lower_dual = vec![0.0; n];
    for k in 0..n {
        let grad = sol.grad[k];
        let inventory_binds = x[k] <= box_hi[k];
        match sol.state[k] {
            Bound::Free => {}
            Bound::Lower => lower_dual[k] = -grad,
            Bound::Upper if inventory_binds => lambda[k] = grad,
            Bound::Upper => box_dual[k] = grad,
            // lo == hi == 0: split the multiplier by sign.
            Bound::Fixed => {
                if grad >= 0.0 {
                    lambda[k] = grad;
                } else {
                    lower_dual[k] = -grad;
                }
            }
        }
    }
    let x_c: Vec<f64> = sol.x.iter().copied().collect();
    let active_set: Vec<usize> = (0..n).filter(|&k| (x_c[k] - x[k]).abs() <= ACTIVE_TOL).collect();
    let warnings = active_set
        .iter()
        .filter(|&&k| lambda[k] <= ACTIVE_TOL)
        .map(|&k| FluidWarning::Degenerate { product: k, multiplier: lambda[k] })
        .collect();
    Ok(FluidSolution {
        objective: model.revenue(&sol.x),
        x_c,
        lambda,
        active_set,
        lower_dual,
        box_dual,
        warnings,
    })
}

/// Inventory-constrained products `I` and their complement `U`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub constrained: Vec<usize>,
    pub unconstrained: Vec<usize>,
    /// Members of `I` whose multiplier is within tolerance of zero.
    pub degenerate: Vec<usize>,
}

pub fn active_partition(model: &MultiDemandModel, x: &[f64]) -> Result<Partition, FluidError> {
    let sol = solve_fluid_multi(model, x)?;
    let unconstrained = (0..model.n()).filter(|k| !sol.active_set.contains(k)).collect();
    let degenerate = sol
        .warnings
        .iter()
        .filter_map(|w| match w {
            FluidWarning::Degenerate { product, .. } => Some(*product),
            _ => None,
        })
        .collect();
    Ok(Partition {
        constrained: sol.active_set,
        unconstrained,
        degenerate,
    })
}

/// Infinity-norm residuals of the KKT system at a fluid solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.dual).max(self.complementarity)
    }
}

pub fn kkt_residuals(model: &MultiDemandModel, x: &[f64], sol: &FluidSolution) -> KktResiduals {
    let n = model.n();
    let xc = DVector::from_column_slice(&sol.x_c);
    let grad = model.revenue_gradient(&xc);
    let box_hi = model.box_hi();
    let mut r = KktResiduals { stationarity: 0.0, primal: 0.0, dual: 0.0, complementarity: 0.0 };
    for k in 0..n {
        let upper = x[k].min(box_hi[k]);
        r.stationarity = r.stationarity.max((grad[k] - sol.lambda[k] - sol.box_dual[k] + sol.lower_dual[k]).abs());
        r.primal = r.primal.max((-xc[k]).max(xc[k] - upper).max(0.0));
        r.dual = r.dual.max((-sol.lambda[k]).max(-sol.box_dual[k]).max(-sol.lower_dual[k]).max(0.0));
        r.complementarity = r
            .complementarity
            .max((sol.lambda[k] * (x[k] - xc[k])).abs())
            .max((sol.box_dual[k] * (box_hi[k] - xc[k])).abs())
            .max((sol.lower_dual[k] * xc[k]).abs());
    }
    r
}
