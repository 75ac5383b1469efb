use nalgebra::{DMatrix, DVector};

use crate::demand::{DemandError, MultiDemandModel};

use super::{maximize_box_qp, Bound, FluidError};

/// Value of pinning the products in `I` at `z` and re-optimizing the others.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialOptimum {
    pub constrained: Vec<usize>,
    pub z: Vec<f64>,
    /// `R(z)`.
    pub value: f64,
    /// `∇R(z) = ∇_I r(x*(z))`.
    pub grad: DVector<f64>,
    /// Schur complement `H_II - H_IU H_UU^-1 H_UI`, taken over the products of
    /// `U` that are strictly inside the box at `x*(z)`.
    pub hess: DMatrix<f64>,
    /// The maximizer `x*(z)` in full coordinates.
    pub full_solution: DVector<f64>,
}

pub fn partial_optimum(model: &MultiDemandModel, constrained: &[usize], z: &[f64]) -> Result<PartialOptimum, FluidError> {
    let n = model.n();
    let mut pinned = constrained.to_vec();
    pinned.sort_unstable();
    pinned.dedup();
    if pinned.len() != constrained.len() || pinned.iter().any(|&k| k >= n) {
        return Err(FluidError::Infeasible(format!("invalid product index set {constrained:?}")));
    }
    if z.len() != pinned.len() {
        return Err(FluidError::Infeasible(format!("{} pinned products but {} values", pinned.len(), z.len())));
    }
    let box_hi = model.box_hi();
    for (i, &k) in pinned.iter().enumerate() {
        if !(z[i] >= 0.0 && z[i] <= box_hi[k]) {
            return Err(DemandError::OutOfDomain { what: "pinned demand rate", value: z[i], lo: 0.0, hi: box_hi[k] }.into());
        }
    }
    let free: Vec<usize> = (0..n).filter(|k| !pinned.contains(k)).collect();
    let h = model.hessian();
    let g = model.gradient_at_zero();

    let mut x = DVector::zeros(n);
    for (i, &k) in pinned.iter().enumerate() {
        x[k] = z[i];
    }
    let mut interior_free = Vec::new();
    if !free.is_empty() {
        let nu = free.len();
        let h_uu = DMatrix::from_fn(nu, nu, |i, j| h[(free[i], free[j])]);
        let lin = DVector::from_fn(nu, |i, _| g[free[i]] + pinned.iter().enumerate().map(|(j, &k)| h[(free[i], k)] * z[j]).sum::<f64>());
        let lo = DVector::zeros(nu);
        let hi = DVector::from_fn(nu, |i, _| box_hi[free[i]]);
        let sol = maximize_box_qp(&h_uu, &lin, &lo, &hi)?;
        for (i, &k) in free.iter().enumerate() {
            x[k] = sol.x[i];
            if sol.state[i] == Bound::Free {
                interior_free.push(k);
            }
        }
    }

    let full_grad = model.revenue_gradient(&x);
    let grad = DVector::from_fn(pinned.len(), |i, _| full_grad[pinned[i]]);
    let ni = pinned.len();
    let h_ii = DMatrix::from_fn(ni, ni, |i, j| h[(pinned[i], pinned[j])]);
    let hess = if interior_free.is_empty() || ni == 0 {
        h_ii
    } else {
        let nf = interior_free.len();
        let h_ff = DMatrix::from_fn(nf, nf, |i, j| h[(interior_free[i], interior_free[j])]);
        let h_fi = DMatrix::from_fn(nf, ni, |i, j| h[(interior_free[i], pinned[j])]);
        let solved = h_ff.lu().solve(&h_fi).ok_or(FluidError::NotConcave)?;
        h_ii - h_fi.transpose() * solved
    };

    Ok(PartialOptimum {
        constrained: pinned,
        z: z.to_vec(),
        value: model.revenue(&x),
        grad,
        hess,
        full_solution: x,
    })
}
