//! Primal active-set method for `max g'x + x'Hx/2` subject to `lo <= x <= hi`
//! with `H` negative definite.

use nalgebra::{DMatrix, DVector};

use super::FluidError;

const DUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Bound {
    Free,
    Lower,
    Upper,
    /// `lo == hi`; never released.
    Fixed,
}

#[derive(Debug, Clone)]
pub(crate) struct BoxQpSolution {
    pub x: DVector<f64>,
    pub state: Vec<Bound>,
    /// `g + Hx` at the solution.
    pub grad: DVector<f64>,
}

pub(crate) fn maximize_box_qp(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
) -> Result<BoxQpSolution, FluidError> {
    let n = g.len();
    if let Some(k) = (0..n).find(|&k| !(lo[k] <= hi[k])) {
        return Err(FluidError::Infeasible(format!("bounds cross at index {k}: [{}, {}]", lo[k], hi[k])));
    }
    let max_changes = (1usize << n.min(30)) + 10;

    // Unconstrained Newton point, clipped into the box.
    let newton = (-h)
        .clone()
        .cholesky()
        .ok_or(FluidError::NotConcave)?
        .solve(g);
    let mut x = DVector::zeros(n);
    let mut state = vec![Bound::Free; n];
    for k in 0..n {
        (x[k], state[k]) = if lo[k] == hi[k] {
            (lo[k], Bound::Fixed)
        } else if newton[k] <= lo[k] {
            (lo[k], Bound::Lower)
        } else if newton[k] >= hi[k] {
            (hi[k], Bound::Upper)
        } else {
            (newton[k], Bound::Free)
        };
    }

    let mut changes = 0usize;
    loop {
        let free: Vec<usize> = (0..n).filter(|&k| state[k] == Bound::Free).collect();
        if !free.is_empty() {
            let target = solve_free(h, g, &x, &free)?;
            let mut step = 1.0;
            let mut blocking = None;
            for (i, &k) in free.iter().enumerate() {
                let d = target[i] - x[k];
                if d < 0.0 && x[k] + d < lo[k] {
                    let a = (lo[k] - x[k]) / d;
                    if a < step {
                        step = a;
                        blocking = Some((k, Bound::Lower));
                    }
                } else if d > 0.0 && x[k] + d > hi[k] {
                    let a = (hi[k] - x[k]) / d;
                    if a < step {
                        step = a;
                        blocking = Some((k, Bound::Upper));
                    }
                }
            }
            for (i, &k) in free.iter().enumerate() {
                x[k] = (x[k] + step * (target[i] - x[k])).clamp(lo[k], hi[k]);
            }
            if let Some((k, b)) = blocking {
                x[k] = if b == Bound::Lower { lo[k] } else { hi[k] };
                state[k] = b;
                changes += 1;
                if changes > max_changes {
                    return Err(FluidError::NoConvergence { changes });
                }
                continue;
            }
        }

        let grad = g + h * &x;
        // Most negative multiplier among released-able bounds.
        let worst = (0..n)
            .filter_map(|k| match state[k] {
                Bound::Lower => Some((k, -grad[k])),
                Bound::Upper => Some((k, grad[k])),
                _ => None,
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            Some((k, mult)) if mult < -DUAL_TOL * (1.0 + grad.amax()) => {
                state[k] = Bound::Free;
                changes += 1;
                if changes > max_changes {
                    return Err(FluidError::NoConvergence { changes });
                }
            }
            _ => return Ok(BoxQpSolution { x, state, grad }),
        }
    }
}

/// Maximizer over the free coordinates with the others held at their current values.
fn solve_free(h: &DMatrix<f64>, g: &DVector<f64>, x: &DVector<f64>, free: &[usize]) -> Result<DVector<f64>, FluidError> {
    let nf = free.len();
    let n = g.len();
    let neg_hff = DMatrix::from_fn(nf, nf, |i, j| -h[(free[i], free[j])]);
    let rhs = DVector::from_fn(nf, |i, _| {
        let k = free[i];
        let mut s = g[k];
        for j in 0..n {
            if !free.contains(&j) {
                s += h[(k, j)] * x[j];
            }
        }
        s
    });
    Ok(neg_hff.cholesky().ok_or(FluidError::NotConcave)?.solve(&rhs))
}
