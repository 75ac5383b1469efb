use crate::demand::{MultiDemandModel, MultiKind};

use super::PolicyError;

/// Cap on `T * prod(y0_k + 1)` for the two-product dynamic program.
pub const MULTI_STATE_LIMIT: usize = 10_000_000;

/// Maximizes `c.x + x'Qx/2` over `[0, hi_0] x [0, hi_1]` with `Q_kk < 0`.
///
/// Each edge restricted to one coordinate is a concave parabola, so its
/// maximum is a clipped stationary point. The global maximum is either on an
/// edge or, when `Q` is negative definite, at the interior stationary point.
fn maximize_quadratic_2d(q: [[f64; 2]; 2], c: [f64; 2], hi: [f64; 2]) -> ([f64; 2], f64) {
    let f = |x: [f64; 2]| c[0] * x[0] + c[1] * x[1] + 0.5 * (q[0][0] * x[0] * x[0] + 2.0 * q[0][1] * x[0] * x[1] + q[1][1] * x[1] * x[1]);
    let mut best = ([0.0, 0.0], f64::NEG_INFINITY);
    let mut offer = |x: [f64; 2]| {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    };
    for &x1 in &[0.0, hi[1]] {
        offer([(-(c[0] + q[0][1] * x1) / q[0][0]).clamp(0.0, hi[0]), x1]);
    }
    for &x0 in &[0.0, hi[0]] {
        offer([x0, (-(c[1] + q[0][1] * x0) / q[1][1]).clamp(0.0, hi[1])]);
    }
    let det = q[0][0] * q[1][1] - q[0][1] * q[0][1];
    if det > 0.0 {
        let x = [(-c[0] * q[1][1] + c[1] * q[0][1]) / det, (-c[1] * q[0][0] + c[0] * q[0][1]) / det];
        if x[0] > 0.0 && x[0] < hi[0] && x[1] > 0.0 && x[1] < hi[1] {
            offer(x);
        }
    }
    best
}

/// Optimal expected revenue for two products with independent Bernoulli sales.
pub fn solve_dp_multi(model: &MultiDemandModel, horizon: usize, y0: &[usize]) -> Result<f64, PolicyError> {
    if model.n() != 2 || y0.len() != 2 {
        return Err(PolicyError::Unsupported("the multi-product dynamic program handles two products".into()));
    }
    if model.kind() != MultiKind::QuadraticBernoulli {
        return Err(PolicyError::Unsupported("exact dynamic program needs integer (Bernoulli) sales".into()));
    }
    model.require_valid()?;
    let (w0, w1) = (y0[0] + 1, y0[1] + 1);
    if horizon.saturating_mul(w0).saturating_mul(w1) > MULTI_STATE_LIMIT {
        return Err(PolicyError::ResourceGuard(format!(
            "T * (y0_1 + 1) * (y0_2 + 1) exceeds {MULTI_STATE_LIMIT}"
        )));
    }
    let h = model.hessian();
    let g = model.gradient_at_zero();
    let box_hi = model.box_hi();
    let idx = |a: usize, b: usize| a * w1 + b;
    let mut prev = vec![0.0; w0 * w1];
    let mut cur = vec![0.0; w0 * w1];
    for _ in 0..horizon {
        for a in 0..w0 {
            for b in 0..w1 {
                let v = prev[idx(a, b)];
                cur[idx(a, b)] = match (a > 0, b > 0) {
                    (false, false) => 0.0,
                    (true, false) => {
                        // one product: r + x (V(y - e) - V(y))
                        let lin = g[0] + prev[idx(a - 1, b)] - v;
                        let x = (-lin / h[(0, 0)]).clamp(0.0, box_hi[0]);
                        v + lin * x + 0.5 * h[(0, 0)] * x * x
                    }
                    (false, true) => {
                        let lin = g[1] + prev[idx(a, b - 1)] - v;
                        let x = (-lin / h[(1, 1)]).clamp(0.0, box_hi[1]);
                        v + lin * x + 0.5 * h[(1, 1)] * x * x
                    }
                    (true, true) => {
                        let v0 = prev[idx(a - 1, b)];
                        let v1 = prev[idx(a, b - 1)];
                        let v01 = prev[idx(a - 1, b - 1)];
                        let cross = v - v0 - v1 + v01;
                        let q = [[h[(0, 0)], h[(0, 1)] + cross], [h[(1, 0)] + cross, h[(1, 1)]]];
                        let c = [g[0] + v0 - v, g[1] + v1 - v];
                        v + maximize_quadratic_2d(q, c, [box_hi[0], box_hi[1]]).1
                    }
                };
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[idx(y0[0], y0[1])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn quadratic_2d_against_grid() {
        let cases = [
            ([[-2.0, -0.5], [-0.5, -2.0]], [1.0, 1.0], [0.8, 0.8]),
            ([[-2.0, 1.5], [1.5, -1.0]], [0.3, -0.2], [1.0, 0.5]),
            ([[-1.0, 0.0], [0.0, -1.0]], [2.0, -1.0], [0.6, 0.6]),
            ([[-0.5, 0.9], [0.9, -0.4]], [0.1, 0.1], [1.0, 1.0]),
        ];
        for (q, c, hi) in cases {
            let (x, v) = maximize_quadratic_2d(q, c, hi);
            let f = |a: f64, b: f64| c[0] * a + c[1] * b + 0.5 * (q[0][0] * a * a + 2.0 * q[0][1] * a * b + q[1][1] * b * b);
            assert!((f(x[0], x[1]) - v).abs() < 1e-14);
            let n = 1000;
            let mut grid = f64::NEG_INFINITY;
            for i in 0..=n {
                for j in 0..=n {
                    grid = grid.max(f(hi[0] * i as f64 / n as f64, hi[1] * j as f64 / n as f64));
                }
            }
            assert!(v >= grid - 1e-12 && v <= grid + 1e-5, "{v} vs grid {grid}");
        }
    }

    /// Brute force over a coarse rate grid; the DP must be at least as good.
    fn brute_force(
        model: &MultiDemandModel,
        t: usize,
        y: [usize; 2],
        grid: &[f64],
        memo: &mut std::collections::HashMap<(usize, [usize; 2]), f64>,
    ) -> f64 {
        if t == 0 {
            return 0.0;
        }
        if let Some(&v) = memo.get(&(t, y)) {
            return v;
        }
        let h = model.hessian();
        let g = model.gradient_at_zero();
        let mut best = f64::NEG_INFINITY;
        let opts0: Vec<f64> = if y[0] > 0 { grid.iter().map(|v| v * model.box_hi()[0]).collect() } else { vec![0.0] };
        let opts1: Vec<f64> = if y[1] > 0 { grid.iter().map(|v| v * model.box_hi()[1]).collect() } else { vec![0.0] };
        for &a in &opts0 {
            for &b in &opts1 {
                let r = g[0] * a + g[1] * b + 0.5 * (h[(0, 0)] * a * a + 2.0 * h[(0, 1)] * a * b + h[(1, 1)] * b * b);
                let mut e = 0.0;
                for (s0, p0) in [(0, 1.0 - a), (1, a)] {
                    for (s1, p1) in [(0, 1.0 - b), (1, b)] {
                        if p0 * p1 > 0.0 {
                            e += p0 * p1 * brute_force(model, t - 1, [y[0] - s0, y[1] - s1], grid, memo);
                        }
                    }
                }
                best = best.max(r + e);
            }
        }
        memo.insert((t, y), best);
        best
    }

    #[test]
    fn dp_beats_grid_brute_force() {
        let m = MultiDemandModel::two_product_instance();
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        // a grid step of 0.2 leaves each rate within 0.1 of some grid point, which
        // costs at most |H| (0.1^2 + 0.1^2) / 2 = 0.025 revenue per period
        let per_period = 0.5 * 2.5 * 0.02;
        for (t, y) in [(1, [1, 1]), (2, [1, 1]), (3, [1, 2]), (3, [2, 0]), (10, [3, 3])] {
            let dp = solve_dp_multi(&m, t, &y).unwrap();
            let bf = brute_force(&m, t, y, &grid, &mut Default::default());
            assert!(dp >= bf - 1e-12, "T={t}, y={y:?}: {dp} < {bf}");
            assert!(dp <= bf + per_period * t as f64, "T={t}, y={y:?}: {dp} vs {bf}");
            assert!(dp <= t as f64 * 0.4 + 1e-12);
        }
        assert_eq!(solve_dp_multi(&m, 10, &[0, 0]).unwrap(), 0.0);
        // one period: unconstrained optimum of r
        assert!((solve_dp_multi(&m, 1, &[1, 1]).unwrap() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn separable_case_matches_single_product() {
        let m = MultiDemandModel::bernoulli(vec![1.5, 1.5], DMatrix::from_row_slice(2, 2, &[-4.0, 0.0, 0.0, -4.0]), vec![0.75, 0.75]).unwrap();
        // r_k(x) = 1.5x - 2x^2 = x(3/4 - x)/(1/2) on [0, 3/4]
        let single = crate::demand::DemandModel::linear_bernoulli(0.75, 0.5, 0.0, 1.5).unwrap();
        let (t, y) = (40, 12);
        let one = crate::policies::dp_value(&single, t, y).unwrap();
        let two = solve_dp_multi(&m, t, &[y, y]).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-9, "{two} vs {}", 2.0 * one);
    }

    #[test]
    fn guards() {
        let m = MultiDemandModel::two_product_instance();
        assert!(matches!(solve_dp_multi(&m, 100_000, &[100, 100]), Err(PolicyError::ResourceGuard(_))));
        assert!(solve_dp_multi(&m, 2, &[1]).is_err());
    }
}
