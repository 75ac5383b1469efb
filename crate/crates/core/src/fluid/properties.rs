use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use crate::demand::MultiDemandModel;
use crate::fluid::{active_partition, kkt_residuals, partial_optimum, solve_fluid_multi};

/// `H = -(A'A + eps I)`, so every eigenvalue is at most `-eps`.
fn instance(n: usize, a: &[f64], eps: f64, g: &[f64], box_hi: &[f64]) -> MultiDemandModel {
    let a = DMatrix::from_row_slice(n, n, &a[..n * n]);
    let h = -(a.transpose() * &a + DMatrix::identity(n, n) * eps);
    let h = (&h + h.transpose()) * 0.5;
    MultiDemandModel::bernoulli(g[..n].to_vec(), h, box_hi[..n].to_vec()).unwrap()
}

fn arb_instance(max_n: usize, a_range: f64, eps: std::ops::Range<f64>) -> impl Strategy<Value = (MultiDemandModel, Vec<f64>)> {
    (1..=max_n)
        .prop_flat_map(move |n| {
            (
                Just(n),
                proptest::collection::vec(-a_range..a_range, n * n),
                eps.clone(),
                proptest::collection::vec(-1.0f64..2.0, n),
                proptest::collection::vec(0.2f64..1.5, n),
                proptest::collection::vec(0.0f64..2.0, n),
            )
        })
        .prop_map(|(n, a, eps, g, hi, x)| (instance(n, &a, eps, &g, &hi), x))
}

fn interior_pattern(m: &MultiDemandModel, x: &DVector<f64>) -> Vec<bool> {
    (0..m.n()).map(|k| x[k] > 1e-9 && x[k] < m.box_hi()[k] - 1e-9).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kkt_residuals_vanish((m, x) in arb_instance(5, 1.0, 0.05..1.0)) {
        let sol = solve_fluid_multi(&m, &x).unwrap();
        let r = kkt_residuals(&m, &x, &sol);
        prop_assert!(r.max() <= 1e-8, "{r:?}");
        for &k in &sol.active_set {
            prop_assert!((sol.x_c[k] - x[k]).abs() <= 1e-10);
        }
        for k in (0..m.n()).filter(|k| !sol.active_set.contains(k)) {
            prop_assert_eq!(sol.lambda[k], 0.0);
        }
    }

    #[test]
    fn monotone_in_right_hand_side(
        (m, x) in arb_instance(5, 1.0, 0.05..1.0),
        bump in proptest::collection::vec(0.0f64..0.5, 5),
    ) {
        let lo = solve_fluid_multi(&m, &x).unwrap().objective;
        let raised: Vec<f64> = x.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let hi = solve_fluid_multi(&m, &raised).unwrap().objective;
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn raising_unconstrained_keeps_partition(
        (m, x) in arb_instance(5, 1.0, 0.05..1.0),
        bump in proptest::collection::vec(0.0f64..1.0, 5),
    ) {
        let p = active_partition(&m, &x).unwrap();
        prop_assume!(p.degenerate.is_empty());
        let raised: Vec<f64> = (0..m.n()).map(|k| if p.unconstrained.contains(&k) { x[k] + bump[k] } else { x[k] }).collect();
        let q = active_partition(&m, &raised).unwrap();
        prop_assert_eq!(p.constrained, q.constrained);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn two_products_match_grid_oracle(
        a in proptest::collection::vec(-0.5f64..0.5, 4),
        eps in 1.0f64..2.0,
        g in proptest::collection::vec(-1.0f64..2.0, 2),
        hi in proptest::collection::vec(0.2f64..1.5, 2),
        x in proptest::collection::vec(0.0f64..2.0, 2),
    ) {
        let m = instance(2, &a, eps, &g, &hi);
        let sol = solve_fluid_multi(&m, &x).unwrap();
        let ub = [x[0].min(hi[0]), x[1].min(hi[1])];
        let axis = |u: f64| {
            let mut v: Vec<f64> = (0..).map(|i| i as f64 * 1e-3).take_while(|&t| t < u).collect();
            v.push(u);
            v
        };
        let (ax, ay) = (axis(ub[0]), axis(ub[1]));
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for &p in &ax {
            for &q in &ay {
                let v = m.revenue(&DVector::from_vec(vec![p, q]));
                if v > best.0 {
                    best = (v, p, q);
                }
            }
        }
        prop_assert!((sol.x_c[0] - best.1).abs() <= 2e-3, "{:?} vs {:?}", sol.x_c, best);
        prop_assert!((sol.x_c[1] - best.2).abs() <= 2e-3, "{:?} vs {:?}", sol.x_c, best);
        prop_assert!(sol.objective >= best.0 - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn envelope_gradient_and_schur_hessian(
        (m, _x) in arb_instance(5, 1.0, 0.2..1.0),
        mask in 1u32..32,
        frac in proptest::collection::vec(0.05f64..0.95, 5),
    ) {
        let n = m.n();
        let pinned: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        prop_assume!(!pinned.is_empty());
        let z: Vec<f64> = pinned.iter().map(|&k| frac[k] * m.box_hi()[k]).collect();
        let p = partial_optimum(&m, &pinned, &z).unwrap();
        let h = 1e-5;
        let value_at = |zz: &[f64]| partial_optimum(&m, &pinned, zz).unwrap();
        let pattern = interior_pattern(&m, &p.full_solution);
        for i in 0..pinned.len() {
            let mut up = z.clone();
            let mut dn = z.clone();
            up[i] += h;
            dn[i] -= h;
            let (pu, pd) = (value_at(&up), value_at(&dn));
            let fd = (pu.value - pd.value) / (2.0 * h);
            prop_assert!((fd - p.grad[i]).abs() <= 1e-5 * p.grad[i].abs().max(1.0), "grad {i}: {fd} vs {}", p.grad[i]);
            // the Hessian is piecewise constant; compare only where the free pattern is stable
            if interior_pattern(&m, &pu.full_solution) == pattern && interior_pattern(&m, &pd.full_solution) == pattern {
                for j in 0..pinned.len() {
                    let fd2 = (pu.grad[j] - pd.grad[j]) / (2.0 * h);
                    prop_assert!((fd2 - p.hess[(j, i)]).abs() <= 1e-4 * p.hess[(j, i)].abs().max(1.0));
                }
            }
        }
        let m_prime = m.validate().m_prime;
        let eig = SymmetricEigen::new(p.hess.clone());
        for &e in eig.eigenvalues.iter() {
            prop_assert!(e <= -m_prime * (1.0 - 1e-6), "eigenvalue {e} above -{m_prime}");
        }
    }

    #[test]
    fn pinned_map_is_lipschitz(
        (m, _x) in arb_instance(5, 1.0, 0.2..1.0),
        mask in 1u32..32,
        f1 in proptest::collection::vec(0.0f64..1.0, 5),
        f2 in proptest::collection::vec(0.0f64..1.0, 5),
    ) {
        let n = m.n();
        let pinned: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        prop_assume!(!pinned.is_empty());
        let free: Vec<usize> = (0..n).filter(|k| !pinned.contains(k)).collect();
        let z1: Vec<f64> = pinned.iter().map(|&k| f1[k] * m.box_hi()[k]).collect();
        let z2: Vec<f64> = pinned.iter().map(|&k| f2[k] * m.box_hi()[k]).collect();
        let x1 = partial_optimum(&m, &pinned, &z1).unwrap().full_solution;
        let x2 = partial_optimum(&m, &pinned, &z2).unwrap().full_solution;
        // L_z = 1 + |H_UI| / lambda_min(-H_UU) for the strongly concave box QP in U
        let hm = m.hessian();
        let lz = if free.is_empty() {
            1.0
        } else {
            let h_uu = DMatrix::from_fn(free.len(), free.len(), |i, j| -hm[(free[i], free[j])]);
            let h_ui = DMatrix::from_fn(free.len(), pinned.len(), |i, j| hm[(free[i], pinned[j])]);
            let mu = SymmetricEigen::new(h_uu).eigenvalues.min();
            1.0 + h_ui.norm() / mu
        };
        let dz = DVector::from_vec(z1.iter().zip(&z2).map(|(a, b)| a - b).collect()).norm();
        prop_assert!((x1 - x2).norm() <= lz * dz + 1e-12);
    }
}
