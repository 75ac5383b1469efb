//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p rmpricing-core --test acceptance`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmpricing::demand::{DemandModel, MultiDemandModel};
use rmpricing::experiments::{run_ho_compare, run_sweep, run_table2, ExperimentConfig, HoCompareConfig, SweepConfig};
use rmpricing::fluid::{kkt_residuals, partial_optimum, solve_fluid_multi};
use rmpricing::policies::{
    dp_value, evaluate_policy_exact, solve_dp, DpPolicy, ResolvingPolicy, StaticPolicy,
};
use rmpricing::sim::{
    diagnostics, estimate_multi_regret, harmonic_identity_check, linear_fit, monte_carlo, simulate,
    simulate_revenue, stopping_time_bound, sufficient_inventory_bound, RegretReport, Z95, Z99,
};
use std::sync::Arc;

// Reference regret table, log2 T = 6..15.
const FLUID: [f64; 10] = [-0.90, -1.13, -1.37, -1.63, -1.91, -2.19, -2.48, -2.78, -3.08, -3.37];
const STATIC: [f64; 10] = [0.38, 0.70, 1.22, 2.03, 3.27, 5.13, 7.84, 11.81, 17.55, 25.84];
const RESOLVING: [f64; 10] = [0.11, 0.15, 0.18, 0.21, 0.23, 0.23, 0.24, 0.24, 0.24, 0.25];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn regret(r: &RegretReport, policy: &str) -> f64 {
    r.entry(policy).and_then(|e| e.regret_vs_dp).expect("exact regret")
}

/// Largest deviation from the reference row and whether it is within `tol`.
fn compare(reports: &[RegretReport], offset: usize, policy: &str, reference: &[f64], tol: f64, log: &mut String) -> bool {
    let mut ok = true;
    for (i, r) in reports.iter().enumerate() {
        let got = regret(r, policy);
        let want = reference[offset + i];
        let hit = (got - want).abs() <= tol;
        ok &= hit;
        if !hit {
            log.push_str(&format!(" {policy}@2^{}: {got:.4} vs {want:.2};", r.horizon.trailing_zeros()));
        }
    }
    ok
}

fn table(log2: std::ops::RangeInclusive<u32>) -> Vec<RegretReport> {
    let mut cfg = ExperimentConfig::table2();
    cfg.t_list = log2.map(|k| 1usize << k).collect();
    run_table2(&cfg, true).expect("regret table")
}

fn criterion_1(reports: &[RegretReport]) -> Outcome {
    let rows = &reports[..5];
    let mut log = String::new();
    let ok = compare(rows, 0, "fluid", &FLUID, 0.01, &mut log)
        & compare(rows, 0, "static", &STATIC, 0.01, &mut log)
        & compare(rows, 0, "resolving", &RESOLVING, 0.01, &mut log);
    outcome(ok, format!("T = 2^6..2^10, fluid/static/resolving within 0.01;{log}"))
}

fn criterion_2(reports: &[RegretReport]) -> Outcome {
    let rows = &reports[5..];
    let mut log = String::new();
    let res = compare(rows, 5, "resolving", &RESOLVING, 0.01, &mut log);
    let stat = compare(rows, 5, "static", &STATIC, 0.02, &mut log);
    outcome(
        res && stat,
        format!("T = 2^11..2^15, resolving within 0.01 ({res}), static within 0.02 ({stat});{log}"),
    )
}

fn criterion_3(reports: &[RegretReport]) -> Outcome {
    let x: Vec<f64> = reports.iter().map(|r| (r.horizon as f64).log2()).collect();
    let y: Vec<f64> = reports.iter().map(|r| -regret(r, "fluid")).collect();
    let fit = linear_fit(&x, &y);
    outcome(
        (0.22..=0.33).contains(&fit.slope) && fit.r_squared >= 0.99,
        format!("fluid gap vs log2 T: slope {:.4}, R^2 {:.5}", fit.slope, fit.r_squared),
    )
}

fn criterion_4(reports: &[RegretReport]) -> Outcome {
    let tail = &reports[4..];
    let base = regret(&tail[0], "resolving");
    let top = tail.iter().map(|r| regret(r, "resolving")).fold(f64::NEG_INFINITY, f64::max);
    outcome(
        top - base <= 0.03,
        format!("resolving regret 2^10..2^15: {base:.4} -> max {top:.4}, rise {:.4}", top - base),
    )
}

fn criterion_5() -> Outcome {
    let cfg = SweepConfig {
        values: vec![0.375],
        t_list: (4..=16).map(|k| 1usize << k).collect(),
        ..SweepConfig::gap()
    };
    let res = run_sweep(&cfg).expect("sweep");
    let curve: Vec<f64> = res.rows.iter().map(|r| r.regret_vs_dp).collect();
    let strictly = curve.windows(2).all(|w| w[1] > w[0]);
    outcome(
        strictly && res.boundary_increasing == Some(true),
        format!(
            "x_T = 0.375, T = 2^4..2^16: regret {:.4} -> {:.4}, strictly increasing = {strictly}",
            curve[0],
            curve[curve.len() - 1]
        ),
    )
}

fn criterion_6() -> Outcome {
    let m = DemandModel::benchmark_instance();
    let cap = sufficient_inventory_bound(&m, 0.5).expect("x_T above x^u");
    let horizons: Vec<usize> = (6..=15).map(|k| 1usize << k).collect();
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut prev: Option<(f64, f64)> = None;
    for &t in &horizons {
        let y0 = t / 2;
        let v = dp_value(&m, t, y0).unwrap();
        let s = v - evaluate_policy_exact(&m, &StaticPolicy::new(&m, 0.5), t, y0).unwrap();
        let r = v - evaluate_policy_exact(&m, &ResolvingPolicy::new(&m), t, y0).unwrap();
        worst = worst.max(s).max(r);
        ok &= s <= cap && r <= cap;
        if t > 1 << 8 {
            if let Some((ps, pr)) = prev {
                ok &= s <= ps + 0.02 && r <= pr + 0.02;
            }
        }
        prev = Some((s, r));
    }
    outcome(ok, format!("x_T = 0.5, T = 2^6..2^15: max regret {worst:.4} <= cap {cap:.4}, non-increasing beyond 2^8"))
}

fn criterion_7() -> Outcome {
    let m = DemandModel::benchmark_instance();
    let (t, y0) = (1usize << 10, 320usize);
    let x_t = y0 as f64 / t as f64;
    let policy = ResolvingPolicy::new(&m);
    let ci = monte_carlo(10_000, 0, 3.0, |seed| {
        let trace = simulate(&m, &policy, t, y0 as f64, seed)?;
        Ok(diagnostics(&trace, &m, x_t).t_sharp as f64)
    })
    .expect("stopping times");
    let bound = stopping_time_bound(&m, x_t);
    outcome(
        ci.mean - ci.half_width <= bound,
        format!("mean stopping time {:.2} (3 sigma {:.2}) <= {bound}", ci.mean, ci.half_width),
    )
}

/// `H = -(A'A + eps I)`.
fn random_model(rng: &mut ChaCha8Rng, n: usize, a_range: f64, eps: (f64, f64)) -> MultiDemandModel {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-a_range..a_range));
    let eps = rng.random_range(eps.0..eps.1);
    let h = -(a.transpose() * &a + DMatrix::identity(n, n) * eps);
    let h = (&h + h.transpose()) * 0.5;
    let g = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
    let hi = (0..n).map(|_| rng.random_range(0.2..1.5)).collect();
    MultiDemandModel::bernoulli(g, h, hi).expect("strictly concave instance")
}

fn harmonic_fuzz(rng: &mut ChaCha8Rng) -> (bool, f64) {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let t_sharp = rng.random_range(2..200usize);
        let len = rng.random_range(1..300usize);
        let horizon = t_sharp + len - 1;
        let mut seq = || (0..len).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (d, a, b) = (seq(), seq(), seq());
        let res = harmonic_identity_check(t_sharp, &d, &a, &b).unwrap().abs();
        worst = worst.max(res / horizon as f64);
    }
    (worst < 1e-10, worst)
}

fn kkt_suite(rng: &mut ChaCha8Rng) -> (bool, f64) {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let m = random_model(rng, n, 1.0, (0.05, 1.0));
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let sol = solve_fluid_multi(&m, &x).unwrap();
        worst = worst.max(kkt_residuals(&m, &x, &sol).max());
    }
    (worst <= 1e-8, worst)
}

fn interior(m: &MultiDemandModel, x: &DVector<f64>) -> Vec<bool> {
    (0..m.n()).map(|k| x[k] > 1e-9 && x[k] < m.box_hi()[k] - 1e-9).collect()
}

fn finite_difference_suite(rng: &mut ChaCha8Rng) -> (bool, f64, f64) {
    let (mut g_err, mut h_err) = (0.0f64, 0.0f64);
    let h = 1e-5;
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let m = random_model(rng, n, 1.0, (0.2, 1.0));
        let mut pinned: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if pinned.is_empty() {
            pinned.push(0);
        }
        let z: Vec<f64> = pinned.iter().map(|&k| rng.random_range(0.05..0.95) * m.box_hi()[k]).collect();
        let p = partial_optimum(&m, &pinned, &z).unwrap();
        let pattern = interior(&m, &p.full_solution);
        for i in 0..pinned.len() {
            let (mut up, mut dn) = (z.clone(), z.clone());
            up[i] += h;
            dn[i] -= h;
            let pu = partial_optimum(&m, &pinned, &up).unwrap();
            let pd = partial_optimum(&m, &pinned, &dn).unwrap();
            let fd = (pu.value - pd.value) / (2.0 * h);
            g_err = g_err.max((fd - p.grad[i]).abs() / p.grad[i].abs().max(1.0));
            if interior(&m, &pu.full_solution) == pattern && interior(&m, &pd.full_solution) == pattern {
                for j in 0..pinned.len() {
                    let fd2 = (pu.grad[j] - pd.grad[j]) / (2.0 * h);
                    h_err = h_err.max((fd2 - p.hess[(j, i)]).abs() / p.hess[(j, i)].abs().max(1.0));
                }
            }
        }
        let m_prime = m.validate().m_prime;
        let top = SymmetricEigen::new(p.hess.clone()).eigenvalues.max();
        if top > -m_prime * (1.0 - 1e-6) {
            h_err = f64::INFINITY;
        }
    }
    (g_err <= 1e-5 && h_err <= 1e-4, g_err, h_err)
}

fn grid_oracle_suite(rng: &mut ChaCha8Rng) -> (bool, f64) {
    let mut worst = 0.0f64;
    for _ in 0..24 {
        let m = random_model(rng, 2, 0.5, (1.0, 2.0));
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..2.0)).collect();
        let sol = solve_fluid_multi(&m, &x).unwrap();
        let axis = |u: f64| {
            let mut v: Vec<f64> = (0..).map(|i| i as f64 * 1e-3).take_while(|&t| t < u).collect();
            v.push(u);
            v
        };
        let (ax, ay) = (axis(x[0].min(m.box_hi()[0])), axis(x[1].min(m.box_hi()[1])));
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for &p in &ax {
            for &q in &ay {
                let v = m.revenue(&DVector::from_vec(vec![p, q]));
                if v > best.0 {
                    best = (v, p, q);
                }
            }
        }
        if sol.objective < best.0 - 1e-12 {
            return (false, f64::INFINITY);
        }
        worst = worst.max((sol.x_c[0] - best.1).abs()).max((sol.x_c[1] - best.2).abs());
    }
    (worst <= 2e-3, worst)
}

fn dp_below_fluid() -> (bool, f64) {
    let m = DemandModel::benchmark_instance();
    let (t_max, y_max) = (1024, 600);
    let table = solve_dp(&m, t_max, y_max).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for t in 1..=t_max {
        for y in 0..=y_max {
            let x = (y as f64 / t as f64).min(m.unconstrained_optimum());
            worst = worst.max(table.value(t, y) - t as f64 * m.revenue_formula(x));
        }
    }
    (worst <= 1e-9, worst)
}

fn dp_policy_monte_carlo() -> (bool, String) {
    let m = DemandModel::benchmark_instance();
    let (t, y0) = (64, 20);
    let table = Arc::new(solve_dp(&m, t, y0).unwrap());
    let v = table.value(t, y0);
    let policy = DpPolicy::new(table);
    let ci = monte_carlo(100_000, 0, Z99, |s| simulate_revenue(&m, &policy, t, y0 as f64, s)).unwrap();
    (ci.contains(v), format!("MC {:.4} +- {:.4} vs V {v:.4}", ci.mean, ci.half_width))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (h_ok, h_res) = harmonic_fuzz(&mut rng);
    let (k_ok, k_res) = kkt_suite(&mut rng);
    let (f_ok, g_err, h_err) = finite_difference_suite(&mut rng);
    let (o_ok, o_err) = grid_oracle_suite(&mut rng);
    let (d_ok, d_gap) = dp_below_fluid();
    let (mc_ok, mc) = dp_policy_monte_carlo();
    outcome(
        h_ok && k_ok && f_ok && o_ok && d_ok && mc_ok,
        format!(
            "harmonic {h_res:.1e}/T; KKT {k_res:.1e}; FD grad {g_err:.1e} hess {h_err:.1e}; grid {o_err:.1e}; \
             V - fluid max {d_gap:.1e}; DP policy {mc}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let res = run_ho_compare(&HoCompareConfig::preset()).expect("hindsight comparison");
    let bounded = res.rows.iter().all(|r| r.gap <= r.gap_bound + 3.0 * r.ci_half_width);
    let nonneg = res.rows.iter().all(|r| r.gap + r.ci_half_width >= 0.0);
    let trend = res.trend.expect("seven horizons");
    let gaps: Vec<String> = res.rows.iter().map(|r| format!("{:.4}", r.gap)).collect();
    outcome(
        bounded && trend.p_value_positive >= 0.05,
        format!(
            "gaps [{}] vs {:.5} + 3 CI: {bounded}; >= 0 within CI: {nonneg}; Spearman rho {:.3}, p {:.3}",
            gaps.join(", "),
            res.rows[0].gap_bound,
            trend.rho,
            trend.p_value_positive
        ),
    )
}

fn criterion_10() -> Outcome {
    let m = MultiDemandModel::two_product_instance();
    let reports = estimate_multi_regret(&m, &[16, 32, 64], |t| vec![t / 4, t / 4], 100_000, 0, Z95)
        .expect("multi-product regret");
    let positive = reports.iter().all(|r| r.regret - r.estimate.half_width > 0.0);
    let no_doubling = reports.windows(2).all(|w| {
        let (a, b) = (&w[0], &w[1]);
        b.regret - b.estimate.half_width <= 1.5 * (a.regret + a.estimate.half_width)
    });
    let cells: Vec<String> = reports
        .iter()
        .map(|r| format!("T={} {:.4}+-{:.4} (exact {:.4})", r.horizon, r.regret, r.estimate.half_width, r.dp_value - r.exact_value))
        .collect();
    outcome(positive && no_doubling, format!("{}; positive {positive}, ratio <= 1.5 {no_doubling}", cells.join(", ")))
}

fn main() {
    let start = Instant::now();
    let reports = table(6..=15);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("regret table, short horizons", Box::new(|| criterion_1(&reports))),
        ("regret table, long horizons", Box::new(|| criterion_2(&reports))),
        ("logarithmic fluid gap", Box::new(|| criterion_3(&reports))),
        ("constant regret plateau", Box::new(|| criterion_4(&reports))),
        ("boundary case x_T = x^u", Box::new(criterion_5)),
        ("sufficient inventory", Box::new(criterion_6)),
        ("stopping time", Box::new(criterion_7)),
        ("property suites", Box::new(criterion_8)),
        ("hindsight benchmark", Box::new(criterion_9)),
        ("multi-product regret", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "{} [{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
