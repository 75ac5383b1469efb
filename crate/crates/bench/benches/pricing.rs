use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rmpricing::demand::{DemandModel, MultiDemandModel};
use rmpricing::fluid::solve_fluid_multi;
use rmpricing::policies::{dp_value, evaluate_policy_exact, solve_dp_multi, ResolvingPolicy};
use rmpricing::sim::{simulate_revenue, UniformStream};

fn dp(c: &mut Criterion) {
    let m = DemandModel::benchmark_instance();
    let mut g = c.benchmark_group("dp_value");
    for k in [8u32, 10, 12] {
        let t = 1usize << k;
        g.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter(|| dp_value(&m, black_box(t), 5 * t / 16).unwrap())
        });
    }
    g.finish();
}

fn exact_evaluation(c: &mut Criterion) {
    let m = DemandModel::benchmark_instance();
    let p = ResolvingPolicy::new(&m);
    let mut g = c.benchmark_group("evaluate_policy_exact");
    for k in [8u32, 10, 12] {
        let t = 1usize << k;
        g.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter(|| evaluate_policy_exact(&m, &p, black_box(t), 5 * t / 16).unwrap())
        });
    }
    g.finish();
}

fn fluid_multi(c: &mut Criterion) {
    let m = MultiDemandModel::two_product_instance();
    let mut stream = UniformStream::new(1);
    let rhs: Vec<[f64; 2]> = (0..256).map(|_| [stream.next_uniform(), stream.next_uniform()]).collect();
    c.bench_function("solve_fluid_multi/n=2", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % rhs.len();
            solve_fluid_multi(&m, black_box(&rhs[i])).unwrap()
        })
    });
    c.bench_function("solve_dp_multi/T=32", |b| b.iter(|| solve_dp_multi(&m, black_box(32), &[8, 8]).unwrap()));
}

fn simulation(c: &mut Criterion) {
    let m = DemandModel::benchmark_instance();
    let p = ResolvingPolicy::new(&m);
    let mut seed = 0u64;
    c.bench_function("simulate/resolving/T=1024", |b| {
        b.iter(|| {
            seed += 1;
            simulate_revenue(&m, &p, 1024, 320.0, black_box(seed)).unwrap()
        })
    });
}

criterion_group!(benches, dp, exact_evaluation, fluid_multi, simulation);
criterion_main!(benches);
