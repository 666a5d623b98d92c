use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use pistonpipe::scenarios::{constant_outflow, perturbed_closed};
use pistonpipe::solver::momentum_piston_solve;
use pistonpipe::{step, GridCoefficients};

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for n in [64, 256, 1024] {
        let sc = constant_outflow(n, 0.2, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::new("outflow", n), &sc, |b, sc| {
            b.iter(|| step(black_box(&sc.initial), &sc.schedule, &sc.params, &sc.cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_momentum(c: &mut Criterion) {
    let mut group = c.benchmark_group("momentum_piston_solve");
    for n in [64, 256, 1024] {
        let sc = perturbed_closed(n, 0.1, 1.0).unwrap();
        let s = &sc.initial;
        let coeffs = GridCoefficients::new(s.grid.eta, 0.0, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &sc, |b, sc| {
            b.iter(|| {
                momentum_piston_solve(
                    black_box(&s.grid),
                    &coeffs,
                    &s.piston,
                    &sc.params,
                    0.0,
                    1e-3,
                    1.0,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_run(c: &mut Criterion) {
    let sc = perturbed_closed(128, 0.1, 0.5).unwrap();
    c.bench_function("run/perturbed_closed_128", |b| {
        b.iter(|| {
            let mut sim = sc.simulation().unwrap();
            black_box(sim.run())
        })
    });
}

criterion_group!(benches, bench_step, bench_momentum, bench_run);
criterion_main!(benches);
