use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ibvp_bench::fixture;
use ibvp_core::sbp::build_sbp_1d;
use ibvp_core::{precondition, solve, Discretization, SbpOrder, SolverOptions};

const GRIDS: [(usize, usize); 2] = [(24, 16), (60, 48)];

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    for order in [SbpOrder::Sbp121, SbpOrder::Sbp242] {
        g.bench_with_input(BenchmarkId::new("sbp_1d", order), &order, |b, &o| {
            b.iter(|| build_sbp_1d(o, 96, 1.0 / 95.0).unwrap())
        });
        for (nt, ns) in GRIDS {
            let spec = precondition(&ibvp_bench::setup(order, nt, ns)).unwrap().0;
            g.bench_with_input(BenchmarkId::new(format!("discretization/{order}"), format!("{nt}x{ns}")), &spec, |b, s| {
                b.iter(|| Discretization::new(s).unwrap())
            });
        }
    }
    g.finish();
}

fn derivatives(c: &mut Criterion) {
    let mut g = c.benchmark_group("derivatives");
    for (nt, ns) in GRIDS {
        let (disc, x0) = fixture(SbpOrder::Sbp121, nt, ns);
        let x = x0.pack();
        let id = format!("{nt}x{ns}");
        g.bench_with_input(BenchmarkId::new("gradient", &id), &x, |b, x| b.iter(|| disc.gradient_flat(x).unwrap()));
        g.bench_with_input(BenchmarkId::new("hessian", &id), &x, |b, x| b.iter(|| disc.hessian(x).unwrap()));
    }
    g.finish();
}

fn newton(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    for order in [SbpOrder::Sbp121, SbpOrder::Sbp242] {
        let (disc, x0) = fixture(order, 24, 16);
        g.bench_function(BenchmarkId::new(order.to_string(), "24x16"), |b| {
            b.iter(|| solve(&disc, &x0, &SolverOptions::default()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, assembly, derivatives, newton);
criterion_main!(benches);
