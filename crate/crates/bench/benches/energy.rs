use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use riesz_stab::certifier::compute_v0;
use riesz_stab::minimizer::{minimize_configuration, riesz_gradient, Domain, MinimizeOptions};
use riesz_stab::riesz::riesz_energy;
use riesz_stab::{random_configuration, total_energy, total_energy_cell_list, CoreTailBounds, PairPotential, SamplingBox};

fn pair_sums(c: &mut Criterion) {
    let mut g = c.benchmark_group("pair_sums");
    for n in [100usize, 400, 1000] {
        let gamma = random_configuration(n, &SamplingBox::new(3, 10.0).unwrap(), 7);
        g.bench_with_input(BenchmarkId::new("riesz_energy", n), &gamma, |b, x| {
            b.iter(|| riesz_energy(black_box(x), 1.0).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("riesz_gradient", n), &gamma, |b, x| {
            b.iter(|| riesz_gradient(black_box(x), 1.0).unwrap())
        });
    }
    g.finish();
}

fn cell_list(c: &mut Criterion) {
    let p = PairPotential::lj_like(3, 6.0, 1.0, 1.0, Some(2.5)).unwrap();
    let mut g = c.benchmark_group("short_range_energy");
    for n in [500usize, 2000] {
        // density about one point per unit volume
        let rib = (n as f64).cbrt();
        let gamma = random_configuration(n, &SamplingBox::new(3, rib).unwrap(), 3);
        g.bench_with_input(BenchmarkId::new("direct", n), &gamma, |b, x| b.iter(|| total_energy(black_box(x), &p).unwrap()));
        g.bench_with_input(BenchmarkId::new("cell_list", n), &gamma, |b, x| {
            b.iter(|| total_energy_cell_list(black_box(x), &p, 2.5).unwrap())
        });
    }
    g.finish();
}

fn minimize(c: &mut Criterion) {
    let opts = MinimizeOptions { starts: Some(4), ..MinimizeOptions::default() };
    let dom = Domain::ball(3, 1.0).unwrap();
    c.bench_function("minimize_ball_n20_s1", |b| b.iter(|| minimize_configuration(20, &dom, 1.0, &opts).unwrap()));
}

fn attraction_budget(c: &mut Criterion) {
    let p = PairPotential::riesz(
        2,
        CoreTailBounds {
            core_exponent: 4.0,
            core_strength: 1.0,
            core_radius: 1.0,
            tail_radius: 2.0,
            tail_strength: 1.0,
            tail_exponent: 1.5,
        },
    )
    .unwrap();
    let mut g = c.benchmark_group("v0");
    g.sample_size(10);
    g.bench_function("lambda_0.25_auto", |b| b.iter(|| compute_v0(&p, black_box(0.25), None).unwrap()));
    g.finish();
}

criterion_group!(benches, pair_sums, cell_list, minimize, attraction_budget);
criterion_main!(benches);
