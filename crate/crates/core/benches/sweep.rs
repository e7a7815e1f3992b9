use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use sz_scatter::config::parse_config;
use sz_scatter::gauges::{gauge_wkb, rho_pair};
use sz_scatter::potentials::{truncate_domain, wavenumber_field, EnergySpec, PotentialProfile};
use sz_scatter::run::run;
use sz_scatter::system::{transfer_matrix_with, ProductOptions};
use sz_scatter::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

const SWEEP: &str = "\
[run]
mode = scatter
[potential]
kind = gaussian
v0 = 1
sigma = 1
[energies]
range = 0.5:5:16
[gauges]
list = constant, wkb
[tolerances]
ode_tol = 1e-10
";

fn energy_sweep(c: &mut Criterion) {
    let config = parse_config(SWEEP).expect("bench config");
    let mut group = c.benchmark_group("energy_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(black_box(&config), exec).expect("sweep"))
        });
    }
    group.finish();
}

fn transfer_product(c: &mut Criterion) {
    let p = PotentialProfile::gaussian(1.0, 1.0, 0.0).expect("potential");
    let e = EnergySpec::new(2.0);
    let grid = truncate_domain(&p, &e, 1e-10).expect("grid");
    let w = wavenumber_field(&p, &e).expect("field");
    let r = rho_pair(&gauge_wkb(&w, &grid).expect("gauge"), &w);
    let mut group = c.benchmark_group("transfer_product");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = ProductOptions { n_min: 4096, execution: exec, ..ProductOptions::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| transfer_matrix_with(black_box(&r), grid.x_min, grid.x_max, &opts).expect("product"))
        });
    }
    group.finish();
}

criterion_group!(benches, energy_sweep, transfer_product);
criterion_main!(benches);
