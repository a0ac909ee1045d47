use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion};

use ubi_core::ingest::{load_inputs, InputPaths};
use ubi_core::radio::{self, SimConfig};
use ubi_core::scenario;
use ubi_core::Scenario;

fn simulation(c: &mut Criterion) {
    let cfg = SimConfig { iterations: 2_000, ..Default::default() };
    c.bench_function("simulate_se 2k", |b| {
        b.iter(|| radio::simulate_se(black_box(1.0), black_box(800.0), &cfg).unwrap())
    });
    let grid = [0.0, 0.1, 1.0, 10.0];
    c.bench_function("build_lookups 4-point grid", |b| {
        b.iter(|| radio::build_lookups(&[800.0, 1800.0], &grid, &[50.0, 95.0], &cfg).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/two_country");
    let data = load_inputs(&InputPaths::in_dir(&dir)).unwrap();
    let text = std::fs::read_to_string(dir.join("scenario.toml")).unwrap();
    let s = Scenario::from_toml_str(&text).unwrap();
    let lookups = s.load_lookups(&data, &dir).unwrap();
    c.bench_function("run_global fixture", |b| {
        b.iter(|| scenario::run_global(black_box(&data), &s, &lookups).unwrap())
    });
}

criterion_group!(benches, simulation, pipeline);
criterion_main!(benches);
