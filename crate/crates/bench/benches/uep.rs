use amra_bench::shearlet_plan;
use amra_core::amra::validate_plan;
use amra_core::bankgen::{shearlet_bank_2d, shearlet_bank_3d, SeedName};
use amra_core::uep::{check_uep_general, check_uep_same_lattice, DEFAULT_TOL};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_uep(c: &mut Criterion) {
    let mixed = shearlet_bank_2d(&[0, 1], SeedName::LinearSpline).unwrap();
    let single = shearlet_bank_2d(&[2], SeedName::LinearSpline).unwrap();
    let cube = shearlet_bank_3d(&[(0, 0), (1, 1)], SeedName::Haar).unwrap();

    c.bench_function("uep/general_2d_mixed", |b| b.iter(|| check_uep_general(black_box(&mixed), DEFAULT_TOL).unwrap()));
    c.bench_function("uep/general_2d_single", |b| b.iter(|| check_uep_general(black_box(&single), DEFAULT_TOL).unwrap()));
    c.bench_function("uep/same_lattice_2d", |b| b.iter(|| check_uep_same_lattice(black_box(&single), DEFAULT_TOL).unwrap()));
    c.bench_function("uep/general_3d", |b| b.iter(|| check_uep_general(black_box(&cube), DEFAULT_TOL).unwrap()));

    let plan = shearlet_plan(SeedName::Haar);
    c.bench_function("uep/validate_plan", |b| b.iter(|| validate_plan(black_box(&plan)).unwrap()));
}

criterion_group!(benches, bench_uep);
criterion_main!(benches);
