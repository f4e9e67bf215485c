use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use symlab_bench::{noise, semisimple};
use symlab_core::cauchy::{example1_growth, GrowthOptions};
use symlab_core::matrix::strong_hyperbolicity_certificate;
use symlab_core::sampling::complement_sphere;
use symlab_core::symbol::{strong_hyperbolicity_in_direction, ASlot, SamplePlan, SymbolFamily};
use symlab_core::wavepacket::{dyadic_decompose, wavepacket_transform, DyadicFrame};

fn matrices(c: &mut Criterion) {
    for n in [3, 6] {
        let ms = semisimple(n, 64);
        c.bench_function(&format!("certificate n={n} x64"), |b| {
            b.iter(|| ms.iter().filter(|a| strong_hyperbolicity_certificate(black_box(a)).pass).count())
        });
    }
}

fn symbols(c: &mut Criterion) {
    let fam = SymbolFamily::example1(ASlot::Const(0.5));
    let nu = [1.0, 0.0, 0.0];
    let plan = SamplePlan { params: vec![vec![0.5]], sphere: 200 };
    c.bench_function("symbol certificate 200 directions", |b| {
        b.iter(|| strong_hyperbolicity_in_direction(&fam, black_box(&nu), &plan).unwrap().pass)
    });
    c.bench_function("complement sphere 1000", |b| b.iter(|| complement_sphere(black_box(&nu), 1000).len()));
}

fn packets(c: &mut Criterion) {
    let u = noise(1024);
    let frame = DyadicFrame::for_grid(&u);
    c.bench_function("wave packet transform n=1024 lambda=64", |b| {
        b.iter(|| wavepacket_transform(black_box(&u), 64.0, None).unwrap().norm())
    });
    c.bench_function("dyadic decomposition n=1024", |b| b.iter(|| dyadic_decompose(black_box(&u), &frame).unwrap().len()));
}

fn growth(c: &mut Criterion) {
    let opts = GrowthOptions { n: 128, ..GrowthOptions::default() };
    let mut g = c.benchmark_group("growth");
    g.sample_size(10);
    g.bench_function("mode growth n=128 eta=256", |b| b.iter(|| example1_growth(0.5, black_box(&[256.0]), &opts).unwrap().sigma));
    g.finish();
}

criterion_group!(benches, matrices, symbols, packets, growth);
criterion_main!(benches);
