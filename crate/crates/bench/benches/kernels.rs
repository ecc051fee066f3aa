use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use dunkl_core::hermite::{LadderTable, SpectralCoeffs};
use dunkl_core::hharmonics::build_basis;
use dunkl_core::laguerre::{heat_kernel_closed, heat_kernel_spectral};
use dunkl_core::mixed_norm::{
    mixed_norm, norm_ratio_probe, probe_sphere_size, MixedNormParams, PowerWeight, ProbeSettings,
};
use dunkl_core::ReflectionGroup;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kernels(c: &mut Criterion) {
    c.bench_function("laguerre kernel closed", |b| {
        b.iter(|| heat_kernel_closed(black_box(0.9), 0.5, 1.3, 2.1).unwrap())
    });
    c.bench_function("laguerre kernel spectral, 100 terms", |b| {
        b.iter(|| heat_kernel_spectral(black_box(0.9), 0.5, 1.3, 2.1, 100).unwrap())
    });
}

fn basis(c: &mut Criterion) {
    let g = ReflectionGroup::new(&[0.6, 0.3]).unwrap();
    let mut grp = c.benchmark_group("basis");
    grp.sample_size(10);
    grp.bench_function("h-harmonic basis, d = 2, degree 16", |b| b.iter(|| build_basis(&g, 16).unwrap()));
    grp.bench_function("ladder table, 33 levels", |b| b.iter(|| LadderTable::measure(&g, 33).unwrap()));
    grp.finish();
}

fn norms(c: &mut Criterion) {
    let g = ReflectionGroup::new(&[0.6, 0.3]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = SpectralCoeffs::random_invariant(&g, 16, &mut rng);
    let params = MixedNormParams::new(&g, 3.0, PowerWeight::new(0.5), probe_sphere_size(16)).unwrap();
    let mut grp = c.benchmark_group("mixed norm");
    grp.sample_size(10);
    grp.bench_function("L^3(r^0.5) of a degree 16 expansion", |b| {
        b.iter(|| mixed_norm(|x| f.eval(x), &params).unwrap())
    });
    let settings = ProbeSettings {
        group: g.clone(),
        weights: vec![(1.5, 0.0), (3.0, 0.5)],
        n_list: vec![8, 16],
        trials: 4,
        seed: 0,
    };
    grp.bench_function("norm ratio probe, 4 trials", |b| b.iter(|| norm_ratio_probe(&settings).unwrap()));
    grp.finish();
}

criterion_group!(benches, kernels, basis, norms);
criterion_main!(benches);
