//! Microbenchmarks for the hot paths: network forward/backward passes, the
//! exact LP, and the energy distance.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use choquet_core::rng::{self, streams};
use choquet_core::{
    energy_distance, lp_vdc_discrete, ConstraintProfile, EmpiricalMeasure, MaxoutNet, NetShape,
    Sampler,
};

fn planar_batch(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut s = Sampler::eight_gaussians(seed);
    let m = s.sample_batch(n);
    (0..m.len()).map(|i| m.point(i).to_vec()).collect()
}

fn bench_forward(c: &mut Criterion) {
    let shape = NetShape::new(vec![2, 16, 16], 2).unwrap();
    let net = MaxoutNet::init(shape, ConstraintProfile::convex_hard(1.0), rng::derive(0, streams::NET_INIT));
    let batch = planar_batch(512, 1);
    c.bench_function("maxout forward 2x16x16 k2 batch 512", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for x in &batch {
                acc += net.forward(black_box(x)).0;
            }
            acc
        })
    });
}

fn bench_backward(c: &mut Criterion) {
    let shape = NetShape::new(vec![2, 16, 16], 2).unwrap();
    let net = MaxoutNet::init(shape, ConstraintProfile::convex_hard(1.0), rng::derive(0, streams::NET_INIT));
    let batch = planar_batch(512, 1);
    let mut grad = vec![0.0; net.param_count()];
    c.bench_function("maxout forward+backward 2x16x16 k2 batch 512", |b| {
        b.iter(|| {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for x in &batch {
                let (_, trace) = net.forward(black_box(x));
                let (pg, _) = net.backward(&trace, 1.0);
                for (g, p) in grad.iter_mut().zip(&pg) {
                    *g += p;
                }
            }
            black_box(&grad);
        })
    });
}

fn bench_lp(c: &mut Criterion) {
    let plus = EmpiricalMeasure::from_atoms(
        &[-0.9, -0.5, -0.1, 0.2, 0.6],
        &[0.2, 0.2, 0.2, 0.2, 0.2],
    )
    .unwrap();
    let minus = EmpiricalMeasure::from_atoms(
        &[-1.2, -0.4, 0.0, 0.5, 1.1],
        &[0.1, 0.25, 0.3, 0.25, 0.1],
    )
    .unwrap();
    c.bench_function("lp vdc 10 atoms", |b| {
        b.iter(|| lp_vdc_discrete(black_box(&plus), black_box(&minus), 1.0).unwrap().value)
    });
}

fn bench_energy_distance(c: &mut Criterion) {
    let mut s = Sampler::eight_gaussians(2);
    let a = s.sample_batch(512);
    let b_cloud = s.sample_batch(512);
    c.bench_function("energy distance 512 vs 512", |b| {
        b.iter_batched(
            || (),
            |()| energy_distance(black_box(&a), black_box(&b_cloud)),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_forward, bench_backward, bench_lp, bench_energy_distance);
criterion_main!(benches);
