use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use slag_toric::amoeba::{amoeba_sample, curve_family, fattening_distances, SamplingConfig, Window};
use slag_toric::deformations::{minkowski_decompositions, LatticePolygon};
use slag_toric::lattice::q;
use slag_toric::slag::{certify_fibers, FibrationVariant, TorusInvariantPotential, VerifyConfig};
use slag_toric::tropical::{tropical_curve, TropicalPolynomial};
use slag_toric::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];
const SUPPORT: [[i64; 2]; 4] = [[1, 0], [0, 1], [-1, -1], [0, 0]];
const T: f64 = 0.01;

fn amoeba(c: &mut Criterion) {
    let h = curve_family(&SUPPORT, &[1.0, 1.0, 1.0, 0.0], &[Complex64::new(1.0, 0.0); 4], T).unwrap();
    let w = Window::around(3.0, T);
    let cfg = SamplingConfig::window(w.lo, w.hi, 200, 64);
    let mut group = c.benchmark_group("amoeba_sample_200x64");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &m| b.iter(|| amoeba_sample(black_box(&h), &cfg, m)));
    }
    group.finish();
}

fn fattening(c: &mut Criterion) {
    let h = curve_family(&SUPPORT, &[1.0, 1.0, 1.0, 0.0], &[Complex64::new(1.0, 0.0); 4], T).unwrap();
    let tc = tropical_curve(&TropicalPolynomial::from_phi(SUPPORT.to_vec(), &[q(1), q(1), q(1), q(0)], T).unwrap()).unwrap();
    let w = Window::around(3.0, T);
    let cloud = amoeba_sample(&h, &SamplingConfig::window(w.lo, w.hi, 200, 64), Execution::Parallel);
    let mut group = c.benchmark_group("fattening_distances");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &m| b.iter(|| fattening_distances(black_box(&cloud), &tc, w, m)));
    }
    group.finish();
}

fn slag_fibers(c: &mut Criterion) {
    let p = TorusInvariantPotential::quadratic(3, 0.5);
    let cfg = VerifyConfig { variant: FibrationVariant::Proper, fibers: 10, points_per_fiber: 20, ..VerifyConfig::default() };
    let mut group = c.benchmark_group("slag_certify_10x20");
    group.sample_size(20);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &m| b.iter(|| certify_fibers(black_box(&p), &cfg, m).unwrap()));
    }
    group.finish();
}

fn minkowski(c: &mut Criterion) {
    let hexagon = LatticePolygon::new(vec![[0, 0], [2, 0], [4, 2], [4, 4], [2, 4], [0, 2]]).unwrap();
    let mut group = c.benchmark_group("minkowski_doubled_hexagon");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &m| {
            b.iter(|| minkowski_decompositions(black_box(&hexagon), false, 16, m).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, amoeba, fattening, slag_fibers, minkowski);
criterion_main!(benches);
