//! Benchmarks for the hot paths: the three inf-convolution strategies, the
//! two ball-mass routes, and the 1D rearrangement.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use conelab_core::hopflax::{inf_convolve, GridField, HlMethod};
use conelab_core::quadrature::{ball_weight_mass, GridRule, MassMethod};
use conelab_core::transport::{brenier_map_1d, Density1D, Grid1};
use conelab_core::{Cone, Weight};

fn bench_inf_convolve(c: &mut Criterion) {
    let cone = Cone::full_space(1).unwrap();
    let rule = Arc::new(GridRule::new(&cone, vec![-4.0], vec![4.0], 512).unwrap());
    let g = GridField::from_fn(rule.clone(), |x| (1.3 * x[0]).sin() + 0.4 * x[0] * x[0], 0.0);
    let mut group = c.benchmark_group("inf_convolve_1d_n512");
    for (name, method) in [
        ("naive", HlMethod::Naive),
        ("pruned", HlMethod::Pruned),
        ("fast_p2", HlMethod::FastP2),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| inf_convolve(black_box(&g), 0.7, 2.0, &cone, method).unwrap())
        });
    }
    group.finish();

    let cone2 = Cone::full_space(2).unwrap();
    let rule2 = Arc::new(GridRule::new(&cone2, vec![-3.0, -3.0], vec![3.0, 3.0], 128).unwrap());
    let g2 = GridField::from_fn(rule2.clone(), |x| x[0].cos() + x[1] * x[1], 0.0);
    c.bench_function("inf_convolve_2d_n128_fast_p2", |b| {
        b.iter(|| inf_convolve(black_box(&g2), 0.5, 2.0, &cone2, HlMethod::FastP2).unwrap())
    });
}

fn bench_ball_mass(c: &mut Criterion) {
    let w = Weight::monomial(Cone::positive_orthant(2).unwrap(), vec![1.0, 1.0]).unwrap();
    c.bench_function("ball_mass_closed_form", |b| {
        b.iter(|| ball_weight_mass(black_box(&w), MassMethod::RadialExact).unwrap())
    });
    c.bench_function("ball_mass_grid_n128", |b| {
        b.iter(|| ball_weight_mass(black_box(&w), MassMethod::Grid(128)).unwrap())
    });
}

fn bench_brenier(c: &mut Criterion) {
    let w = Weight::constant(Cone::full_space(1).unwrap(), 1.0).unwrap();
    let grid = Grid1::new(-10.0, 10.0, 4096).unwrap();
    let src = Density1D::from_density(w.clone(), grid, |x| (-(x - 0.5) * (x - 0.5)).exp()).unwrap();
    let dst = Density1D::from_density(w, grid, |y| (-y * y).exp()).unwrap();
    c.bench_function("brenier_map_1d_n4096", |b| {
        b.iter(|| brenier_map_1d(black_box(&src), black_box(&dst)).unwrap())
    });
}

criterion_group!(benches, bench_inf_convolve, bench_ball_mass, bench_brenier);
criterion_main!(benches);
