use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hocf_core::string_example::{build_string_system, closed_form_fde, StringParams};
use hocf_core::*;

fn coupled() -> ValidatedSystem {
    validate_system(HyperbolicSystem {
        sigma_minus: CoefficientField::linear(1.0, 1.2),
        sigma_plus: CoefficientField::constant(0.9),
        mu_minus: CoefficientField::linear(0.3, -0.2),
        mu_plus: CoefficientField::constant(0.25),
        n: 1,
        f: vec![0.4],
        g: vec![0.6],
        q0: 1.1,
        q1: 0.2,
        b1_bar: 1.0,
        m_plus: 0.8,
        d1: 0.0,
    })
    .unwrap()
}

fn smooth_state(nz: usize, n: usize) -> StateSnapshot {
    StateSnapshot::from_fns(
        nz,
        |z| (3.0 * z).sin(),
        |z| (2.0 * z).cos() - 1.0,
        vec![0.1; n],
    )
}

fn kernels(c: &mut Criterion) {
    let sys = coupled();
    let mut g = c.benchmark_group("kernels");
    g.sample_size(10);
    for res in [32, 64, 128] {
        g.bench_with_input(BenchmarkId::from_parameter(res), &res, |b, &res| {
            b.iter(|| solve_kernels(black_box(&sys), 1.0, res, 1e-10).unwrap())
        });
    }
    g.finish();
}

fn fde(c: &mut Criterion) {
    let sys = coupled();
    let table = solve_kernels(&sys, 1.0, 128, 1e-10).unwrap();
    let samples = 2 * 128 + 1;
    c.bench_function("fde/assemble_and_reduce", |b| {
        b.iter(|| reduce_to_canonical(&assemble_raw_fde(black_box(&sys), &table, samples).unwrap()))
    });
}

fn transforms(c: &mut Criterion) {
    let p = StringParams::new(1.0, 1.0).unwrap();
    let mut g = c.benchmark_group("volterra");
    for points in [257, 1025] {
        let fde = closed_form_fde(&p, points);
        let ybar = ObservabilityState::from_fn(2.0, points, |t| (1.3 * t).sin() + 0.2 * t);
        let eta = obs_to_observer(&fde, &ybar).unwrap();
        g.bench_with_input(BenchmarkId::new("to_observer", points), &points, |b, _| {
            b.iter(|| obs_to_observer(black_box(&fde), &ybar).unwrap())
        });
        g.bench_with_input(
            BenchmarkId::new("from_observer", points),
            &points,
            |b, _| b.iter(|| observer_to_obs(black_box(&fde), &eta).unwrap()),
        );
    }
    g.finish();
}

fn simulate(c: &mut Criterion) {
    let string = build_string_system(&StringParams::new(1.0, 1.0).unwrap());
    let mut g = c.benchmark_group("simulate");
    for nz in [129, 513] {
        let x0 = smooth_state(nz, 2);
        g.bench_with_input(BenchmarkId::new("forward", nz), &nz, |b, &nz| {
            b.iter(|| {
                simulate_forward_with(
                    black_box(&string),
                    &x0,
                    &Input::Zero,
                    6.0,
                    nz,
                    SimOptions { frame_stride: 0 },
                )
                .unwrap()
            })
        });
    }
    let p = StringParams::new(1.0, 1.0).unwrap();
    let fde = closed_form_fde(&p, 513);
    let hocf = HocfSystem::new(fde.clone()).unwrap();
    let ybar = ObservabilityState::from_fn(2.0, 513, |t| (1.3 * t).sin());
    let eta = obs_to_observer(&fde, &ybar).unwrap();
    g.bench_function("observer_form/513", |b| {
        b.iter(|| simulate_hocf(black_box(&hocf), &eta, 6.0, 512).unwrap())
    });
    g.finish();
}

criterion_group!(benches, kernels, fde, transforms, simulate);
criterion_main!(benches);
