//! Observer form versus the original system on randomly drawn coupled
//! plants. Initial states come from driving the plant out of rest with a
//! smooth pulse, which makes them compatible with the boundary conditions.

mod common;

use common::{free_output, sup_diff};
use hocf_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pulse(t: f64) -> f64 {
    if (0.0..=1.0).contains(&t) {
        (std::f64::consts::PI * t).sin().powi(4)
    } else {
        0.0
    }
}

fn random_system(seed: u64, n: usize) -> ValidatedSystem {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut u = |a: f64, b: f64| r.gen_range(a..b);
    validate_system(HyperbolicSystem {
        sigma_minus: CoefficientField::linear(u(0.7, 1.4), u(0.7, 1.4)),
        sigma_plus: CoefficientField::linear(u(0.7, 1.4), u(0.7, 1.4)),
        mu_minus: CoefficientField::linear(u(-0.4, 0.4), u(-0.4, 0.4)),
        mu_plus: CoefficientField::linear(u(-0.4, 0.4), u(-0.4, 0.4)),
        n,
        f: (0..n).map(|_| u(-1.0, 1.0)).collect(),
        g: (0..n).map(|_| u(-1.0, 1.0)).collect(),
        q0: u(0.5, 1.5),
        q1: u(-0.5, 0.5),
        b1_bar: 1.0,
        m_plus: u(0.5, 1.5),
        d1: 0.0,
    })
    .unwrap()
}

fn excited_state(sys: &ValidatedSystem, nz: usize) -> StateSnapshot {
    let rest = StateSnapshot::zeros(nz, sys.n);
    let traj = simulate_forward_with(
        sys,
        &rest,
        &Input::Function(&pulse),
        1.0,
        nz,
        SimOptions { frame_stride: 0 },
    )
    .unwrap();
    let mut x = traj.final_state().clone();
    x.time = 0.0;
    x
}

/// Sup error of the observer-form output over `[0, 3τ̂]`, relative to the
/// peak of the original output.
fn relative_error(sys: &ValidatedSystem, nz: usize) -> f64 {
    let th = sys.times().tau_hat;
    let x0 = excited_state(sys, nz);
    let res = ((th * (nz - 1) as f64).round() as usize).max(8);
    let kernels = solve_kernels(sys, 1.0, nz - 1, 1e-12).unwrap();
    let fde = reduce_to_canonical(&assemble_raw_fde(sys, &kernels, res + 1).unwrap());
    let ybar = observability_map(sys, &x0, res + 1).unwrap();
    let eta0 = obs_to_observer(&fde, &ybar).unwrap();
    let hocf = simulate_hocf(&HocfSystem::new(fde).unwrap(), &eta0, 3.0 * th, res).unwrap();
    let y = free_output(sys, &x0, 3.0 * th);
    let peak = y.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let reference: Vec<f64> = hocf.times.iter().map(|&t| y.at(t)).collect();
    sup_diff(&reference, &hocf.y) / peak
}

#[test]
fn coupled_first_order_plants_converge() {
    for seed in [1, 3] {
        let sys = random_system(seed, 1);
        let coarse = relative_error(&sys, 129);
        let fine = relative_error(&sys, 257);
        assert!(fine < 0.02, "seed {seed}: relative error {fine}");
        assert!(coarse / fine > 1.6, "seed {seed}: ratio {}", coarse / fine);
    }
}

#[test]
fn coupled_second_order_plant_converges() {
    let sys = random_system(1, 2);
    let coarse = relative_error(&sys, 129);
    let fine = relative_error(&sys, 257);
    assert!(fine < 0.05, "relative error {fine}");
    assert!(coarse / fine > 1.6, "ratio {}", coarse / fine);
}

#[test]
fn generated_fde_annihilates_the_free_response() {
    let sys = random_system(3, 1);
    let residual = |nz: usize| {
        let x0 = excited_state(&sys, nz);
        let th = sys.times().tau_hat;
        let res = ((th * (nz - 1) as f64).round() as usize).max(8);
        let kernels = solve_kernels(&sys, 1.0, nz - 1, 1e-12).unwrap();
        let fde = reduce_to_canonical(&assemble_raw_fde(&sys, &kernels, res + 1).unwrap());
        let y = free_output(&sys, &x0, 2.5 * th);
        let peak = y.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        fde_residual(&fde, &y).unwrap() / peak
    };
    let (coarse, fine) = (residual(129), residual(257));
    assert!(fine < coarse, "{coarse} -> {fine}");
}

#[test]
fn observability_map_matches_simulated_output() {
    let sys = random_system(2, 1);
    let x0 = excited_state(&sys, 129);
    let th = sys.times().tau_hat;
    let ybar = observability_map(&sys, &x0, 65).unwrap();
    let y = free_output(&sys, &x0, th);
    for (tau, v) in ybar.tau_grid().iter().zip(&ybar.ybar) {
        assert!((y.at(*tau) - v).abs() < 1e-9, "tau {tau}");
    }
}

#[test]
fn backward_march_undoes_forward_march() {
    let sys = random_system(4, 1);
    let nz = 257;
    let x0 = excited_state(&sys, nz);
    let tm = sys.times().tau_minus;
    let traj = simulate_forward_with(
        &sys,
        &x0,
        &Input::Zero,
        tm,
        nz,
        SimOptions { frame_stride: 0 },
    )
    .unwrap();
    let window = traj.output();
    let back = simulate_backward(&sys, traj.final_state(), &window).unwrap();
    let scale = x0.l2_norm().max(1e-12);
    let rel = back.l2_distance(&x0) / scale;
    assert!(rel < 0.1, "relative L2 distance {rel}");
    assert!((back.time - 0.0).abs() < 1e-12);
}
