#![allow(dead_code)]

use hocf_core::string_example::{build_string_system, StringParams};
use hocf_core::{
    simulate_forward_with, CoefficientField, HyperbolicSystem, Input, SimOptions, StateSnapshot,
    ValidatedSystem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn string(k: f64, m: f64) -> (StringParams, ValidatedSystem) {
    let p = StringParams::new(k, m).unwrap();
    (p, build_string_system(&p))
}

/// Random trigonometric profile `Σ c_j sin(jπz + φ_j)` with its first two
/// derivatives.
fn random_profile(rng: &mut ChaCha8Rng, modes: usize) -> impl Fn(f64) -> [f64; 3] {
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|_| {
            (
                rng.gen_range(-0.5..0.5),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    move |z| {
        coeffs
            .iter()
            .enumerate()
            .fold([0.0; 3], |acc, (j, (c, ph))| {
                let w = (j + 1) as f64 * std::f64::consts::PI;
                let (s, co) = (w * z + ph).sin_cos();
                [acc[0] + c * s, acc[1] + c * w * co, acc[2] - c * w * w * s]
            })
    }
}

/// Smooth initial state of the string system whose free response is C²:
/// both boundary conditions and their first two time derivatives hold at
/// t = 0, so no kinks of y, y′ or y″ travel through the domain.
pub fn compatible_string_state(sys: &ValidatedSystem, nz: usize, seed: u64) -> StateSnapshot {
    compatible_string_state_modes(sys, nz, seed, 2)
}

pub fn compatible_string_state_modes(
    sys: &ValidatedSystem,
    nz: usize,
    seed: u64,
    modes: usize,
) -> StateSnapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = random_profile(&mut rng, modes);
    let psi_r = random_profile(&mut rng, modes);
    let (f, g, q0) = (&sys.f, &sys.g, sys.q0);
    // z = 1: x⁻ = −x⁺ with x⁻(z,t) = φ(z+t), x⁺(z,t) = ψ(z−t)
    let (p1, r1) = (phi(1.0), psi_r(1.0));
    let c = [-p1[0] - r1[0], p1[1] - r1[1], 0.5 * (-p1[2] - r1[2])];
    let psi1 = move |z: f64| {
        let r = psi_r(z);
        let d = z - 1.0;
        [
            r[0] + c[0] + c[1] * d + c[2] * d * d,
            r[1] + c[1] + 2.0 * c[2] * d,
            r[2] + 2.0 * c[2],
        ]
    };
    // z = 0: x⁺ = ξ̄_1 + q0 x⁻, differentiated twice along the ODE
    let (p0, s0) = (phi(0.0), psi1(0.0));
    let xi1 = s0[0] - q0 * p0[0];
    let xi2 = -s0[1] - g[0] * p0[0] - q0 * p0[1];
    let target = q0 * p0[2] + (-f[0] * xi1 - f[1] * xi2 + g[1] * p0[0]) + g[0] * p0[1];
    // z²(z−1)³ only moves ψ″(0), by −2
    let c3 = 0.5 * (s0[2] - target);
    let psi = move |z: f64| psi1(z)[0] + c3 * z * z * (z - 1.0).powi(3);
    StateSnapshot::from_fns(nz, |z| phi(z)[0], psi, vec![xi1, xi2])
}

/// Free-response output of `sys` from `x0` on `[0, t_end]`.
pub fn free_output(sys: &ValidatedSystem, x0: &StateSnapshot, t_end: f64) -> hocf_core::Signal {
    simulate_forward_with(
        sys,
        x0,
        &Input::Zero,
        t_end,
        x0.nz(),
        SimOptions { frame_stride: 0 },
    )
    .unwrap()
    .output()
}

pub fn constant_system(
    sigma: (f64, f64),
    mu: (f64, f64),
    f: f64,
    g: f64,
    q0: f64,
    q1: f64,
) -> ValidatedSystem {
    hocf_core::validate_system(HyperbolicSystem {
        sigma_minus: CoefficientField::constant(sigma.0),
        sigma_plus: CoefficientField::constant(sigma.1),
        mu_minus: CoefficientField::constant(mu.0),
        mu_plus: CoefficientField::constant(mu.1),
        n: 1,
        f: vec![f],
        g: vec![g],
        q0,
        q1,
        b1_bar: 1.0,
        m_plus: 1.0,
        d1: 0.0,
    })
    .unwrap()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
