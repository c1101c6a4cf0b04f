//! String with a mass–spring load at `z = 0` and a force input at `z = 1`,
//! in closed form.
//!
//! Displacement `x(z,t)` obeys the wave equation; with Riemann coordinates
//! `x∓ = ∂z x ± ∂t x` and `(ξ_1, ξ_2) = (ξ, ξ̇)` the mass dynamics read
//! `m ξ̈ + k ξ = −∂z x(0,t)`. All closed forms assume `u ≡ 0`.
//!
//! Physical `ξ` and the observability coordinates used by the generic
//! pipeline are related by `ξ̄ = O_H ξ` ([`observability_basis`]).

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{HocfError, Result};
use crate::fde::{AlphaMeasure, CanonicalFDE};
use crate::field::CoefficientField;
use crate::quad;
use crate::simulator::ObservabilityState;
use crate::system::{
    to_observability_form, validate_system, HyperbolicSystem, StateSnapshot, ValidatedSystem,
};
use crate::transforms::{min_points, ObserverState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StringParams {
    pub k: f64,
    pub m: f64,
}

impl StringParams {
    pub fn new(k: f64, m: f64) -> Result<Self> {
        for (name, v) in [("k", k), ("m", m)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HocfError::DomainError {
                    value: v,
                    domain: if name == "k" {
                        "(0, ∞) for the stiffness"
                    } else {
                        "(0, ∞) for the mass"
                    },
                });
            }
        }
        Ok(Self { k, m })
    }

    /// `F`, `g`, `c0` of the mass–spring ODE in physical coordinates.
    pub fn physical_ode(&self) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
        let (k, m) = (self.k, self.m);
        (
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -k / m, 1.0 / m]),
            vec![0.0, -1.0 / m],
            vec![0.0, -2.0],
        )
    }

    /// `α′(τ) = (k/m)(2 − τ) − 1/m` on `[0, 2]`.
    pub fn density(&self, tau: f64) -> f64 {
        self.k / self.m * (2.0 - tau) - 1.0 / self.m
    }
}

pub fn observability_basis(p: &StringParams) -> Matrix2<f64> {
    Matrix2::new(0.0, -2.0, 2.0 * p.k / p.m, -2.0 / p.m)
}

pub fn to_physical_xi(p: &StringParams, xi_bar: &[f64]) -> [f64; 2] {
    let inv = observability_basis(p)
        .try_inverse()
        .expect("O_H is invertible for k > 0");
    let v = inv * Vector2::new(xi_bar[0], xi_bar[1]);
    [v[0], v[1]]
}

pub fn to_observability_xi(p: &StringParams, xi: &[f64]) -> [f64; 2] {
    let v = observability_basis(p) * Vector2::new(xi[0], xi[1]);
    [v[0], v[1]]
}

pub fn build_string_system(p: &StringParams) -> ValidatedSystem {
    let (f_mat, g, c0) = p.physical_ode();
    let form = to_observability_form(&f_mat, &g, &c0).expect("string ODE is observable");
    validate_system(HyperbolicSystem {
        sigma_minus: CoefficientField::constant(1.0),
        sigma_plus: CoefficientField::constant(1.0),
        mu_minus: CoefficientField::constant(0.0),
        mu_plus: CoefficientField::constant(0.0),
        n: 2,
        f: form.f,
        g: form.g_bar,
        q0: 1.0,
        q1: -1.0,
        b1_bar: 2.0,
        m_plus: -1.0,
        d1: 1.0,
    })
    .expect("string system satisfies the standing assumptions")
}

/// `a = (2k/m, 2k/m)`, atom `(0, 1)`, density `α′` on `samples` points.
pub fn closed_form_fde(p: &StringParams, samples: usize) -> CanonicalFDE {
    let h = 2.0 / (samples.max(2) - 1) as f64;
    let a = 2.0 * p.k / p.m;
    CanonicalFDE {
        n: 2,
        tau_hat: 2.0,
        a: vec![a, a],
        alpha: AlphaMeasure {
            tau_hat: 2.0,
            atoms: vec![(0.0, 1.0)],
            density: (0..samples.max(2))
                .map(|i| p.density(i as f64 * h))
                .collect(),
        },
    }
}

fn check_ybar(ybar: &ObservabilityState) -> Result<()> {
    if ybar.len() < min_points(2) {
        return Err(HocfError::GridTooCoarse {
            points: ybar.len(),
            required: min_points(2),
        });
    }
    if (ybar.tau_hat - 2.0).abs() > 1e-12 {
        return Err(HocfError::WindowMismatch {
            expected: 2.0,
            got: ybar.tau_hat,
        });
    }
    Ok(())
}

/// Observer coordinates by direct quadrature of
///
/// ```text
///   η_2 = ȳ(2) + ȳ(0) + ∫₀² α′ ȳ
///   η_1 = ȳ′(2) + ȳ′(0) + ∫₀² α′ ȳ′ + (2k/m) ȳ(0)
///   η_3(τ) = ȳ(2−τ) + ∫_τ² α′(s) ȳ(s−τ) ds   (+ ȳ(0) at τ = 0)
/// ```
pub fn closed_form_eta(p: &StringParams, ybar: &ObservabilityState) -> Result<ObserverState> {
    check_ybar(ybar)?;
    let len = ybar.len();
    let last = len - 1;
    let h = ybar.step();
    let y = &ybar.ybar;
    let dy = quad::derivative(y, h);
    let dens: Vec<f64> = (0..len).map(|i| p.density(i as f64 * h)).collect();
    let weighted = |v: &[f64]| {
        quad::integrate(
            &v.iter().zip(&dens).map(|(a, b)| a * b).collect::<Vec<_>>(),
            h,
        )
    };
    let eta2 = y[last] + y[0] + weighted(y);
    let eta1 = dy[last] + dy[0] + weighted(&dy) + 2.0 * p.k / p.m * y[0];
    let eta_dist = (0..len)
        .map(|j| {
            let span = last - j;
            let integrand: Vec<f64> = (0..=span).map(|m| dens[j + m] * y[m]).collect();
            let atom = if j == 0 { y[0] } else { 0.0 };
            y[span] + quad::integrate(&integrand, h) + atom
        })
        .collect();
    Ok(ObserverState {
        eta: vec![eta1, eta2],
        eta_dist,
        tau_hat: 2.0,
    })
}

/// State at `t + 1`: `x⁻(z) = ȳ(z)`, `x⁺(z) = −ȳ(2 − z)`,
/// `ξ_2 = (ȳ(0) + ȳ(2))/2`, `ξ_1 = ((ȳ(2) − ȳ(0))/2 − m(ȳ′(0) + ȳ′(2))/2)/k`,
/// with physical `ξ`.
pub fn closed_form_state_shifted(
    p: &StringParams,
    ybar: &ObservabilityState,
    nz: usize,
) -> Result<StateSnapshot> {
    check_ybar(ybar)?;
    let y = &ybar.ybar;
    let last = y.len() - 1;
    let dy = quad::derivative(y, ybar.step());
    let xi2 = 0.5 * (y[0] + y[last]);
    let xi1 = (0.5 * (y[last] - y[0]) - 0.5 * p.m * (dy[0] + dy[last])) / p.k;
    let mut snap =
        StateSnapshot::from_fns(nz, |z| ybar.at(z), |z| -ybar.at(2.0 - z), vec![xi1, xi2]);
    snap.time = 1.0;
    Ok(snap)
}

/// State at `t` with physical `ξ`.
///
/// Starts from [`closed_form_state_shifted`] and integrates
/// `m ξ̈ + ξ̇ + k ξ = ȳ(s + 1)` backwards over `s ∈ [0, 1]` with RK4;
/// `x⁻(0, s) = −ȳ(s + 1) + 2 ξ_2(s)` is recorded along the way, giving
/// `x⁻(z, t) = x⁻(0, t + z)` and `x⁺(z, t) = −ȳ(1 − z)`.
pub fn closed_form_state(
    p: &StringParams,
    ybar: &ObservabilityState,
    nz: usize,
) -> Result<StateSnapshot> {
    if nz < 2 {
        return Err(HocfError::GridTooCoarse {
            points: nz,
            required: 2,
        });
    }
    let shifted = closed_form_state_shifted(p, ybar, nz)?;
    let (k, m) = (p.k, p.m);
    let rhs = |s: f64, x: [f64; 2]| [x[1], (-k * x[0] - x[1] + ybar.at(s + 1.0)) / m];
    let dz = 1.0 / (nz - 1) as f64;
    let sub = ((dz / ybar.step()).ceil() as usize).max(1);
    let ds = dz / sub as f64;

    let mut xi = [shifted.xi[0], shifted.xi[1]];
    let mut x_minus = vec![0.0; nz];
    x_minus[nz - 1] = -ybar.at(2.0) + 2.0 * xi[1];
    for i in (0..nz - 1).rev() {
        for q in (0..sub).rev() {
            let s = i as f64 * dz + (q + 1) as f64 * ds;
            // one RK4 step from s to s − ds
            let k1 = rhs(s, xi);
            let k2 = rhs(
                s - 0.5 * ds,
                [xi[0] - 0.5 * ds * k1[0], xi[1] - 0.5 * ds * k1[1]],
            );
            let k3 = rhs(
                s - 0.5 * ds,
                [xi[0] - 0.5 * ds * k2[0], xi[1] - 0.5 * ds * k2[1]],
            );
            let k4 = rhs(s - ds, [xi[0] - ds * k3[0], xi[1] - ds * k3[1]]);
            for c in 0..2 {
                xi[c] -= ds / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        }
        x_minus[i] = -ybar.at(i as f64 * dz + 1.0) + 2.0 * xi[1];
    }
    let x_plus = (0..nz).map(|i| -ybar.at(1.0 - i as f64 * dz)).collect();
    Ok(StateSnapshot {
        x_minus,
        x_plus,
        xi: xi.to_vec(),
        time: 0.0,
    })
}

/// Riemann coordinates from slope and velocity profiles; `xi = (ξ, ξ̇)`.
pub fn physical_to_riemann(dz_x: &[f64], dt_x: &[f64], xi: [f64; 2]) -> Result<StateSnapshot> {
    if dz_x.len() != dt_x.len() || dz_x.len() < 2 {
        return Err(HocfError::GridError(format!(
            "slope has {} samples, velocity has {}",
            dz_x.len(),
            dt_x.len()
        )));
    }
    Ok(StateSnapshot {
        x_minus: dz_x.iter().zip(dt_x).map(|(a, b)| a + b).collect(),
        x_plus: dz_x.iter().zip(dt_x).map(|(a, b)| a - b).collect(),
        xi: xi.to_vec(),
        time: 0.0,
    })
}

/// Displacement `x(z) = ξ + ∫₀^z (x⁻ + x⁺)/2`; expects physical `ξ`.
pub fn riemann_to_physical(snap: &StateSnapshot) -> Result<Vec<f64>> {
    snap.check()?;
    if snap.xi.is_empty() {
        return Err(HocfError::GridError("snapshot carries no ODE state".into()));
    }
    let slope: Vec<f64> = snap
        .x_minus
        .iter()
        .zip(&snap.x_plus)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    Ok(quad::cumulative(&slope, snap.dz())
        .into_iter()
        .map(|v| v + snap.xi[0])
        .collect())
}

/// `½ m ξ̇² + ½ k ξ² + ¼ ∫ (x⁻² + x⁺²) dz` for a snapshot with physical `ξ`.
pub fn energy(p: &StringParams, snap: &StateSnapshot) -> f64 {
    let w = quad::weights(snap.nz(), snap.dz());
    let dist: f64 = w
        .iter()
        .zip(snap.x_minus.iter().zip(&snap.x_plus))
        .map(|(w, (a, b))| w * (a * a + b * b))
        .sum();
    0.5 * p.m * snap.xi[1].powi(2) + 0.5 * p.k * snap.xi[0].powi(2) + 0.25 * dist
}

/// `¼ ∫ (x⁻² + x⁺²) dz − ½ m ξ̇² − ½ k ξ²`: conserved by the free (`u ≡ 0`)
/// dynamics, since string and load exchange power `−ξ̇ ∂z x(0)` with equal
/// sign.
pub fn conserved_quantity(p: &StringParams, snap: &StateSnapshot) -> f64 {
    let mech = 0.5 * p.m * snap.xi[1].powi(2) + 0.5 * p.k * snap.xi[0].powi(2);
    energy(p, snap) - 2.0 * mech
}
