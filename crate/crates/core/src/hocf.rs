//! Simulation of the observer canonical form
//!
//! ```text
//!   η̇_1 = −a_0 y,   η̇_i = η_{i−1} − a_{i−1} y          (i = 2..n)
//!   ∂t η_{n+1} + ∂τ η_{n+1} = −α′(τ) y,   τ ∈ (0, τ̂]
//!   η_{n+1}(0, t) = η_n(t),   y(t) = η_{n+1}(τ̂, t)
//! ```
//!
//! The atom of `α` at `τ = 0` enters as a jump at the inflow: just inside the
//! domain the transported state is `η_n − α({0}) y`. The transport uses
//! first-order upwinding with `dt = 0.9 h`, the chain explicit Euler.

use crate::error::{HocfError, Result};
use crate::fde::CanonicalFDE;
use crate::quad;
use crate::transforms::ObserverState;

const CFL: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct HocfSystem {
    pub fde: CanonicalFDE,
}

impl HocfSystem {
    pub fn new(fde: CanonicalFDE) -> Result<Self> {
        fde.alpha.validate()?;
        Ok(Self { fde })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HocfTrajectory {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    /// Chain state `η_1..η_n` per time.
    pub eta: Vec<Vec<f64>>,
    pub final_state: ObserverState,
}

impl HocfTrajectory {
    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn output(&self) -> crate::signal::Signal {
        crate::signal::Signal::new(self.times[0], self.dt(), self.y.clone())
    }
}

/// Simulates the HOCF on `[0, t_end]` with `resolution` intervals on
/// `[0, τ̂]`; `eta0.eta_dist` is resampled onto that grid if needed.
pub fn simulate_hocf(
    hocf: &HocfSystem,
    eta0: &ObserverState,
    t_end: f64,
    resolution: usize,
) -> Result<HocfTrajectory> {
    let fde = &hocf.fde;
    let n = fde.n;
    if resolution < 2 {
        return Err(HocfError::ResolutionError(format!(
            "observer grid needs at least 2 intervals, got {resolution}"
        )));
    }
    if !(t_end > 0.0) {
        return Err(HocfError::DomainError {
            value: t_end,
            domain: "(0, ∞) for the horizon",
        });
    }
    if eta0.eta.len() != n || eta0.eta_dist.len() < 2 {
        return Err(HocfError::DimensionMismatch(format!(
            "observer state has {} chain entries and {} samples, order is {n}",
            eta0.eta.len(),
            eta0.eta_dist.len()
        )));
    }
    let mut inflow_jump = 0.0;
    for &(loc, mass) in &fde.alpha.atoms {
        if loc != 0.0 {
            return Err(HocfError::DomainError {
                value: loc,
                domain: "{0} for atoms of a simulated observer form",
            });
        }
        inflow_jump += mass;
    }

    let len = resolution + 1;
    let last = resolution;
    let h = fde.tau_hat / resolution as f64;
    let dens = fde.alpha.density_on(len);
    let steps = ((t_end / (CFL * h)) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let c = dt / h;

    let mut chain = eta0.eta.clone();
    let mut dist = quad::resample(&eta0.eta_dist, len);
    let mut next = vec![0.0; len];
    let mut traj = HocfTrajectory {
        times: Vec::with_capacity(steps + 1),
        y: Vec::with_capacity(steps + 1),
        eta: Vec::with_capacity(steps + 1),
        final_state: ObserverState::zeros(n, len, fde.tau_hat),
    };
    for k in 0..=steps {
        let y = dist[last];
        traj.times.push(k as f64 * dt);
        traj.y.push(y);
        traj.eta.push(chain.clone());
        if k == steps {
            break;
        }
        let inflow = chain[n - 1] - inflow_jump * y;
        next[1] = dist[1] - c * (dist[1] - inflow) - dt * dens[1] * y;
        for j in 2..len {
            next[j] = dist[j] - c * (dist[j] - dist[j - 1]) - dt * dens[j] * y;
        }
        for i in (1..n).rev() {
            chain[i] += dt * (chain[i - 1] - fde.a[i] * y);
        }
        chain[0] -= dt * fde.a[0] * y;
        next[0] = chain[n - 1];
        std::mem::swap(&mut dist, &mut next);
    }
    traj.final_state = ObserverState {
        eta: chain,
        eta_dist: dist,
        tau_hat: fde.tau_hat,
    };
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fde::AlphaMeasure;

    fn free(n: usize, tau_hat: f64) -> HocfSystem {
        HocfSystem::new(CanonicalFDE {
            n,
            tau_hat,
            a: vec![0.0; n],
            alpha: AlphaMeasure {
                tau_hat,
                atoms: Vec::new(),
                density: vec![0.0; 5],
            },
        })
        .unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let sys = free(2, 2.0);
        let traj = simulate_hocf(&sys, &ObserverState::zeros(2, 33, 2.0), 5.0, 64).unwrap();
        assert!(traj.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn source_free_readout_is_a_shift() {
        let sys = free(1, 2.0);
        let phi = |tau: f64| (1.5 * tau).sin() + 0.2;
        let res = 400;
        let h = 2.0 / res as f64;
        let eta0 = ObserverState {
            eta: vec![phi(0.0)],
            eta_dist: (0..=res).map(|j| phi(j as f64 * h)).collect(),
            tau_hat: 2.0,
        };
        let traj = simulate_hocf(&sys, &eta0, 1.9, res).unwrap();
        let err = traj
            .times
            .iter()
            .zip(&traj.y)
            .map(|(t, y)| (y - phi(2.0 - t)).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.02, "err {err}");
    }

    #[test]
    fn rejects_bad_resolution() {
        let sys = free(1, 1.0);
        assert!(matches!(
            simulate_hocf(&sys, &ObserverState::zeros(1, 9, 1.0), 1.0, 1),
            Err(HocfError::ResolutionError(_))
        ));
    }
}
