//! Upwind marching of the PDE–ODE system, forward and in reverse time.
//!
//! Both transport components are advanced with first-order upwind
//! differences on a uniform grid of `[0, 1]`; the boundary ODE uses explicit
//! Euler with the same step. The time step is
//! `dt = 0.9 · dz · min_z min(σ⁻, σ⁺)`, shrunk so that the horizon is an
//! integer number of steps.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{HocfError, Result};
use crate::signal::Signal;
use crate::system::{StateSnapshot, ValidatedSystem};

pub const CFL_SAFETY: f64 = 0.9;
pub const MIN_NODES: usize = 4;

/// Boundary input `u(t)`.
pub enum Input<'a> {
    Zero,
    /// Samples held constant between sample times.
    Sampled(Signal),
    Function(&'a dyn Fn(f64) -> f64),
}

impl fmt::Debug for Input<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Input::Zero => write!(f, "Input::Zero"),
            Input::Sampled(s) => write!(f, "Input::Sampled({} samples)", s.len()),
            Input::Function(_) => write!(f, "Input::Function"),
        }
    }
}

impl Input<'_> {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Input::Zero => 0.0,
            Input::Sampled(s) => s.hold(t),
            Input::Function(f) => f(t),
        }
    }
}

/// Time-indexed output of [`simulate_forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    /// ODE state per time.
    pub xi: Vec<Vec<f64>>,
    /// Full snapshots at every `frame_stride`-th step (and the last step).
    pub frames: Vec<StateSnapshot>,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn output(&self) -> Signal {
        Signal::new(self.times[0], self.dt(), self.y.clone())
    }

    pub fn final_state(&self) -> &StateSnapshot {
        self.frames
            .last()
            .expect("trajectory always keeps the final frame")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Keep every `frame_stride`-th snapshot; 0 keeps only the first and last.
    pub frame_stride: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { frame_stride: 1 }
    }
}

/// Samples of the output window `ȳ(τ) = y(t + τ)`, `τ ∈ [0, τ̂]`, on a
/// uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityState {
    pub tau_hat: f64,
    pub ybar: Vec<f64>,
    /// Claimed weak-differentiability order of the samples (0 = unknown).
    pub smoothness_order: usize,
}

impl ObservabilityState {
    pub fn from_fn(tau_hat: f64, points: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = tau_hat / (points - 1) as f64;
        Self {
            tau_hat,
            ybar: (0..points).map(|i| f(i as f64 * h)).collect(),
            smoothness_order: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.ybar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ybar.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.tau_hat / (self.ybar.len() - 1) as f64
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.ybar.len()).map(|i| i as f64 * h).collect()
    }

    pub fn at(&self, tau: f64) -> f64 {
        crate::quad::interp(&self.ybar, 0.0, self.step(), tau)
    }

    /// The window as a signal starting at `t0`.
    pub fn as_signal(&self, t0: f64) -> Signal {
        Signal::new(t0, self.step(), self.ybar.clone())
    }
}

/// Node values of the coefficients on the simulation grid.
struct Coefficients {
    sigma_minus: Vec<f64>,
    sigma_plus: Vec<f64>,
    mu_minus: Vec<f64>,
    mu_plus: Vec<f64>,
    dz: f64,
}

impl Coefficients {
    fn new(sys: &ValidatedSystem, nz: usize) -> Self {
        let dz = 1.0 / (nz - 1) as f64;
        let sample = |f: &crate::field::CoefficientField| -> Vec<f64> {
            (0..nz).map(|i| f.eval(i as f64 * dz)).collect()
        };
        Self {
            sigma_minus: sample(&sys.sigma_minus),
            sigma_plus: sample(&sys.sigma_plus),
            mu_minus: sample(&sys.mu_minus),
            mu_plus: sample(&sys.mu_plus),
            dz,
        }
    }

    /// Stable time step; the grid minimum also covers the coefficient
    /// breakpoints.
    fn max_dt(&self, sys: &ValidatedSystem) -> f64 {
        let node_min = self
            .sigma_minus
            .iter()
            .chain(&self.sigma_plus)
            .copied()
            .fold(f64::INFINITY, f64::min);
        let sigma_min = node_min
            .min(sys.sigma_minus.min_value())
            .min(sys.sigma_plus.min_value());
        CFL_SAFETY * self.dz * sigma_min
    }
}

fn steps_for(duration: f64, max_dt: f64) -> (usize, f64) {
    let steps = ((duration / max_dt) - 1e-9).ceil().max(1.0) as usize;
    (steps, duration / steps as f64)
}

/// `ξ̇ = F ξ + g x⁻(0)` with `F` the companion matrix of `sys`.
fn ode_rhs(sys: &ValidatedSystem, xi: &[f64], x_minus0: f64) -> Vec<f64> {
    let n = sys.n;
    let mut d = vec![0.0; n];
    d[..n - 1].copy_from_slice(&xi[1..]);
    d[n - 1] = -sys.f.iter().zip(xi).map(|(f, x)| f * x).sum::<f64>();
    for (di, gi) in d.iter_mut().zip(&sys.g) {
        *di += gi * x_minus0;
    }
    d
}

fn check_nodes(nz: usize) -> Result<()> {
    if nz < MIN_NODES {
        return Err(HocfError::ResolutionError(format!(
            "spatial grid needs at least {MIN_NODES} nodes, got {nz}"
        )));
    }
    Ok(())
}

/// Forward simulation keeping every snapshot.
pub fn simulate_forward(
    sys: &ValidatedSystem,
    x0: &StateSnapshot,
    u: &Input<'_>,
    t_end: f64,
    nz: usize,
) -> Result<Trajectory> {
    simulate_forward_with(sys, x0, u, t_end, nz, SimOptions::default())
}

pub fn simulate_forward_with(
    sys: &ValidatedSystem,
    x0: &StateSnapshot,
    u: &Input<'_>,
    t_end: f64,
    nz: usize,
    opts: SimOptions,
) -> Result<Trajectory> {
    check_nodes(nz)?;
    x0.check()?;
    if !(t_end > 0.0) {
        return Err(HocfError::DomainError {
            value: t_end,
            domain: "(0, ∞) for the horizon",
        });
    }
    if x0.xi.len() != sys.n {
        return Err(HocfError::DimensionMismatch(format!(
            "initial ODE state has {} entries, system order is {}",
            x0.xi.len(),
            sys.n
        )));
    }
    let coef = Coefficients::new(sys, nz);
    let (steps, dt) = steps_for(t_end, coef.max_dt(sys));
    let t_start = x0.time;
    let last = nz - 1;
    let dz = coef.dz;

    let mut state = if x0.nz() == nz {
        x0.clone()
    } else {
        x0.resampled(nz)
    };
    state.time = t_start;

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        y: Vec::with_capacity(steps + 1),
        u: Vec::with_capacity(steps + 1),
        xi: Vec::with_capacity(steps + 1),
        frames: Vec::new(),
    };
    let record = |traj: &mut Trajectory, state: &StateSnapshot, k: usize, uk: f64| {
        traj.times.push(state.time);
        traj.u.push(uk);
        traj.y.push(sys.m_plus * state.x_plus[last] + sys.d1 * uk);
        traj.xi.push(state.xi.clone());
        let keep =
            k == 0 || k == steps || (opts.frame_stride > 0 && k.is_multiple_of(opts.frame_stride));
        if keep {
            traj.frames.push(state.clone());
        }
    };
    record(&mut traj, &state, 0, u.at(t_start));

    let mut xm = vec![0.0; nz];
    let mut xp = vec![0.0; nz];
    for k in 1..=steps {
        let t_new = t_start + k as f64 * dt;
        let (sm, sp, mm, mp) = (
            &coef.sigma_minus,
            &coef.sigma_plus,
            &coef.mu_minus,
            &coef.mu_plus,
        );
        let (om, op) = (&state.x_minus, &state.x_plus);
        for i in 0..last {
            xm[i] = om[i] + dt / sm[i] * ((om[i + 1] - om[i]) / dz - mm[i] * op[i]);
        }
        for i in 1..nz {
            xp[i] = op[i] + dt / sp[i] * (-(op[i] - op[i - 1]) / dz + mp[i] * om[i]);
        }
        let rhs = ode_rhs(sys, &state.xi, om[0]);
        for (x, d) in state.xi.iter_mut().zip(rhs) {
            *x += dt * d;
        }
        let u_new = u.at(t_new);
        xm[last] = sys.q1 * xp[last] + sys.b1_bar * u_new;
        xp[0] = state.xi[0] + sys.q0 * xm[0];

        std::mem::swap(&mut state.x_minus, &mut xm);
        std::mem::swap(&mut state.x_plus, &mut xp);
        state.time = t_new;
        record(&mut traj, &state, k, u_new);
    }
    Ok(traj)
}

/// Reverse-time march from `x_end` (at `y_window.t0 + τ⁻`) to `y_window.t0`,
/// with inflow `x⁺(1,·) = y/m⁺` (zero input) and `x⁻(0,·)` recovered from the
/// boundary coupling as `(x⁺(0,·) − ξ_1)/q0`.
pub fn simulate_backward(
    sys: &ValidatedSystem,
    x_end: &StateSnapshot,
    y_window: &Signal,
) -> Result<StateSnapshot> {
    x_end.check()?;
    let nz = x_end.nz();
    check_nodes(nz)?;
    if x_end.xi.len() != sys.n {
        return Err(HocfError::DimensionMismatch(format!(
            "ODE state has {} entries, system order is {}",
            x_end.xi.len(),
            sys.n
        )));
    }
    let tau_minus = sys.times().tau_minus;
    if y_window.len() < 2 || (y_window.duration() - tau_minus).abs() > y_window.dt * (1.0 + 1e-9) {
        return Err(HocfError::WindowMismatch {
            expected: tau_minus,
            got: if y_window.len() < 2 {
                0.0
            } else {
                y_window.duration()
            },
        });
    }
    let coef = Coefficients::new(sys, nz);
    let (steps, dt) = steps_for(tau_minus, coef.max_dt(sys));
    let t0 = y_window.t0;
    let last = nz - 1;
    let dz = coef.dz;

    let mut state = x_end.clone();
    let mut xm = vec![0.0; nz];
    let mut xp = vec![0.0; nz];
    for k in (0..steps).rev() {
        let t_prev = t0 + k as f64 * dt;
        let (sm, sp, mm, mp) = (
            &coef.sigma_minus,
            &coef.sigma_plus,
            &coef.mu_minus,
            &coef.mu_plus,
        );
        let (om, op) = (&state.x_minus, &state.x_plus);
        // In reverse time x⁻ travels towards z = 1 and x⁺ towards z = 0.
        for i in 1..nz {
            xm[i] = om[i] - dt / sm[i] * ((om[i] - om[i - 1]) / dz - mm[i] * op[i]);
        }
        for i in 0..last {
            xp[i] = op[i] + dt / sp[i] * ((op[i + 1] - op[i]) / dz - mp[i] * om[i]);
        }
        let rhs = ode_rhs(sys, &state.xi, om[0]);
        for (x, d) in state.xi.iter_mut().zip(rhs) {
            *x -= dt * d;
        }
        xp[last] = y_window.at(t_prev) / sys.m_plus;
        xm[0] = (xp[0] - state.xi[0]) / sys.q0;

        std::mem::swap(&mut state.x_minus, &mut xm);
        std::mem::swap(&mut state.x_plus, &mut xp);
        state.time = t_prev;
    }
    Ok(state)
}

/// `ȳ(τ) = y(τ)` for the free response (`u ≡ 0`) from `x0` over `[0, τ̂]`,
/// resampled onto `nt` points.
pub fn observability_map(
    sys: &ValidatedSystem,
    x0: &StateSnapshot,
    nt: usize,
) -> Result<ObservabilityState> {
    if nt < 2 {
        return Err(HocfError::ResolutionError(format!(
            "observability window needs at least 2 samples, got {nt}"
        )));
    }
    let tau_hat = sys.times().tau_hat;
    let mut start = x0.clone();
    start.time = 0.0;
    let traj = simulate_forward_with(
        sys,
        &start,
        &Input::Zero,
        tau_hat,
        x0.nz(),
        SimOptions { frame_stride: 0 },
    )?;
    let y = traj.output();
    let h = tau_hat / (nt - 1) as f64;
    Ok(ObservabilityState {
        tau_hat,
        ybar: (0..nt).map(|i| y.at(i as f64 * h)).collect(),
        smoothness_order: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CoefficientField;
    use crate::system::{validate_system, HyperbolicSystem};

    fn pure_delay() -> ValidatedSystem {
        validate_system(HyperbolicSystem {
            sigma_minus: CoefficientField::constant(1.0),
            sigma_plus: CoefficientField::constant(1.0),
            mu_minus: CoefficientField::constant(0.0),
            mu_plus: CoefficientField::constant(0.0),
            n: 1,
            f: vec![0.0],
            g: vec![0.0],
            q0: 1.0,
            q1: 0.0,
            b1_bar: 2.0,
            m_plus: 1.0,
            d1: 0.0,
        })
        .unwrap()
    }

    #[test]
    fn zero_state_is_equilibrium() {
        let sys = pure_delay();
        let traj =
            simulate_forward(&sys, &StateSnapshot::zeros(16, 1), &Input::Zero, 3.0, 16).unwrap();
        assert!(traj.y.iter().all(|&v| v == 0.0));
        assert!(traj.frames.iter().all(|f| f.l2_norm() == 0.0));
    }

    #[test]
    fn rejects_coarse_grid() {
        let sys = pure_delay();
        let err = simulate_forward(&sys, &StateSnapshot::zeros(3, 1), &Input::Zero, 1.0, 3);
        assert!(matches!(err, Err(HocfError::ResolutionError(_))));
    }

    #[test]
    fn unit_step_arrives_after_round_trip() {
        let sys = pure_delay();
        let nz = 201;
        let step = |t: f64| if t >= 0.0 { 1.0 } else { 0.0 };
        let traj = simulate_forward(
            &sys,
            &StateSnapshot::zeros(nz, 1),
            &Input::Function(&step),
            4.0,
            nz,
        )
        .unwrap();
        let y = traj.output();
        // smeared front around t = 2; well away from it the value is exact-ish
        assert!(y.at(1.7).abs() < 1e-3);
        assert!((y.at(2.3) - 2.0).abs() < 1e-3);
        assert!((y.at(3.9) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_identities_hold_every_step() {
        let sys = pure_delay();
        let x0 = StateSnapshot::from_fns(33, |z| z.sin(), |z| z.cos(), vec![0.3]);
        let u = |t: f64| (3.0 * t).sin();
        let traj = simulate_forward(&sys, &x0, &Input::Function(&u), 2.0, 33).unwrap();
        for (k, f) in traj.frames.iter().enumerate().skip(1) {
            let last = f.nz() - 1;
            assert_eq!(
                f.x_minus[last],
                sys.q1 * f.x_plus[last] + sys.b1_bar * traj.u[k]
            );
            assert_eq!(f.x_plus[0], f.xi[0] + sys.q0 * f.x_minus[0]);
            assert_eq!(traj.y[k], sys.m_plus * f.x_plus[last] + sys.d1 * traj.u[k]);
        }
    }

    #[test]
    fn backward_of_zero_is_zero() {
        let sys = pure_delay();
        let window = Signal::new(0.0, 0.01, vec![0.0; 101]);
        let x = simulate_backward(&sys, &StateSnapshot::zeros(32, 1), &window).unwrap();
        assert_eq!(x.l2_norm(), 0.0);
    }

    #[test]
    fn backward_rejects_wrong_window() {
        let sys = pure_delay();
        let window = Signal::new(0.0, 0.01, vec![0.0; 51]);
        let err = simulate_backward(&sys, &StateSnapshot::zeros(32, 1), &window).unwrap_err();
        assert!(matches!(err, HocfError::WindowMismatch { .. }));
    }

    #[test]
    fn observability_map_starts_at_output_trace() {
        let sys = pure_delay();
        let x0 = StateSnapshot::from_fns(65, |_| 0.0, |z| 1.0 + z, vec![0.0]);
        let ybar = observability_map(&sys, &x0, 101).unwrap();
        assert_eq!(ybar.ybar[0], sys.m_plus * 2.0);
        assert_eq!(ybar.len(), 101);
    }
}
