//! Maps between observability coordinates `ȳ`, observer coordinates `η`, and
//! the original state.
//!
//! ```text
//!   η_{n−i}  = ȳ⁽ⁱ⁾(τ̂) + ∫_[0,τ̂] ȳ⁽ⁱ⁾(s) dα(s) + Σ_{j=1}^{i} a_{n−j} ȳ⁽ⁱ⁻ʲ⁾(0),  i < n
//!   η_{n+1}(τ) = ȳ(τ̂−τ) + ∫_[τ,τ̂] ȳ(s−τ) dα(s)
//! ```
//!
//! The second line is a triangular Volterra relation in `ȳ`; discretized with
//! the same quadrature in both directions it is inverted exactly by
//! marching `τ` from `τ̂` down to 0. Atoms of `α` are snapped to the nearest
//! grid node.

use serde::{Deserialize, Serialize};

use crate::error::{HocfError, Result};
use crate::fde::{boundary_matrix, CanonicalFDE};
use crate::kernel::{kernel_convolve, KernelTable, KMM, KMP, KPM, KPP};
use crate::quad;
use crate::signal::Signal;
use crate::simulator::{simulate_backward, ObservabilityState};
use crate::system::{StateSnapshot, ValidatedSystem};

/// Observer coordinates: the integrator chain `η_1..η_n` and the transported
/// `η_{n+1}` sampled uniformly on `[0, τ̂]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverState {
    pub eta: Vec<f64>,
    pub eta_dist: Vec<f64>,
    pub tau_hat: f64,
}

impl ObserverState {
    pub fn zeros(n: usize, points: usize, tau_hat: f64) -> Self {
        Self {
            eta: vec![0.0; n],
            eta_dist: vec![0.0; points],
            tau_hat,
        }
    }

    pub fn step(&self) -> f64 {
        self.tau_hat / (self.eta_dist.len() - 1) as f64
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.eta_dist.len()).map(|i| i as f64 * h).collect()
    }
}

/// Smallest `ȳ` grid accepted for order-`n` differentiation.
pub fn min_points(n: usize) -> usize {
    (8 * n).max(quad::MIN_DIFF_POINTS)
}

fn check_window(fde_tau: f64, ybar: &ObservabilityState, n: usize) -> Result<()> {
    if ybar.len() < min_points(n) {
        return Err(HocfError::GridTooCoarse {
            points: ybar.len(),
            required: min_points(n),
        });
    }
    if (ybar.tau_hat - fde_tau).abs() > 1e-9 * fde_tau.max(1.0) {
        return Err(HocfError::WindowMismatch {
            expected: fde_tau,
            got: ybar.tau_hat,
        });
    }
    Ok(())
}

/// Atom locations snapped to node indices of a grid with step `h`.
fn snapped_atoms(fde: &CanonicalFDE, last: usize, h: f64) -> Vec<(usize, f64)> {
    fde.alpha
        .atoms
        .iter()
        .map(|&(loc, mass)| (((loc / h).round() as usize).min(last - 1), mass))
        .collect()
}

pub fn obs_to_observer(fde: &CanonicalFDE, ybar: &ObservabilityState) -> Result<ObserverState> {
    let n = fde.n;
    check_window(fde.tau_hat, ybar, n)?;
    let len = ybar.len();
    let last = len - 1;
    let h = ybar.step();
    let dens = fde.alpha.density_on(len);
    let stack = quad::derivative_stack(&ybar.ybar, h, n);
    let full = quad::weights(len, h);

    let mut eta = vec![0.0; n];
    for i in 0..n {
        let s = &stack[i];
        let mut v = s[last];
        for &(loc, mass) in &fde.alpha.atoms {
            v += mass * quad::interp(s, 0.0, h, loc);
        }
        v += (0..len).map(|j| full[j] * dens[j] * s[j]).sum::<f64>();
        for j in 1..=i {
            v += fde.a[n - j] * stack[i - j][0];
        }
        eta[n - 1 - i] = v;
    }

    let atoms = snapped_atoms(fde, last, h);
    let y = &ybar.ybar;
    let eta_dist = (0..len)
        .map(|j| {
            let span = last - j;
            let w = quad::weights(span + 1, h);
            let mut v = y[span];
            v += (0..=span).map(|m| w[m] * y[m] * dens[j + m]).sum::<f64>();
            for &(p, mass) in &atoms {
                if p >= j {
                    v += mass * y[p - j];
                }
            }
            v
        })
        .collect();
    Ok(ObserverState {
        eta,
        eta_dist,
        tau_hat: fde.tau_hat,
    })
}

/// Inverts the `η_{n+1}` relation for `ȳ` on the grid of `eta.eta_dist`.
pub fn observer_to_obs(fde: &CanonicalFDE, eta: &ObserverState) -> Result<ObservabilityState> {
    let len = eta.eta_dist.len();
    if len < 2 {
        return Err(HocfError::GridTooCoarse {
            points: len,
            required: 2,
        });
    }
    let last = len - 1;
    let h = eta.step();
    let dens = fde.alpha.density_on(len);
    let atoms = snapped_atoms(fde, last, h);
    let mut y = vec![0.0; len];
    for j in (0..len).rev() {
        let span = last - j;
        let w = quad::weights(span + 1, h);
        let mut known = eta.eta_dist[j];
        known -= (0..span).map(|m| w[m] * y[m] * dens[j + m]).sum::<f64>();
        for &(p, mass) in &atoms {
            if p >= j {
                known -= mass * y[p - j];
            }
        }
        let pivot = 1.0 + w[span] * dens[last];
        if pivot.abs() < 1e-12 {
            return Err(HocfError::SingularMarch { tau: j as f64 * h });
        }
        y[span] = known / pivot;
    }
    Ok(ObservabilityState {
        tau_hat: eta.tau_hat,
        ybar: y,
        smoothness_order: 0,
    })
}

/// Time derivatives `d^i/dt^i` of both boundary traces at `z = 0`, at time
/// `t + τ⁻`, from the output window (zero input).
fn boundary_stacks(
    sys: &ValidatedSystem,
    kernels: &KernelTable,
    ybar: &ObservabilityState,
    order: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nb = boundary_matrix(sys);
    let (n1m, n1p) = (nb.n1_minus(), nb.n1_plus());
    let h = ybar.step();
    let len = ybar.len();
    let last = len - 1;
    let tau_minus = sys.times().tau_minus;
    let stack = quad::derivative_stack(&ybar.ybar, h, order);
    let w = quad::weights(len, h);

    let mut kappa = None;
    if !kernels.is_zero() {
        let mut km = vec![0.0; len];
        let mut kp = vec![0.0; len];
        for j in 0..len {
            let kz = kernels.eval(0.0, tau_minus - j as f64 * h)?;
            km[j] = -(kz[KMM] * n1m + kz[KMP] * n1p);
            kp[j] = -(kz[KPM] * n1m + kz[KPP] * n1p);
        }
        kappa = Some((km, kp));
    }
    let mut minus = Vec::with_capacity(order + 1);
    let mut plus = Vec::with_capacity(order + 1);
    for s in &stack {
        let mut xm = n1m * s[0];
        let mut xp = n1p * s[last];
        if let Some((km, kp)) = &kappa {
            for j in 0..len {
                xm += w[j] * km[j] * s[j];
                xp += w[j] * kp[j] * s[j];
            }
        }
        minus.push(xm);
        plus.push(xp);
    }
    Ok((minus, plus))
}

/// State at `t + τ⁻` from the output window `ȳ(τ) = y(t+τ)` (zero input),
/// sampled on `nz` nodes. `ξ` is returned in the coordinates of `sys`.
pub fn parameterize_state_shifted(
    sys: &ValidatedSystem,
    kernels: &KernelTable,
    ybar: &ObservabilityState,
    nz: usize,
) -> Result<StateSnapshot> {
    let n = sys.n;
    let times = sys.times();
    check_window(times.tau_hat, ybar, n)?;
    if kernels.z0() != 1.0 {
        return Err(HocfError::KernelDomainError {
            z0: kernels.z0(),
            z: 1.0,
        });
    }
    if nz < 2 {
        return Err(HocfError::GridTooCoarse {
            points: nz,
            required: 2,
        });
    }
    let nb = boundary_matrix(sys);
    let (n1m, n1p) = (nb.n1_minus(), nb.n1_plus());
    let t_shift = times.tau_minus;
    let dz = 1.0 / (nz - 1) as f64;

    let mut snap = StateSnapshot::zeros(nz, n);
    snap.time = t_shift;
    let trace_m = Signal::new(
        0.0,
        ybar.step(),
        ybar.ybar.iter().map(|v| n1m * v).collect(),
    );
    let trace_p = Signal::new(
        0.0,
        ybar.step(),
        ybar.ybar.iter().map(|v| n1p * v).collect(),
    );
    for i in 0..nz {
        let z = i as f64 * dz;
        let a = sys.sigma_minus.integral(z, 1.0);
        let b = sys.sigma_plus.integral(z, 1.0);
        snap.x_minus[i] = n1m * ybar.at(t_shift - a);
        snap.x_plus[i] = n1p * ybar.at(t_shift + b);
        if !kernels.is_zero() {
            let (cm, cp) = kernel_convolve(kernels, z, &trace_m, &trace_p, &[t_shift])?;
            snap.x_minus[i] += cm[0];
            snap.x_plus[i] += cp[0];
        }
    }

    // ξ_{r+1} = x⁺⁽ʳ⁾(0) − Σ_c (D_H)_{rc} x⁻⁽ᶜ⁾(0)
    let (minus, plus) = boundary_stacks(sys, kernels, ybar, n - 1)?;
    let dh = sys.d_h();
    for r in 0..n {
        let coupling: f64 = (0..=r).map(|c| dh[(r, c)] * minus[c]).sum();
        snap.xi[r] = plus[r] - coupling;
    }
    Ok(snap)
}

/// State at `t` from the output window: the shifted state at `t + τ⁻`,
/// marched back with `ȳ` restricted to `[0, τ⁻]` as the boundary record.
pub fn obs_to_state(
    sys: &ValidatedSystem,
    kernels: &KernelTable,
    ybar: &ObservabilityState,
    nz: usize,
) -> Result<StateSnapshot> {
    let shifted = parameterize_state_shifted(sys, kernels, ybar, nz)?;
    let tau_minus = sys.times().tau_minus;
    let points = ((tau_minus / ybar.step() - 1e-9).ceil() as usize).max(1) + 1;
    let dt = tau_minus / (points - 1) as f64;
    let window = Signal::from_fn(0.0, dt, points, |t| ybar.at(t));
    let mut state = simulate_backward(sys, &shifted, &window)?;
    state.time = 0.0;
    Ok(state)
}
