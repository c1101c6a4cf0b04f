//! Neutral input–output relation of the PDE–ODE system.
//!
//! With `u ≡ 0` both boundary traces at `z = 0` are expressed through the
//! output (shift plus kernel convolution); inserting them into the
//! input–output relation of the boundary ODE and shifting by `τ⁻` gives the
//! raw relation
//!
//! ```text
//!   Σ c_i y⁽ⁱ⁾(t+τ̂) + Σ d_i y⁽ⁱ⁾(t) + Σ ∫₀^τ̂ w_i(s) y⁽ⁱ⁾(t+s) ds = 0,   c_n = 1.
//! ```
//!
//! [`reduce_to_canonical`] moves every term of order below `n` onto `y⁽ⁱ⁾(t)`
//! by Newton–Leibniz steps, leaving
//!
//! ```text
//!   Σ_{i<n} a_i y⁽ⁱ⁾(t) + y⁽ⁿ⁾(t+τ̂) + ∫_[0,τ̂] y⁽ⁿ⁾(t+s) dα(s) = 0.
//! ```

use crate::error::{HocfError, Result};
use crate::kernel::{KernelTable, KMM, KMP, KPM, KPP};
use crate::quad;
use crate::signal::Signal;
use crate::system::ValidatedSystem;

/// `x(1,t) = N (y(t), u(t))ᵀ`, rows `n⁻ᵀ`, `n⁺ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryMatrix {
    pub entries: [[f64; 2]; 2],
}

impl BoundaryMatrix {
    pub fn n1_minus(&self) -> f64 {
        self.entries[0][0]
    }

    pub fn n1_plus(&self) -> f64 {
        self.entries[1][0]
    }
}

pub fn boundary_matrix(sys: &ValidatedSystem) -> BoundaryMatrix {
    let m = sys.m_plus;
    BoundaryMatrix {
        entries: [
            [sys.q1 / m, (sys.b1_bar * m - sys.q1 * sys.d1) / m],
            [1.0 / m, -sys.d1 / m],
        ],
    }
}

/// Stieltjes measure of the prediction operator: point masses plus a density
/// sampled uniformly on `[0, τ̂]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMeasure {
    pub tau_hat: f64,
    /// `(location, mass)` with locations in `[0, τ̂)`.
    pub atoms: Vec<(f64, f64)>,
    pub density: Vec<f64>,
}

impl AlphaMeasure {
    pub fn step(&self) -> f64 {
        self.tau_hat / (self.density.len() - 1) as f64
    }

    pub fn density_at(&self, s: f64) -> f64 {
        quad::interp(&self.density, 0.0, self.step(), s)
    }

    /// Density on `len` uniform points of `[0, τ̂]`.
    pub fn density_on(&self, len: usize) -> Vec<f64> {
        quad::resample(&self.density, len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.density.len() < 2 {
            return Err(HocfError::GridTooCoarse {
                points: self.density.len(),
                required: 2,
            });
        }
        for &(loc, _) in &self.atoms {
            if !(0.0..self.tau_hat).contains(&loc) {
                return Err(HocfError::DomainError {
                    value: loc,
                    domain: "[0, τ̂) for atom locations",
                });
            }
        }
        Ok(())
    }

    /// Total variation of the density's antiderivative over the last
    /// `fraction` of the interval (ignores atoms, which never sit at τ̂).
    pub fn tail_variation(&self, fraction: f64) -> f64 {
        let h = self.step();
        let start = self.tau_hat * (1.0 - fraction);
        let first = ((start / h).floor() as usize).min(self.density.len() - 1);
        let tail = &self.density[first..];
        tail.windows(2)
            .map(|w| 0.5 * h * (w[0].abs() + w[1].abs()))
            .sum()
    }
}

/// Canonical neutral FDE `Σ a_i y⁽ⁱ⁾(t) + y⁽ⁿ⁾(t+τ̂) + (α * y⁽ⁿ⁾)(t) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalFDE {
    pub n: usize,
    pub tau_hat: f64,
    pub a: Vec<f64>,
    pub alpha: AlphaMeasure,
}

/// Relation before reduction; `w[i]` is sampled on `w[i].len()` uniform
/// points of `[0, τ̂]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFDE {
    pub n: usize,
    pub tau_hat: f64,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

impl RawFDE {
    pub fn samples(&self) -> usize {
        self.w[0].len()
    }
}

/// Builds the raw FDE from the kernels anchored at `z0 = 1`, with densities
/// on `samples` points.
pub fn assemble_raw_fde(
    sys: &ValidatedSystem,
    kernels: &KernelTable,
    samples: usize,
) -> Result<RawFDE> {
    if kernels.z0() != 1.0 {
        return Err(HocfError::KernelDomainError {
            z0: kernels.z0(),
            z: 1.0,
        });
    }
    if samples < 2 {
        return Err(HocfError::GridTooCoarse {
            points: samples,
            required: 2,
        });
    }
    let n = sys.n;
    let times = sys.times();
    let nb = boundary_matrix(sys);
    let (n1m, n1p) = (nb.n1_minus(), nb.n1_plus());
    let f_hat = sys.f_hat();
    let g_hat = sys.g_hat();

    let c = f_hat.clone();
    let d: Vec<f64> = g_hat.iter().map(|g| -n1m / n1p * g).collect();

    let h = times.tau_hat / (samples - 1) as f64;
    let mut kappa_minus = vec![0.0; samples];
    let mut kappa_plus = vec![0.0; samples];
    if !kernels.is_zero() {
        for k in 0..samples {
            let tau = times.tau_minus - k as f64 * h;
            let kz = kernels.eval(0.0, tau)?;
            // orientation: for z < z0 the parameterization integral runs
            // from A(z) down to −B(z)
            kappa_minus[k] = -(kz[KMM] * n1m + kz[KMP] * n1p);
            kappa_plus[k] = -(kz[KPM] * n1m + kz[KPP] * n1p);
        }
    }
    let w = (0..=n)
        .map(|i| {
            kappa_plus
                .iter()
                .zip(&kappa_minus)
                .map(|(kp, km)| (f_hat[i] * kp - g_hat[i] * km) / n1p)
                .collect()
        })
        .collect();
    Ok(RawFDE {
        n,
        tau_hat: times.tau_hat,
        c,
        d,
        w,
    })
}

/// Newton–Leibniz reduction of a raw FDE to canonical form.
///
/// A point term `c_i y⁽ⁱ⁾(t+τ̂)` becomes `c_i y⁽ⁱ⁾(t) + c_i ∫ y⁽ⁱ⁺¹⁾(t+s) ds`;
/// a density term `∫ w_i y⁽ⁱ⁾(t+s) ds` becomes
/// `W_i(0) y⁽ⁱ⁾(t) + ∫ W_i y⁽ⁱ⁺¹⁾(t+s) ds` with `W_i(s) = ∫_s^τ̂ w_i`.
pub fn reduce_to_canonical(raw: &RawFDE) -> CanonicalFDE {
    let n = raw.n;
    let lead = raw.c[n];
    let samples = raw.samples();
    let h = raw.tau_hat / (samples - 1) as f64;
    let c: Vec<f64> = raw.c.iter().map(|v| v / lead).collect();
    let mut d: Vec<f64> = raw.d.iter().map(|v| v / lead).collect();
    let mut w: Vec<Vec<f64>> = raw
        .w
        .iter()
        .map(|wi| wi.iter().map(|v| v / lead).collect())
        .collect();

    for i in 0..n {
        d[i] += c[i];
        for v in w[i + 1].iter_mut() {
            *v += c[i];
        }
        let tail = quad::cumulative_from_right(&w[i], h);
        d[i] += tail[0];
        for (v, t) in w[i + 1].iter_mut().zip(&tail) {
            *v += t;
        }
    }
    let atoms = if d[n] != 0.0 {
        vec![(0.0, d[n])]
    } else {
        Vec::new()
    };
    CanonicalFDE {
        n,
        tau_hat: raw.tau_hat,
        a: d[..n].to_vec(),
        alpha: AlphaMeasure {
            tau_hat: raw.tau_hat,
            atoms,
            density: w.swap_remove(n),
        },
    }
}

/// Generic linear FDE term collection used for residual evaluation.
struct Terms<'a> {
    future: Vec<f64>,
    now: Vec<f64>,
    densities: Vec<(usize, &'a [f64])>,
    atoms: Vec<(usize, f64, f64)>,
}

fn residual(terms: &Terms<'_>, order: usize, tau_hat: f64, y: &Signal) -> Result<Vec<f64>> {
    let needed_points = quad::MIN_DIFF_POINTS;
    if y.len() < needed_points || y.duration() < tau_hat {
        return Err(HocfError::WindowTooShort {
            needed: tau_hat,
            got: y.duration(),
        });
    }
    let dt = y.dt;
    let stack = quad::derivative_stack(&y.values, dt, order);
    let ratio = tau_hat / dt;
    let whole = (ratio + 1e-9).floor() as usize;
    let rem = tau_hat - whole as f64 * dt;
    let aligned = rem.abs() <= 1e-9 * dt.max(tau_hat);
    let wts = quad::weights(whole + 1, dt);
    let last_k = y.len() - 1 - whole - usize::from(!aligned);
    // density samples on the signal grid
    let dens: Vec<(usize, Vec<f64>)> = terms
        .densities
        .iter()
        .map(|(i, samples)| {
            let hs = tau_hat / (samples.len() - 1) as f64;
            let mut on_grid: Vec<f64> = (0..=whole)
                .map(|j| quad::interp(samples, 0.0, hs, j as f64 * dt))
                .collect();
            on_grid.push(*samples.last().unwrap());
            (*i, on_grid)
        })
        .collect();

    let mut out = Vec::with_capacity(last_k + 1);
    for k in 0..=last_k {
        let t = y.time(k);
        let at = |i: usize, s: f64| quad::interp(&stack[i], y.t0, dt, t + s);
        let mut r = 0.0;
        for (i, c) in terms.future.iter().enumerate() {
            if *c != 0.0 {
                r += c * if aligned {
                    stack[i][k + whole]
                } else {
                    at(i, tau_hat)
                };
            }
        }
        for (i, d) in terms.now.iter().enumerate() {
            r += d * stack[i][k];
        }
        for &(i, loc, mass) in &terms.atoms {
            r += mass * at(i, loc);
        }
        for (i, dv) in &dens {
            let s = &stack[*i];
            let mut acc: f64 = (0..=whole).map(|j| wts[j] * dv[j] * s[k + j]).sum();
            if !aligned {
                let left = dv[whole] * s[k + whole];
                let right = dv[whole + 1] * at(*i, tau_hat);
                acc += 0.5 * rem * (left + right);
            }
            r += acc;
        }
        out.push(r);
    }
    Ok(out)
}

fn max_abs(r: Vec<f64>) -> f64 {
    r.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Max over admissible `t` of the canonical FDE residual on sampled `y`
/// (finite-difference derivatives, cubic quadrature against the density).
pub fn fde_residual(fde: &CanonicalFDE, y: &Signal) -> Result<f64> {
    fde_residual_series(fde, y).map(max_abs)
}

/// Signed residual at each admissible sample time `y.time(k)`.
pub fn fde_residual_series(fde: &CanonicalFDE, y: &Signal) -> Result<Vec<f64>> {
    let n = fde.n;
    let mut future = vec![0.0; n + 1];
    future[n] = 1.0;
    let mut now = fde.a.clone();
    now.push(0.0);
    let terms = Terms {
        future,
        now,
        densities: vec![(n, &fde.alpha.density)],
        atoms: fde.alpha.atoms.iter().map(|&(l, m)| (n, l, m)).collect(),
    };
    residual(&terms, n, fde.tau_hat, y)
}

/// Residual of the raw (unreduced) relation, evaluated like [`fde_residual`].
pub fn raw_fde_residual(raw: &RawFDE, y: &Signal) -> Result<f64> {
    raw_fde_residual_series(raw, y).map(max_abs)
}

pub fn raw_fde_residual_series(raw: &RawFDE, y: &Signal) -> Result<Vec<f64>> {
    let terms = Terms {
        future: raw.c.clone(),
        now: raw.d.clone(),
        densities: raw
            .w
            .iter()
            .enumerate()
            .map(|(i, w)| (i, w.as_slice()))
            .collect(),
        atoms: Vec::new(),
    };
    residual(&terms, raw.n, raw.tau_hat, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CoefficientField;
    use crate::kernel::{solve_kernels, DEFAULT_TOL};
    use crate::system::{validate_system, HyperbolicSystem};
    use approx::assert_abs_diff_eq;

    fn delay_system(q1: f64, d1: f64, b1: f64, m: f64) -> ValidatedSystem {
        validate_system(HyperbolicSystem {
            sigma_minus: CoefficientField::constant(1.0),
            sigma_plus: CoefficientField::constant(1.0),
            mu_minus: CoefficientField::constant(0.0),
            mu_plus: CoefficientField::constant(0.0),
            n: 1,
            f: vec![0.0],
            g: vec![0.0],
            q0: 1.0,
            q1,
            b1_bar: b1,
            m_plus: m,
            d1,
        })
        .unwrap()
    }

    #[test]
    fn boundary_matrix_substitutions() {
        let n = boundary_matrix(&delay_system(-1.0, 1.0, 2.0, -1.0));
        assert_eq!(n.entries, [[1.0, 1.0], [-1.0, 1.0]]);
        let n = boundary_matrix(&delay_system(0.0, 0.0, 1.0, 1.0));
        assert_eq!(n.entries, [[0.0, 1.0], [1.0, 0.0]]);
        let n = boundary_matrix(&delay_system(1.0, 0.0, 0.0, 2.0));
        assert_eq!(n.entries, [[0.5, 0.0], [0.5, 0.0]]);
    }

    #[test]
    fn pure_delay_raw_fde() {
        let sys = delay_system(0.0, 0.0, 2.0, 1.0);
        let k = solve_kernels(&sys, 1.0, 16, DEFAULT_TOL).unwrap();
        let raw = assemble_raw_fde(&sys, &k, 33).unwrap();
        assert_eq!(raw.c, vec![0.0, 1.0]);
        assert!(raw.d.iter().all(|&v| v == 0.0));
        assert!(raw.w.iter().flatten().all(|&v| v == 0.0));
        let fde = reduce_to_canonical(&raw);
        assert_eq!(fde.a, vec![0.0]);
        assert!(fde.alpha.atoms.is_empty());
    }

    #[test]
    fn reduction_of_already_canonical() {
        let raw = RawFDE {
            n: 1,
            tau_hat: 2.0,
            c: vec![0.0, 1.0],
            d: vec![0.7, 0.0],
            w: vec![vec![0.0; 9], vec![0.0; 9]],
        };
        let fde = reduce_to_canonical(&raw);
        assert_eq!(fde.a, vec![0.7]);
        assert!(fde.alpha.atoms.is_empty());
        assert!(fde.alpha.density.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_newton_leibniz_step() {
        let gamma = -1.3;
        let raw = RawFDE {
            n: 1,
            tau_hat: 2.0,
            c: vec![gamma, 1.0],
            d: vec![0.0, 0.0],
            w: vec![vec![0.0; 9], vec![0.0; 9]],
        };
        let fde = reduce_to_canonical(&raw);
        assert_eq!(fde.a, vec![gamma]);
        assert!(fde.alpha.atoms.is_empty());
        assert!(fde.alpha.density.iter().all(|&v| v == gamma));
    }

    #[test]
    fn residual_of_zero_signal_and_short_window() {
        let raw = RawFDE {
            n: 1,
            tau_hat: 2.0,
            c: vec![0.5, 1.0],
            d: vec![0.1, 1.0],
            w: vec![vec![0.2; 9], vec![0.3; 9]],
        };
        let fde = reduce_to_canonical(&raw);
        let zero = Signal::new(0.0, 0.01, vec![0.0; 400]);
        assert_eq!(fde_residual(&fde, &zero).unwrap(), 0.0);
        let short = Signal::new(0.0, 0.01, vec![0.0; 100]);
        assert!(matches!(
            fde_residual(&fde, &short),
            Err(HocfError::WindowTooShort { .. })
        ));
    }

    #[test]
    fn residual_unaligned_grid_matches_aligned() {
        // y(t) = t²: canonical with a = (1), atom 1, density 1 on [0, 2]
        let fde = CanonicalFDE {
            n: 1,
            tau_hat: 2.0,
            a: vec![1.0],
            alpha: AlphaMeasure {
                tau_hat: 2.0,
                atoms: vec![(0.0, 1.0)],
                density: vec![1.0; 5],
            },
        };
        let exact = |t: f64| t * t + 2.0 * (t + 2.0) + 2.0 * t + (t + 2.0).powi(2) - t * t;
        let aligned = Signal::from_fn(0.0, 0.01, 301, |t| t * t);
        let r1 = fde_residual(&fde, &aligned).unwrap();
        assert_abs_diff_eq!(r1, exact(1.0), epsilon = 1e-8);
        let unaligned = Signal::from_fn(0.0, 0.0123, 250, |t| t * t);
        let r2 = fde_residual(&fde, &unaligned).unwrap();
        let t_last = unaligned.time(unaligned.len() - 1 - 162 - 1);
        assert_abs_diff_eq!(r2, exact(t_last), epsilon = 1e-6);
    }
}
