//! Kernels of the trace parameterization
//!
//! ```text
//!   x(z,·) = Δ_{z0}(z) x(z0,·) + ∫_{−γ⁻(z;z0)}^{γ⁺(z;z0)} k(z,τ) x(z0, · − τ) dτ
//! ```
//!
//! on the domain of influence of `(z0, 0)`, for `z ∈ [0, z0]`. The integral
//! is oriented: for `z < z0` its lower bound exceeds the upper one.
//!
//! The kernel equations are solved in characteristic coordinates
//! `p = τ + ∫_z^{z0} σ⁺`, `r = ∫_z^{z0} σ⁻ − τ`. The domain becomes the
//! triangle `p, r ≥ 0`, `p + r ≤ W(0)` with `W(z) = ∫_z^{z0} (σ⁻ + σ⁺)`,
//! the `k⁺·` characteristics are the lines `p = const`, the `k⁻·`
//! characteristics the lines `r = const`, and lines `p + r = const` are rows
//! of constant `z`. With `λ± = μ± / (σ⁺ + σ⁻)`:
//!
//! ```text
//!   ∂r k⁺· = −λ⁺ k⁻·,   k⁺⁻(p, 0) = λ⁺,  k⁺⁺(p, 0) = 0
//!   ∂p k⁻· = −λ⁻ k⁺·,   k⁻⁺(0, r) = λ⁻,  k⁻⁻(0, r) = 0
//! ```

use crate::error::{HocfError, Result};
use crate::field::CoefficientField;
use crate::quad;
use crate::signal::Signal;
use crate::system::ValidatedSystem;

pub const MAX_SWEEPS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Index into a `[f64; 4]` kernel sample.
pub const KMM: usize = 0;
pub const KMP: usize = 1;
pub const KPM: usize = 2;
pub const KPP: usize = 3;

/// Sampled kernel matrix on a ragged triangular grid.
///
/// Row `m` (`m = 0..=rows`) sits at `z_m` with `W(z_m) = m h`; row 0 is the
/// apex `z0`, the last row is `z = 0`. Row `m` holds `m + 1` samples at
/// `τ_i = i h − B(z_m)`, `i = 0..=m`, spanning `[−B(z_m), A(z_m)]` with
/// `A = ∫_z^{z0} σ⁻`, `B = ∫_z^{z0} σ⁺`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    z0: f64,
    h: f64,
    rows: usize,
    z_rows: Vec<f64>,
    sigma_minus: CoefficientField,
    sigma_plus: CoefficientField,
    /// Row-major triangle, node `(i, j)` at `offset(i + j) + i`.
    values: Vec<[f64; 4]>,
    sweeps: usize,
}

fn offset(m: usize) -> usize {
    m * (m + 1) / 2
}

impl KernelTable {
    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Grid spacing in `τ` (and in the characteristic coordinates).
    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// `z` of row `m`.
    pub fn row_z(&self, m: usize) -> f64 {
        self.z_rows[m]
    }

    fn reach_minus(&self, z: f64) -> f64 {
        self.sigma_minus.integral(z, self.z0)
    }

    fn reach_plus(&self, z: f64) -> f64 {
        self.sigma_plus.integral(z, self.z0)
    }

    /// `τ` interval `[−B(z), A(z)]` of the domain at `z`.
    pub fn tau_range(&self, z: f64) -> (f64, f64) {
        (-self.reach_plus(z), self.reach_minus(z))
    }

    /// `τ` samples of row `m`.
    pub fn row_taus(&self, m: usize) -> Vec<f64> {
        let b = self.reach_plus(self.z_rows[m]);
        (0..=m).map(|i| i as f64 * self.h - b).collect()
    }

    pub fn row_values(&self, m: usize) -> &[[f64; 4]] {
        &self.values[offset(m)..offset(m) + m + 1]
    }

    fn node(&self, i: usize, j: usize) -> [f64; 4] {
        self.values[offset(i + j) + i]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|&x| x == 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Kernel matrix at `(z, τ)` by linear interpolation on the triangular
    /// mesh; `τ` is clamped to the domain at `z`.
    pub fn eval(&self, z: f64, tau: f64) -> Result<[f64; 4]> {
        if !(-1e-12..=self.z0 + 1e-12).contains(&z) {
            return Err(HocfError::KernelDomainError { z0: self.z0, z });
        }
        let z = z.clamp(0.0, self.z0);
        let (lo, hi) = self.tau_range(z);
        let tau = tau.clamp(lo, hi);
        let w = self.reach_minus(z) + self.reach_plus(z);
        let p = (tau - lo).max(0.0);
        let r = (w - p).max(0.0);
        Ok(self.eval_pr(p / self.h, r / self.h))
    }

    fn eval_pr(&self, s: f64, t: f64) -> [f64; 4] {
        let n = self.rows;
        let lerp = |a: [f64; 4], b: [f64; 4], c: [f64; 4], wa: f64, wb: f64, wc: f64| {
            let mut out = [0.0; 4];
            for k in 0..4 {
                out[k] = wa * a[k] + wb * b[k] + wc * c[k];
            }
            out
        };
        if n == 0 {
            return self.node(0, 0);
        }
        let mut i = s.floor() as usize;
        let mut j = t.floor() as usize;
        if i + j >= n {
            // on the outer row (z = 0): interpolate along it
            let s = s.clamp(0.0, n as f64);
            let i0 = (s.floor() as usize).min(n - 1);
            let fs = s - i0 as f64;
            let a = self.node(i0, n - i0);
            let b = self.node(i0 + 1, n - i0 - 1);
            return lerp(a, b, b, 1.0 - fs, fs, 0.0);
        }
        i = i.min(n - 1);
        j = j.min(n - 1 - i);
        let fs = (s - i as f64).clamp(0.0, 1.0);
        let ft = (t - j as f64).clamp(0.0, 1.0);
        if fs + ft <= 1.0 || i + j + 2 > n {
            let (fs, ft) = if fs + ft > 1.0 {
                (fs / (fs + ft), ft / (fs + ft))
            } else {
                (fs, ft)
            };
            lerp(
                self.node(i, j),
                self.node(i + 1, j),
                self.node(i, j + 1),
                1.0 - fs - ft,
                fs,
                ft,
            )
        } else {
            lerp(
                self.node(i + 1, j + 1),
                self.node(i + 1, j),
                self.node(i, j + 1),
                fs + ft - 1.0,
                1.0 - ft,
                1.0 - fs,
            )
        }
    }

    /// Kernel rows at `z` sampled on `samples` uniform points of
    /// `[−B(z), A(z)]`.
    pub fn sample_row(&self, z: f64, samples: usize) -> Result<(Vec<f64>, Vec<[f64; 4]>)> {
        let (lo, hi) = self.tau_range(z);
        let step = (hi - lo) / (samples.max(2) - 1) as f64;
        let taus: Vec<f64> = (0..samples.max(2)).map(|k| lo + k as f64 * step).collect();
        let vals = taus
            .iter()
            .map(|&tau| self.eval(z, tau))
            .collect::<Result<Vec<_>>>()?;
        Ok((taus, vals))
    }

    /// CSV rows `z,tau,kmm,kmp,kpm,kpp` for every node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,tau,kmm,kmp,kpm,kpp\n");
        for m in 0..=self.rows {
            let z = self.z_rows[m];
            for (tau, v) in self.row_taus(m).iter().zip(self.row_values(m)) {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    z, tau, v[KMM], v[KMP], v[KPM], v[KPP]
                ));
            }
        }
        out
    }
}

/// Inverts the decreasing map `z ↦ W(z)` on `[0, z0]`.
fn invert_width(width: impl Fn(f64) -> f64, z0: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, z0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if width(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves the kernel equations on `[0, z0] × Γ_inf(z0)` with `resolution`
/// intervals along each characteristic direction.
///
/// Plain Picard sweeps with trapezoidal integration along the characteristic
/// lines; the boundary values are imposed exactly on every sweep. Stops once
/// the sup-norm change of a sweep drops below `tol`.
pub fn solve_kernels(
    sys: &ValidatedSystem,
    z0: f64,
    resolution: usize,
    tol: f64,
) -> Result<KernelTable> {
    solve_kernels_capped(sys, z0, resolution, tol, MAX_SWEEPS)
}

/// [`solve_kernels`] with an explicit sweep limit.
pub fn solve_kernels_capped(
    sys: &ValidatedSystem,
    z0: f64,
    resolution: usize,
    tol: f64,
    max_sweeps: usize,
) -> Result<KernelTable> {
    if !(z0 > 0.0 && z0 <= 1.0) {
        return Err(HocfError::DomainError {
            value: z0,
            domain: "(0, 1] for the kernel anchor",
        });
    }
    if !(tol > 0.0) {
        return Err(HocfError::DomainError {
            value: tol,
            domain: "(0, ∞) for the tolerance",
        });
    }
    if resolution < 2 {
        return Err(HocfError::ResolutionError(format!(
            "kernel grid needs at least 2 intervals, got {resolution}"
        )));
    }
    let n = resolution;
    let width = |z: f64| sys.sigma_minus.integral(z, z0) + sys.sigma_plus.integral(z, z0);
    let total = width(0.0);
    let h = total / n as f64;
    let z_rows: Vec<f64> = (0..=n)
        .map(|m| match m {
            0 => z0,
            m if m == n => 0.0,
            m => invert_width(width, z0, m as f64 * h),
        })
        .collect();
    let lambda = |mu: &CoefficientField| -> Vec<f64> {
        z_rows
            .iter()
            .map(|&z| mu.eval(z) / (sys.sigma_minus.eval(z) + sys.sigma_plus.eval(z)))
            .collect()
    };
    let lam_plus = lambda(&sys.mu_plus);
    let lam_minus = lambda(&sys.mu_minus);

    let mut table = KernelTable {
        z0,
        h,
        rows: n,
        z_rows,
        sigma_minus: sys.sigma_minus.clone(),
        sigma_plus: sys.sigma_plus.clone(),
        values: vec![[0.0; 4]; offset(n + 1)],
        sweeps: 0,
    };
    let idx = |i: usize, j: usize| offset(i + j) + i;

    let mut next = table.values.clone();
    let mut last_change = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let prev = &table.values;
        // k⁺· along p = i h, integrating in r from the boundary r = 0.
        for i in 0..=n {
            let mut acc = [0.0; 2];
            let bc = [lam_plus[i], 0.0];
            let mut prev_term = [0.0; 2];
            for j in 0..=n - i {
                let m = i + j;
                let src = prev[idx(i, j)];
                let term = [lam_plus[m] * src[KMM], lam_plus[m] * src[KMP]];
                if j > 0 {
                    acc[0] += 0.5 * h * (prev_term[0] + term[0]);
                    acc[1] += 0.5 * h * (prev_term[1] + term[1]);
                }
                prev_term = term;
                let v = &mut next[idx(i, j)];
                v[KPM] = bc[0] - acc[0];
                v[KPP] = bc[1] - acc[1];
            }
        }
        // k⁻· along r = j h, integrating in p from the boundary p = 0.
        for j in 0..=n {
            let mut acc = [0.0; 2];
            let bc = [0.0, lam_minus[j]];
            let mut prev_term = [0.0; 2];
            for i in 0..=n - j {
                let m = i + j;
                let src = prev[idx(i, j)];
                let term = [lam_minus[m] * src[KPM], lam_minus[m] * src[KPP]];
                if i > 0 {
                    acc[0] += 0.5 * h * (prev_term[0] + term[0]);
                    acc[1] += 0.5 * h * (prev_term[1] + term[1]);
                }
                prev_term = term;
                let v = &mut next[idx(i, j)];
                v[KMM] = bc[0] - acc[0];
                v[KMP] = bc[1] - acc[1];
            }
        }
        let change = next
            .iter()
            .zip(prev)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0_f64, f64::max);
        std::mem::swap(&mut table.values, &mut next);
        table.sweeps = sweep;
        last_change = change;
        if change < tol {
            return Ok(table);
        }
    }
    Err(HocfError::NoConvergence {
        iterations: max_sweeps,
        last_change,
    })
}

/// Applies the convolution part of the trace parameterization at `z`:
/// `(K(z) x(z0,·))(t)` for each requested `t`, given both trace components
/// at `z0`. Returns the `x⁻` and `x⁺` rows.
pub fn kernel_convolve(
    table: &KernelTable,
    z: f64,
    trace_minus: &Signal,
    trace_plus: &Signal,
    times: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(-1e-12..=table.z0 + 1e-12).contains(&z) {
        return Err(HocfError::KernelDomainError { z0: table.z0, z });
    }
    let z = z.clamp(0.0, table.z0);
    let (lo, hi) = table.tau_range(z);
    if hi - lo <= 0.0 {
        return Ok((vec![0.0; times.len()], vec![0.0; times.len()]));
    }
    let dt = trace_minus.dt.min(trace_plus.dt).min(table.h);
    let intervals = (((hi - lo) / dt).ceil() as usize).max(4);
    let step = (hi - lo) / intervals as f64;
    let taus: Vec<f64> = (0..=intervals).map(|k| lo + k as f64 * step).collect();
    let kern = taus
        .iter()
        .map(|&tau| table.eval(z, tau))
        .collect::<Result<Vec<_>>>()?;
    let w = quad::weights(taus.len(), step);

    let have_start = trace_minus.t0.max(trace_plus.t0);
    let have_end = trace_minus.t_end().min(trace_plus.t_end());
    let slack = 1e-9 * (1.0 + have_end.abs());
    let mut out_minus = Vec::with_capacity(times.len());
    let mut out_plus = Vec::with_capacity(times.len());
    for &t in times {
        if t - hi < have_start - slack || t - lo > have_end + slack {
            return Err(HocfError::InsufficientTrace {
                need_start: t - hi,
                need_end: t - lo,
                have_start,
                have_end,
            });
        }
        let (mut acc_m, mut acc_p) = (0.0, 0.0);
        for ((tau, k), wk) in taus.iter().zip(&kern).zip(&w) {
            let xm = trace_minus.at(t - tau);
            let xp = trace_plus.at(t - tau);
            acc_m += wk * (k[KMM] * xm + k[KMP] * xp);
            acc_p += wk * (k[KPM] * xm + k[KPP] * xp);
        }
        // oriented integral from A(z) down to −B(z)
        out_minus.push(-acc_m);
        out_plus.push(-acc_p);
    }
    Ok((out_minus, out_plus))
}
