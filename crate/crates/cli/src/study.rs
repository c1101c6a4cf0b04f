//! Convergence studies: independent runs at successively halved steps,
//! fanned out over a rayon pool.

use hocf_core::*;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{canonical_fde, default_nt, kernels_for};
use crate::error::{CliError, CliResult};

/// Smallest order a study must show to count as converging.
pub const MIN_ORDER: f64 = 0.8;

pub const THREADS_VAR: &str = "HOCF_KIT_THREADS";

/// `sin⁴(πt)` on `[0, 1]`: smooth enough that the state it leaves behind
/// satisfies the boundary conditions to high order.
pub fn pulse(t: f64) -> f64 {
    if (0.0..=1.0).contains(&t) {
        (std::f64::consts::PI * t).sin().powi(4)
    } else {
        0.0
    }
}

/// State reached from rest under [`pulse`], re-timed to `t = 0`.
pub fn excited_state(sys: &ValidatedSystem, nz: usize) -> Result<StateSnapshot> {
    let rest = StateSnapshot::zeros(nz, sys.n);
    let traj = simulate_forward_with(
        sys,
        &rest,
        &Input::Function(&pulse),
        1.0,
        nz,
        SimOptions { frame_stride: 0 },
    )?;
    let mut x = traj.final_state().clone();
    x.time = 0.0;
    Ok(x)
}

#[derive(Debug, Clone, Copy)]
pub struct StudyParams {
    pub tol: f64,
    pub max_sweeps: usize,
    pub zero_state: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripRun {
    pub nz: usize,
    pub h: f64,
    pub l2_error: f64,
    pub relative_l2_error: f64,
}

/// `X → ȳ → η → ȳ → X` at one resolution.
pub fn roundtrip_run(sys: &ValidatedSystem, nz: usize, p: StudyParams) -> CliResult<RoundtripRun> {
    let x0 = if p.zero_state {
        StateSnapshot::zeros(nz, sys.n)
    } else {
        excited_state(sys, nz)?
    };
    let nt = default_nt(sys, nz);
    let kernels = kernels_for(sys, nz, p.tol, p.max_sweeps)?;
    let fde = canonical_fde(sys, &kernels, nt)?;
    let ybar = observability_map(sys, &x0, nt)?;
    let eta = obs_to_observer(&fde, &ybar)?;
    let back = observer_to_obs(&fde, &eta)?;
    let x1 = obs_to_state(sys, &kernels, &back, nz)?;
    let l2_error = x0.l2_distance(&x1);
    let norm = x0.l2_norm();
    Ok(RoundtripRun {
        nz,
        h: 1.0 / (nz - 1) as f64,
        l2_error,
        relative_l2_error: if norm > 0.0 {
            l2_error / norm
        } else {
            l2_error
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceRun {
    pub nz: usize,
    pub h: f64,
    pub sup_error: f64,
    pub relative_sup_error: f64,
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub y_original: Vec<f64>,
    #[serde(skip)]
    pub y_hocf: Vec<f64>,
}

/// Output of the original system versus its observer form over `horizon`.
pub fn equivalence_run(
    sys: &ValidatedSystem,
    nz: usize,
    horizon: f64,
    p: StudyParams,
) -> CliResult<EquivalenceRun> {
    let x0 = if p.zero_state {
        StateSnapshot::zeros(nz, sys.n)
    } else {
        excited_state(sys, nz)?
    };
    let nt = default_nt(sys, nz);
    let kernels = kernels_for(sys, nz, p.tol, p.max_sweeps)?;
    let fde = canonical_fde(sys, &kernels, nt)?;
    let ybar = observability_map(sys, &x0, nt)?;
    let eta = obs_to_observer(&fde, &ybar)?;
    let hocf = simulate_hocf(&HocfSystem::new(fde)?, &eta, horizon, nt - 1)?;
    let y = simulate_forward_with(
        sys,
        &x0,
        &Input::Zero,
        horizon,
        nz,
        SimOptions { frame_stride: 0 },
    )?
    .output();
    let y_original: Vec<f64> = hocf.times.iter().map(|&t| y.at(t)).collect();
    let sup_error = y_original
        .iter()
        .zip(&hocf.y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let peak = y.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(EquivalenceRun {
        nz,
        h: 1.0 / (nz - 1) as f64,
        sup_error,
        relative_sup_error: if peak > 0.0 {
            sup_error / peak
        } else {
            sup_error
        },
        times: hocf.times,
        y_original,
        y_hocf: hocf.y,
    })
}

/// Node counts with the step halved `levels − 1` times.
pub fn refinements(nz: usize, levels: usize) -> Vec<usize> {
    (0..levels).map(|k| ((nz - 1) << k) + 1).collect()
}

/// Order between the last two runs; `None` when both errors vanish.
pub fn observed_order(errors: &[(f64, f64)]) -> Option<f64> {
    let [.., (h0, e0), (h1, e1)] = errors else {
        return None;
    };
    if *e0 == 0.0 && *e1 == 0.0 {
        return None;
    }
    Some((e0 / e1).ln() / (h0 / h1).ln())
}

pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Config(format!("{THREADS_VAR}={v} is not a positive integer"))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Runs `f` over `inputs` in parallel, keeping input order.
pub fn fan_out<T, R, F>(inputs: &[T], f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> CliResult<R> + Sync,
{
    thread_pool()?.install(|| inputs.par_iter().map(&f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_halving_errors() {
        let o = observed_order(&[(0.1, 0.4), (0.05, 0.2)]).unwrap();
        assert!((o - 1.0).abs() < 1e-12);
        assert_eq!(observed_order(&[(0.1, 0.0), (0.05, 0.0)]), None);
        assert_eq!(observed_order(&[(0.1, 1.0)]), None);
    }

    #[test]
    fn refinement_halves_the_step() {
        assert_eq!(refinements(129, 3), vec![129, 257, 513]);
    }
}
