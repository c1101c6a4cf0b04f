use std::path::{Path, PathBuf};

use hocf_core::io::{
    eta_dist_csv, fde_to_json, frame_csv, hocf_csv, observer_from_json, observer_to_json,
    trajectory_csv,
};
use hocf_core::*;
use serde::Serialize;

use crate::config::{canonical_fde, read_json, read_text, RunConfig};
use crate::error::{CliError, CliResult};
use crate::plot::{line_plot, Series};
use crate::study::{
    equivalence_run, excited_state, fan_out, observed_order, pulse, refinements, roundtrip_run,
    RoundtripRun, StudyParams, MIN_ORDER,
};

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Boundary input `u(t)` for `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Zero,
    Step,
    Pulse,
    Sine { period: f64 },
}

impl std::str::FromStr for InputSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "step" => Ok(Self::Step),
            "pulse" => Ok(Self::Pulse),
            _ => {
                let period = s
                    .strip_prefix("sine:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .filter(|p| *p > 0.0)
                    .ok_or_else(|| {
                        format!("unknown input `{s}` (zero, step, pulse or sine:<period>)")
                    })?;
                Ok(Self::Sine { period })
            }
        }
    }
}

impl InputSpec {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Step => 1.0,
            Self::Pulse => pulse(t),
            Self::Sine { period } => (std::f64::consts::TAU * t / period).sin(),
        }
    }
}

/// Initial state from a JSON snapshot file, resampled to the grid, or zero.
fn initial_state(cfg: &RunConfig, path: Option<&PathBuf>) -> CliResult<StateSnapshot> {
    let Some(path) = path else {
        return Ok(StateSnapshot::zeros(cfg.nz, cfg.sys.n));
    };
    let snap: StateSnapshot = read_json(path)?;
    snap.check().map_err(|e| CliError::Format {
        path: path.clone(),
        source: e.into(),
    })?;
    if snap.xi.len() != cfg.sys.n {
        return Err(CliError::Config(format!(
            "{}: ODE state has {} entries, system order is {}",
            path.display(),
            snap.xi.len(),
            cfg.sys.n
        )));
    }
    Ok(snap.resampled(cfg.nz))
}

pub fn simulate(cfg: &RunConfig, input: &InputSpec, state: Option<&PathBuf>) -> CliResult<()> {
    let x0 = initial_state(cfg, state)?;
    let u = |t: f64| input.eval(t);
    let input = match input {
        InputSpec::Zero => Input::Zero,
        _ => Input::Function(&u),
    };
    let traj = simulate_forward_with(
        &cfg.sys,
        &x0,
        &input,
        cfg.horizon,
        cfg.nz,
        SimOptions { frame_stride: 0 },
    )?;
    cfg.write("traj.csv", &trajectory_csv(&traj))?;
    cfg.write("final.csv", &frame_csv(traj.final_state()))?;
    let svg = line_plot(
        "output y(t)",
        &[Series {
            label: "y",
            x: &traj.times,
            y: &traj.y,
        }],
    );
    cfg.write("y.svg", &svg)?;
    println!(
        "simulated {} steps to t = {}; wrote traj.csv, final.csv, y.svg",
        traj.times.len() - 1,
        cfg.horizon
    );
    Ok(())
}

pub fn kernels(cfg: &RunConfig) -> CliResult<()> {
    let k = cfg.kernels()?;
    cfg.write("kernels.csv", &k.to_csv())?;
    println!(
        "kernels converged after {} sweeps, max |K| = {:e}; wrote kernels.csv",
        k.sweeps(),
        k.max_abs()
    );
    Ok(())
}

pub fn canonical(cfg: &RunConfig) -> CliResult<()> {
    let k = cfg.kernels()?;
    let fde = canonical_fde(&cfg.sys, &k, cfg.nt)?;
    cfg.write("kernels.csv", &k.to_csv())?;
    cfg.write("fde.json", &(fde_to_json(&fde) + "\n"))?;
    println!(
        "a = {:?}, atoms = {:?}, {} density samples; wrote kernels.csv, fde.json",
        fde.a,
        fde.alpha.atoms,
        fde.alpha.density.len()
    );
    Ok(())
}

/// Output window for `to-hocf`: a window file, a state file, or the state
/// left behind by the built-in pulse.
fn source_window(
    cfg: &RunConfig,
    ybar: Option<&PathBuf>,
    state: Option<&PathBuf>,
) -> CliResult<ObservabilityState> {
    if let Some(path) = ybar {
        let w: ObservabilityState = read_json(path)?;
        let th = cfg.sys.times().tau_hat;
        if w.len() < 2 || (w.tau_hat - th).abs() > 1e-9 * th {
            return Err(CliError::Config(format!(
                "{}: window covers [0, {}] with {} samples, system needs [0, {th}]",
                path.display(),
                w.tau_hat,
                w.len()
            )));
        }
        return Ok(w);
    }
    let x0 = match state {
        Some(_) => initial_state(cfg, state)?,
        None => excited_state(&cfg.sys, cfg.nz)?,
    };
    Ok(observability_map(&cfg.sys, &x0, cfg.nt)?)
}

pub fn to_hocf(cfg: &RunConfig, ybar: Option<&PathBuf>, state: Option<&PathBuf>) -> CliResult<()> {
    let window = source_window(cfg, ybar, state)?;
    let fde = canonical_fde(&cfg.sys, &cfg.kernels()?, window.len())?;
    let eta = obs_to_observer(&fde, &window)?;
    cfg.write("ybar.json", &to_json(&window))?;
    cfg.write("eta.json", &(observer_to_json(&eta) + "\n"))?;
    cfg.write("eta_dist.csv", &eta_dist_csv(&eta))?;
    println!(
        "eta = {:?}; wrote ybar.json, eta.json, eta_dist.csv",
        eta.eta
    );
    Ok(())
}

fn read_eta(path: &Path) -> CliResult<ObserverState> {
    observer_from_json(&read_text(path)?).map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })
}

fn check_eta(cfg: &RunConfig, eta: &ObserverState, path: &Path) -> CliResult<()> {
    let th = cfg.sys.times().tau_hat;
    if eta.eta.len() != cfg.sys.n || (eta.tau_hat - th).abs() > 1e-9 * th {
        return Err(CliError::Config(format!(
            "{}: observer state of order {} on [0, {}] does not fit a system of order {} with horizon {th}",
            path.display(),
            eta.eta.len(),
            eta.tau_hat,
            cfg.sys.n
        )));
    }
    Ok(())
}

pub fn from_hocf(cfg: &RunConfig, eta_path: &Path) -> CliResult<()> {
    let eta = read_eta(eta_path)?;
    check_eta(cfg, &eta, eta_path)?;
    let kernels = cfg.kernels()?;
    let fde = canonical_fde(&cfg.sys, &kernels, eta.eta_dist.len())?;
    let window = observer_to_obs(&fde, &eta)?;
    let state = obs_to_state(&cfg.sys, &kernels, &window, cfg.nz)?;
    cfg.write("ybar.json", &to_json(&window))?;
    cfg.write("state.json", &to_json(&state))?;
    cfg.write("state.csv", &frame_csv(&state))?;
    println!(
        "xi = {:?}; wrote ybar.json, state.json, state.csv",
        state.xi
    );
    Ok(())
}

pub fn simulate_hocf_cmd(cfg: &RunConfig, eta_path: Option<&PathBuf>) -> CliResult<()> {
    let eta = match eta_path {
        Some(p) => {
            let eta = read_eta(p)?;
            check_eta(cfg, &eta, p)?;
            eta
        }
        None => {
            let window = source_window(cfg, None, None)?;
            let fde = canonical_fde(&cfg.sys, &cfg.kernels()?, window.len())?;
            obs_to_observer(&fde, &window)?
        }
    };
    let fde = canonical_fde(&cfg.sys, &cfg.kernels()?, cfg.nt)?;
    let traj = simulate_hocf(&HocfSystem::new(fde)?, &eta, cfg.horizon, cfg.nt - 1)?;
    cfg.write("hocf.csv", &hocf_csv(&traj))?;
    let svg = line_plot(
        "observer-form output y(t)",
        &[Series {
            label: "y",
            x: &traj.times,
            y: &traj.y,
        }],
    );
    cfg.write("y.svg", &svg)?;
    println!(
        "simulated observer form to t = {}; wrote hocf.csv, y.svg",
        cfg.horizon
    );
    Ok(())
}

#[derive(Serialize)]
struct RoundtripReport<'a> {
    runs: &'a [RoundtripRun],
    observed_order: Option<f64>,
    min_order: f64,
    pass: bool,
}

pub fn roundtrip(cfg: &RunConfig, levels: usize, zero_state: bool) -> CliResult<()> {
    let params = StudyParams {
        tol: cfg.tol,
        max_sweeps: cfg.max_sweeps,
        zero_state,
    };
    let grids = refinements(cfg.nz, levels.max(2));
    let runs = fan_out(&grids, |&nz| roundtrip_run(&cfg.sys, nz, params))?;
    let errs: Vec<(f64, f64)> = runs.iter().map(|r| (r.h, r.l2_error)).collect();
    let order = observed_order(&errs);
    let pass = order.is_none_or(|o| o >= MIN_ORDER);
    cfg.write(
        "roundtrip.json",
        &to_json(&RoundtripReport {
            runs: &runs,
            observed_order: order,
            min_order: MIN_ORDER,
            pass,
        }),
    )?;
    for r in &runs {
        println!(
            "nz = {:5}  h = {:.3e}  L2 error = {:.3e}  relative = {:.3e}",
            r.nz, r.h, r.l2_error, r.relative_l2_error
        );
    }
    report_order(order, pass, "roundtrip.json")
}

fn report_order(order: Option<f64>, pass: bool, file: &str) -> CliResult<()> {
    match order {
        Some(o) => println!("observed order {o:.3} (need ≥ {MIN_ORDER}); wrote {file}"),
        None => println!("all errors vanish; wrote {file}"),
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "observed order {:.3} is below {MIN_ORDER}",
            order.unwrap_or(f64::NAN)
        )))
    }
}

#[derive(Serialize)]
struct EquivalenceReport<'a> {
    horizon: f64,
    runs: &'a [crate::study::EquivalenceRun],
    observed_order: Option<f64>,
    min_order: f64,
    pass: bool,
}

pub fn equivalence(cfg: &RunConfig, levels: usize, zero_state: bool) -> CliResult<()> {
    let params = StudyParams {
        tol: cfg.tol,
        max_sweeps: cfg.max_sweeps,
        zero_state,
    };
    let grids = refinements(cfg.nz, levels.max(2));
    let runs = fan_out(&grids, |&nz| {
        equivalence_run(&cfg.sys, nz, cfg.horizon, params)
    })?;
    let errs: Vec<(f64, f64)> = runs.iter().map(|r| (r.h, r.sup_error)).collect();
    let order = observed_order(&errs);
    let pass = order.is_none_or(|o| o >= MIN_ORDER);
    cfg.write(
        "equivalence.json",
        &to_json(&EquivalenceReport {
            horizon: cfg.horizon,
            runs: &runs,
            observed_order: order,
            min_order: MIN_ORDER,
            pass,
        }),
    )?;
    let finest = runs.last().expect("at least two runs");
    let svg = line_plot(
        "original vs observer-form output",
        &[
            Series {
                label: "original",
                x: &finest.times,
                y: &finest.y_original,
            },
            Series {
                label: "observer form",
                x: &finest.times,
                y: &finest.y_hocf,
            },
        ],
    );
    cfg.write("y.svg", &svg)?;
    for r in &runs {
        println!(
            "nz = {:5}  h = {:.3e}  sup error = {:.3e}  relative = {:.3e}",
            r.nz, r.h, r.sup_error, r.relative_sup_error
        );
    }
    report_order(order, pass, "equivalence.json, y.svg")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_specs() {
        assert_eq!("pulse".parse::<InputSpec>(), Ok(InputSpec::Pulse));
        assert_eq!(
            "sine:2.5".parse::<InputSpec>(),
            Ok(InputSpec::Sine { period: 2.5 })
        );
        assert!("sine:-1".parse::<InputSpec>().is_err());
        assert!("ramp".parse::<InputSpec>().is_err());
    }
}
