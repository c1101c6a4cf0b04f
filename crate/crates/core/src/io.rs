//! File formats: system configs (JSON), trajectories and profiles (CSV),
//! FDE and observer states (JSON).
//!
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::HocfError;
use crate::fde::{AlphaMeasure, CanonicalFDE};
use crate::field::CoefficientField;
use crate::hocf::HocfTrajectory;
use crate::simulator::Trajectory;
use crate::string_example::StringParams;
use crate::system::{HyperbolicSystem, StateSnapshot};
use crate::transforms::ObserverState;

pub const SCHEMA: &str = "hocf-kit/v1";

/// Errors from reading configuration or data files.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema `{0}` (expected `{SCHEMA}`)")]
    Schema(String),
    #[error("malformed system shorthand `{0}` (expected `string:k,m`)")]
    Shorthand(String),
    #[error(transparent)]
    Invalid(#[from] HocfError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// A coefficient given either as a constant or as `{grid, values}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FieldSpec {
    Constant(f64),
    Sampled(CoefficientField),
}

impl From<FieldSpec> for CoefficientField {
    fn from(f: FieldSpec) -> Self {
        match f {
            FieldSpec::Constant(c) => CoefficientField::constant(c),
            FieldSpec::Sampled(f) => f,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    #[serde(default)]
    schema: Option<String>,
    sigma_minus: FieldSpec,
    sigma_plus: FieldSpec,
    mu_minus: FieldSpec,
    mu_plus: FieldSpec,
    n: usize,
    f: Vec<f64>,
    g: Vec<f64>,
    q0: f64,
    q1: f64,
    b1_bar: f64,
    m_plus: f64,
    d1: f64,
}

/// Parses a system config; the `schema` field is optional but must match
/// when present.
pub fn system_from_json(text: &str) -> Result<HyperbolicSystem, FormatError> {
    let file: SystemFile = serde_json::from_str(text)?;
    if let Some(s) = &file.schema {
        if s != SCHEMA {
            return Err(FormatError::Schema(s.clone()));
        }
    }
    Ok(HyperbolicSystem {
        sigma_minus: file.sigma_minus.into(),
        sigma_plus: file.sigma_plus.into(),
        mu_minus: file.mu_minus.into(),
        mu_plus: file.mu_plus.into(),
        n: file.n,
        f: file.f,
        g: file.g,
        q0: file.q0,
        q1: file.q1,
        b1_bar: file.b1_bar,
        m_plus: file.m_plus,
        d1: file.d1,
    })
}

pub fn system_to_json(sys: &HyperbolicSystem) -> String {
    let file = SystemFile {
        schema: Some(SCHEMA.to_string()),
        sigma_minus: FieldSpec::Sampled(sys.sigma_minus.clone()),
        sigma_plus: FieldSpec::Sampled(sys.sigma_plus.clone()),
        mu_minus: FieldSpec::Sampled(sys.mu_minus.clone()),
        mu_plus: FieldSpec::Sampled(sys.mu_plus.clone()),
        n: sys.n,
        f: sys.f.clone(),
        g: sys.g.clone(),
        q0: sys.q0,
        q1: sys.q1,
        b1_bar: sys.b1_bar,
        m_plus: sys.m_plus,
        d1: sys.d1,
    };
    serde_json::to_string_pretty(&file).expect("system serializes")
}

/// `string:k,m` → parameters; `None` if `spec` is not a shorthand at all.
pub fn parse_string_shorthand(spec: &str) -> Option<Result<StringParams, FormatError>> {
    let rest = spec.strip_prefix("string:")?;
    let bad = || FormatError::Shorthand(spec.to_string());
    let parsed = (|| {
        let (k, m) = rest.split_once(',').ok_or_else(bad)?;
        let k: f64 = k.trim().parse().map_err(|_| bad())?;
        let m: f64 = m.trim().parse().map_err(|_| bad())?;
        Ok(StringParams::new(k, m)?)
    })();
    Some(parsed)
}

#[derive(Debug, Serialize, Deserialize)]
struct Sampled {
    grid: Vec<f64>,
    values: Vec<f64>,
}

fn uniform(tau_hat: f64, len: usize) -> Vec<f64> {
    let h = tau_hat / (len - 1) as f64;
    (0..len).map(|i| i as f64 * h).collect()
}

fn check_uniform(s: &Sampled) -> Result<f64, FormatError> {
    if s.grid.len() != s.values.len() || s.grid.len() < 2 || s.grid[0] != 0.0 {
        return Err(HocfError::GridError(
            "sampled function needs matching grid/values starting at 0".into(),
        )
        .into());
    }
    Ok(*s.grid.last().unwrap())
}

#[derive(Debug, Serialize, Deserialize)]
struct FdeFile {
    n: usize,
    tau_hat: f64,
    a: Vec<f64>,
    atoms: Vec<[f64; 2]>,
    density: Sampled,
}

pub fn fde_to_json(fde: &CanonicalFDE) -> String {
    let file = FdeFile {
        n: fde.n,
        tau_hat: fde.tau_hat,
        a: fde.a.clone(),
        atoms: fde.alpha.atoms.iter().map(|&(l, m)| [l, m]).collect(),
        density: Sampled {
            grid: uniform(fde.tau_hat, fde.alpha.density.len()),
            values: fde.alpha.density.clone(),
        },
    };
    serde_json::to_string_pretty(&file).expect("fde serializes")
}

pub fn fde_from_json(text: &str) -> Result<CanonicalFDE, FormatError> {
    let file: FdeFile = serde_json::from_str(text)?;
    check_uniform(&file.density)?;
    if file.a.len() != file.n {
        return Err(HocfError::DimensionMismatch(format!(
            "n = {} but a has {} entries",
            file.n,
            file.a.len()
        ))
        .into());
    }
    let alpha = AlphaMeasure {
        tau_hat: file.tau_hat,
        atoms: file.atoms.iter().map(|a| (a[0], a[1])).collect(),
        density: file.density.values,
    };
    alpha.validate()?;
    Ok(CanonicalFDE {
        n: file.n,
        tau_hat: file.tau_hat,
        a: file.a,
        alpha,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ObserverFile {
    eta: Vec<f64>,
    eta_dist: Sampled,
}

pub fn observer_to_json(eta: &ObserverState) -> String {
    let file = ObserverFile {
        eta: eta.eta.clone(),
        eta_dist: Sampled {
            grid: eta.tau_grid(),
            values: eta.eta_dist.clone(),
        },
    };
    serde_json::to_string_pretty(&file).expect("observer state serializes")
}

pub fn observer_from_json(text: &str) -> Result<ObserverState, FormatError> {
    let file: ObserverFile = serde_json::from_str(text)?;
    let tau_hat = check_uniform(&file.eta_dist)?;
    Ok(ObserverState {
        eta: file.eta,
        eta_dist: file.eta_dist.values,
        tau_hat,
    })
}

/// `t,y,u,xi_1..xi_n`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.xi.first().map_or(0, Vec::len);
    let mut out = String::from("t,y,u");
    for i in 1..=n {
        let _ = write!(out, ",xi_{i}");
    }
    out.push('\n');
    for k in 0..traj.times.len() {
        let _ = write!(out, "{},{},{}", traj.times[k], traj.y[k], traj.u[k]);
        for v in &traj.xi[k] {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// `z,x_minus,x_plus`.
pub fn frame_csv(snap: &StateSnapshot) -> String {
    let mut out = String::from("z,x_minus,x_plus\n");
    for i in 0..snap.nz() {
        let _ = writeln!(out, "{},{},{}", snap.z(i), snap.x_minus[i], snap.x_plus[i]);
    }
    out
}

/// `t,y,eta_1..eta_n`.
pub fn hocf_csv(traj: &HocfTrajectory) -> String {
    let n = traj.eta.first().map_or(0, Vec::len);
    let mut out = String::from("t,y");
    for i in 1..=n {
        let _ = write!(out, ",eta_{i}");
    }
    out.push('\n');
    for k in 0..traj.times.len() {
        let _ = write!(out, "{},{}", traj.times[k], traj.y[k]);
        for v in &traj.eta[k] {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// `tau,eta_dist`.
pub fn eta_dist_csv(eta: &ObserverState) -> String {
    let mut out = String::from("tau,eta_dist\n");
    for (t, v) in eta.tau_grid().iter().zip(&eta.eta_dist) {
        let _ = writeln!(out, "{t},{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::string_example::{build_string_system, closed_form_fde};

    #[test]
    fn system_roundtrip() {
        let sys = build_string_system(&StringParams::new(1.0, 2.0).unwrap()).into_inner();
        let text = system_to_json(&sys);
        assert!(text.contains(SCHEMA));
        assert_eq!(system_from_json(&text).unwrap(), sys);
    }

    #[test]
    fn constant_shorthand_fields() {
        let text = r#"{"sigma_minus": 1, "sigma_plus": 2.0, "mu_minus": 0, "mu_plus": 0,
            "n": 1, "f": [0], "g": [0], "q0": 1, "q1": 0, "b1_bar": 1, "m_plus": 1, "d1": 0}"#;
        let sys = system_from_json(text).unwrap();
        assert_eq!(sys.sigma_plus.eval(0.3), 2.0);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = system_from_json("{\n  \"n\": 1,\n  \"f\": [0,,]\n}").unwrap_err();
        match err {
            FormatError::Json { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            system_from_json(r#"{"schema": "v0"}"#),
            Err(FormatError::Json { .. } | FormatError::Schema(_))
        ));
    }

    #[test]
    fn shorthand() {
        let p = parse_string_shorthand("string:1,2.5").unwrap().unwrap();
        assert_eq!((p.k, p.m), (1.0, 2.5));
        assert!(parse_string_shorthand("string:1").unwrap().is_err());
        assert!(parse_string_shorthand("string:-1,1").unwrap().is_err());
        assert!(parse_string_shorthand("sys.json").is_none());
    }

    #[test]
    fn fde_and_observer_roundtrip() {
        let fde = closed_form_fde(&StringParams::new(1.0, 1.0).unwrap(), 9);
        let text = fde_to_json(&fde);
        assert_eq!(fde_from_json(&text).unwrap(), fde);
        let eta = ObserverState {
            eta: vec![1.0, 0.1],
            eta_dist: vec![0.5, 0.25, 0.125],
            tau_hat: 2.0,
        };
        assert_eq!(observer_from_json(&observer_to_json(&eta)).unwrap(), eta);
    }
}
