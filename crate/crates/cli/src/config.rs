//! Run configuration: the system under study plus grid parameters.

use std::fs;
use std::path::{Path, PathBuf};

use hocf_core::io::{parse_string_shorthand, system_from_json};
use hocf_core::kernel::MAX_SWEEPS;
use hocf_core::string_example::{build_string_system, StringParams};
use hocf_core::{
    assemble_raw_fde, reduce_to_canonical, solve_kernels_capped, transforms, validate_system,
    CanonicalFDE, KernelTable, ValidatedSystem,
};
use serde::de::DeserializeOwned;

use crate::error::{CliError, CliResult};

pub const MIN_NZ: usize = 8;

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// System config: a JSON file or `string:k,m`.
    #[arg(long)]
    pub system: String,
    /// Spatial grid nodes.
    #[arg(long, default_value_t = 129)]
    pub nz: usize,
    /// Samples of the output window on `[0, τ̂]` (default: matches the
    /// spatial step).
    #[arg(long)]
    pub nt: Option<usize>,
    /// Time horizon (default: 3τ̂).
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Kernel iteration tolerance.
    #[arg(long, default_value_t = hocf_core::kernel::DEFAULT_TOL)]
    pub tol: f64,
    /// Cap on kernel sweeps.
    #[arg(long, default_value_t = MAX_SWEEPS)]
    pub max_sweeps: usize,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub struct RunConfig {
    pub sys: ValidatedSystem,
    pub nz: usize,
    pub nt: usize,
    pub horizon: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    pub out: PathBuf,
}

pub fn load_system(spec: &str) -> CliResult<(ValidatedSystem, Option<StringParams>)> {
    if let Some(parsed) = parse_string_shorthand(spec) {
        let p = parsed.map_err(|source| CliError::Format {
            path: PathBuf::from(spec),
            source,
        })?;
        return Ok((build_string_system(&p), Some(p)));
    }
    let path = PathBuf::from(spec);
    let text = fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let raw = system_from_json(&text).map_err(|source| CliError::Format {
        path: path.clone(),
        source,
    })?;
    let sys = validate_system(raw).map_err(|e| CliError::Format {
        path,
        source: e.into(),
    })?;
    Ok((sys, None))
}

/// Window samples matching spatial step `1/(nz − 1)` on `[0, τ̂]`.
pub fn default_nt(sys: &ValidatedSystem, nz: usize) -> usize {
    let intervals = (sys.times().tau_hat * (nz - 1) as f64).round() as usize;
    intervals.max(transforms::min_points(sys.n) - 1) + 1
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> CliResult<Self> {
        let (sys, _) = load_system(&args.system)?;
        if args.nz < MIN_NZ {
            return Err(CliError::Config(format!(
                "--nz {} is below the minimum of {MIN_NZ}",
                args.nz
            )));
        }
        let min_nt = transforms::min_points(sys.n);
        let nt = args.nt.unwrap_or_else(|| default_nt(&sys, args.nz));
        if nt < min_nt {
            return Err(CliError::Config(format!(
                "--nt {nt} is below the minimum of {min_nt} for order {}",
                sys.n
            )));
        }
        if !(args.tol > 0.0) {
            return Err(CliError::Config(format!(
                "--tol must be positive, got {}",
                args.tol
            )));
        }
        let horizon = args.horizon.unwrap_or(3.0 * sys.times().tau_hat);
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(CliError::Config(format!(
                "--T must be positive, got {horizon}"
            )));
        }
        fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
            path: args.out.clone(),
            source,
        })?;
        Ok(Self {
            sys,
            nz: args.nz,
            nt,
            horizon,
            tol: args.tol,
            max_sweeps: args.max_sweeps,
            out: args.out.clone(),
        })
    }

    pub fn kernels(&self) -> CliResult<KernelTable> {
        kernels_for(&self.sys, self.nz, self.tol, self.max_sweeps)
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
    }
}

pub fn kernels_for(
    sys: &ValidatedSystem,
    nz: usize,
    tol: f64,
    max_sweeps: usize,
) -> CliResult<KernelTable> {
    Ok(solve_kernels_capped(sys, 1.0, nz - 1, tol, max_sweeps)?)
}

pub fn canonical_fde(
    sys: &ValidatedSystem,
    kernels: &KernelTable,
    nt: usize,
) -> CliResult<CanonicalFDE> {
    Ok(reduce_to_canonical(&assemble_raw_fde(sys, kernels, nt)?))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        source: e.into(),
    })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
