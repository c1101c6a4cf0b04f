//! Hyperbolic observer canonical form for 2×2 hyperbolic PDE–ODE systems.
//!
//! Pipeline: [`system`] defines the plant, [`simulator`] computes broad
//! solutions and the observability map, [`kernel`] solves the trace
//! parameterization kernels, [`fde`] assembles the neutral input–output
//! relation and reduces it to canonical form, [`transforms`] maps between
//! original, observability and observer coordinates, and [`hocf`] simulates
//! the observer form itself. [`string_example`] carries the closed forms of
//! the string–mass–spring benchmark.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fde;
pub mod field;
pub mod hocf;
pub mod io;
pub mod kernel;
pub mod quad;
pub mod signal;
pub mod simulator;
pub mod string_example;
pub mod system;
pub mod transforms;

pub use error::{HocfError, Result};
pub use fde::{
    assemble_raw_fde, boundary_matrix, fde_residual, fde_residual_series, raw_fde_residual,
    raw_fde_residual_series, reduce_to_canonical, AlphaMeasure, BoundaryMatrix, CanonicalFDE,
    RawFDE,
};
pub use field::CoefficientField;
pub use hocf::{simulate_hocf, HocfSystem, HocfTrajectory};
pub use io::FormatError;
pub use kernel::{kernel_convolve, solve_kernels, solve_kernels_capped, KernelTable};
pub use signal::Signal;
pub use simulator::{
    observability_map, simulate_backward, simulate_forward, simulate_forward_with, Input,
    ObservabilityState, SimOptions, Trajectory,
};
pub use string_example::StringParams;
pub use system::{
    characteristic_time, to_observability_form, transport_times, validate_system, Branch,
    HyperbolicSystem, StateSnapshot, TransportTimes, ValidatedSystem,
};
pub use transforms::{
    obs_to_observer, obs_to_state, observer_to_obs, parameterize_state_shifted, ObserverState,
};
