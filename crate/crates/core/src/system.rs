//! The 2×2 hyperbolic PDE–ODE system class.
//!
//! ```text
//!   ∂z x⁻ − σ⁻(z) ∂t x⁻ = μ⁻(z) x⁺
//!   ∂z x⁺ + σ⁺(z) ∂t x⁺ = μ⁺(z) x⁻             z ∈ [0, 1]
//!   ξ̇ = F ξ + g x⁻(0, t),   x⁺(0, t) = c0ᵀ ξ + q0 x⁻(0, t)
//!   x⁻(1, t) = q1 x⁺(1, t) + b̄1 u(t)
//!   y(t) = m⁺ x⁺(1, t) + d1 u(t)
//! ```
//!
//! The boundary ODE is stored in observability canonical form: `c0 = e1` and
//! `F` is the companion matrix with unit superdiagonal and last row `−fᵀ`.
//! [`to_observability_form`] brings any observable pair into that form.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{HocfError, Result};
use crate::field::CoefficientField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicSystem {
    /// Inverse transport speed of the left-travelling component.
    pub sigma_minus: CoefficientField,
    /// Inverse transport speed of the right-travelling component.
    pub sigma_plus: CoefficientField,
    pub mu_minus: CoefficientField,
    pub mu_plus: CoefficientField,
    /// Order of the boundary ODE.
    pub n: usize,
    /// Negated last row of the companion matrix, `(f_1, …, f_n)`.
    pub f: Vec<f64>,
    /// Input vector of the boundary ODE, `(g_1, …, g_n)`.
    pub g: Vec<f64>,
    pub q0: f64,
    pub q1: f64,
    pub b1_bar: f64,
    pub m_plus: f64,
    pub d1: f64,
}

/// A [`HyperbolicSystem`] whose standing assumptions have been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSystem(HyperbolicSystem);

impl Deref for ValidatedSystem {
    type Target = HyperbolicSystem;

    fn deref(&self) -> &HyperbolicSystem {
        &self.0
    }
}

impl ValidatedSystem {
    pub fn into_inner(self) -> HyperbolicSystem {
        self.0
    }
}

pub fn validate_system(sys: HyperbolicSystem) -> Result<ValidatedSystem> {
    for (name, field) in [
        ("sigma_minus", &sys.sigma_minus),
        ("sigma_plus", &sys.sigma_plus),
    ] {
        if let Some((z, v)) = field
            .grid()
            .iter()
            .zip(field.values())
            .find(|(_, v)| **v <= 0.0)
        {
            return Err(HocfError::PositivityViolation {
                field: name,
                z: *z,
                value: *v,
            });
        }
    }
    if sys.n == 0 {
        return Err(HocfError::DimensionMismatch(
            "ODE order n must be positive".into(),
        ));
    }
    if sys.f.len() != sys.n || sys.g.len() != sys.n {
        return Err(HocfError::DimensionMismatch(format!(
            "n = {} but f has {} and g has {} entries",
            sys.n,
            sys.f.len(),
            sys.g.len()
        )));
    }
    let scalars = [sys.q0, sys.q1, sys.b1_bar, sys.m_plus, sys.d1];
    if sys
        .f
        .iter()
        .chain(&sys.g)
        .chain(&scalars)
        .any(|v| !v.is_finite())
    {
        return Err(HocfError::GridError("non-finite system parameter".into()));
    }
    if sys.q0 == 0.0 {
        return Err(HocfError::ZeroParameter("q0"));
    }
    if sys.m_plus == 0.0 {
        return Err(HocfError::ZeroParameter("m_plus"));
    }
    Ok(ValidatedSystem(sys))
}

/// Selects one of the two transport components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Minus,
    Plus,
}

/// Travel time `γ(z; z0) = ∫_{z0}^{z} σ(ζ) dζ` of the selected branch.
pub fn characteristic_time(sys: &ValidatedSystem, branch: Branch, z0: f64, z: f64) -> Result<f64> {
    for v in [z0, z] {
        if !(0.0..=1.0).contains(&v) {
            return Err(HocfError::DomainError {
                value: v,
                domain: "[0, 1]",
            });
        }
    }
    let sigma = match branch {
        Branch::Minus => &sys.sigma_minus,
        Branch::Plus => &sys.sigma_plus,
    };
    Ok(sigma.integral(z0, z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportTimes {
    pub tau_minus: f64,
    pub tau_plus: f64,
    /// Horizon of the observer form, `tau_minus + tau_plus`.
    pub tau_hat: f64,
}

pub fn transport_times(sys: &ValidatedSystem) -> TransportTimes {
    let tau_minus = sys.sigma_minus.integral(0.0, 1.0);
    let tau_plus = sys.sigma_plus.integral(0.0, 1.0);
    TransportTimes {
        tau_minus,
        tau_plus,
        tau_hat: tau_minus + tau_plus,
    }
}

impl ValidatedSystem {
    pub fn times(&self) -> TransportTimes {
        transport_times(self)
    }

    /// Companion matrix of the boundary ODE.
    pub fn companion(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            m[(i, i + 1)] = 1.0;
        }
        for k in 0..n {
            m[(n - 1, k)] = -self.f[k];
        }
        m
    }

    /// Lower-triangular Toeplitz matrix with `q0` on the diagonal and
    /// `g_1, …, g_{n−1}` on the subdiagonals.
    pub fn d_h(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |r, c| match r.cmp(&c) {
            std::cmp::Ordering::Equal => self.q0,
            std::cmp::Ordering::Greater => self.g[r - c - 1],
            std::cmp::Ordering::Less => 0.0,
        })
    }

    /// `(f_1, …, f_n, 1)`: coefficients of `x⁺(0,·)` and its derivatives in the
    /// input–output relation of the boundary ODE.
    pub fn f_hat(&self) -> Vec<f64> {
        let mut v = self.f.clone();
        v.push(1.0);
        v
    }

    /// Coefficients of `x⁻(0,·)` and its derivatives, so that
    /// `Σ f̂_i x⁺^(i)(0,t) = Σ ĝ_i x⁻^(i)(0,t)`.
    ///
    /// `ĝ_j = g_{n−j} + Σ_k f_k (D_H)_{k−1, j}` for `j < n`, `ĝ_n = q0`.
    pub fn g_hat(&self) -> Vec<f64> {
        let n = self.n;
        let dh = self.d_h();
        let mut v = vec![0.0; n + 1];
        for (j, out) in v.iter_mut().enumerate().take(n) {
            let coupling: f64 = (0..n).map(|k| self.f[k] * dh[(k, j)]).sum();
            *out = self.g[n - j - 1] + coupling;
        }
        v[n] = self.q0;
        v
    }
}

/// Result of [`to_observability_form`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityForm {
    /// Negated last row of the transformed companion matrix.
    pub f: Vec<f64>,
    /// Transformed input vector `O g`.
    pub g_bar: Vec<f64>,
    /// Change of basis `ξ̄ = O ξ` (observability matrix of `(F, c0)`).
    pub basis: DMatrix<f64>,
    /// `O F O⁻¹`.
    pub f_bar: DMatrix<f64>,
}

/// Normalizes an observable pair `(F, c0ᵀ)` to `c̄0 = e1ᵀ`, companion `F̄`.
pub fn to_observability_form(
    f_mat: &DMatrix<f64>,
    g: &[f64],
    c0: &[f64],
) -> Result<ObservabilityForm> {
    let n = f_mat.nrows();
    if f_mat.ncols() != n || g.len() != n || c0.len() != n || n == 0 {
        return Err(HocfError::DimensionMismatch(format!(
            "F is {}x{}, g has {}, c0 has {} entries",
            f_mat.nrows(),
            f_mat.ncols(),
            g.len(),
            c0.len()
        )));
    }
    let mut basis = DMatrix::zeros(n, n);
    let mut row = DVector::from_column_slice(c0).transpose();
    for i in 0..n {
        basis.set_row(i, &row);
        row *= f_mat;
    }
    let scale = basis.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let det = basis.clone().lu().determinant();
    if scale == 0.0 || det.abs() <= 1e-12 * scale.powi(n as i32) {
        return Err(HocfError::NotObservable);
    }
    let inv = basis
        .clone()
        .try_inverse()
        .ok_or(HocfError::NotObservable)?;
    let mut f_bar = &basis * f_mat * inv;
    // Rows 0..n-1 of the companion form are exact unit vectors; clear rounding.
    for i in 0..n - 1 {
        for j in 0..n {
            f_bar[(i, j)] = if j == i + 1 { 1.0 } else { 0.0 };
        }
    }
    let f = (0..n).map(|k| -f_bar[(n - 1, k)]).collect();
    let g_bar = (&basis * DVector::from_column_slice(g))
        .iter()
        .copied()
        .collect();
    Ok(ObservabilityForm {
        f,
        g_bar,
        basis,
        f_bar,
    })
}

/// State `X(t) = (x⁻(·,t), x⁺(·,t), ξ(t))` sampled on a uniform grid of
/// `[0, 1]` with `x_minus.len()` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub x_minus: Vec<f64>,
    pub x_plus: Vec<f64>,
    pub xi: Vec<f64>,
    pub time: f64,
}

impl StateSnapshot {
    pub fn zeros(nz: usize, n: usize) -> Self {
        Self {
            x_minus: vec![0.0; nz],
            x_plus: vec![0.0; nz],
            xi: vec![0.0; n],
            time: 0.0,
        }
    }

    /// Builds a snapshot by sampling profiles on `nz` uniform nodes.
    pub fn from_fns(
        nz: usize,
        x_minus: impl Fn(f64) -> f64,
        x_plus: impl Fn(f64) -> f64,
        xi: Vec<f64>,
    ) -> Self {
        let z = |i: usize| i as f64 / (nz - 1) as f64;
        Self {
            x_minus: (0..nz).map(|i| x_minus(z(i))).collect(),
            x_plus: (0..nz).map(|i| x_plus(z(i))).collect(),
            xi,
            time: 0.0,
        }
    }

    pub fn nz(&self) -> usize {
        self.x_minus.len()
    }

    pub fn dz(&self) -> f64 {
        1.0 / (self.nz() - 1) as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        i as f64 * self.dz()
    }

    pub fn check(&self) -> Result<()> {
        if self.x_minus.len() != self.x_plus.len() {
            return Err(HocfError::GridError(format!(
                "x_minus has {} samples, x_plus has {}",
                self.x_minus.len(),
                self.x_plus.len()
            )));
        }
        if self.x_minus.len() < 2 {
            return Err(HocfError::GridError(
                "snapshot needs at least 2 nodes".into(),
            ));
        }
        Ok(())
    }

    /// Linear resampling of the distributed part onto `nz` nodes.
    pub fn resampled(&self, nz: usize) -> Self {
        Self {
            x_minus: crate::quad::resample(&self.x_minus, nz),
            x_plus: crate::quad::resample(&self.x_plus, nz),
            xi: self.xi.clone(),
            time: self.time,
        }
    }

    /// Discrete L² norm: trapezoid over both distributed components plus the
    /// Euclidean norm of `ξ`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.dz();
        let w = crate::quad::weights(self.nz(), h);
        let dist: f64 = w
            .iter()
            .zip(self.x_minus.iter().zip(&self.x_plus))
            .map(|(w, (a, b))| w * (a * a + b * b))
            .sum();
        let lumped: f64 = self.xi.iter().map(|v| v * v).sum();
        (dist + lumped).sqrt()
    }

    /// `‖self − other‖` in the norm of [`StateSnapshot::l2_norm`]; `other` is
    /// resampled onto this grid if needed.
    pub fn l2_distance(&self, other: &StateSnapshot) -> f64 {
        let other = if other.nz() == self.nz() {
            other.clone()
        } else {
            other.resampled(self.nz())
        };
        let diff = StateSnapshot {
            x_minus: self
                .x_minus
                .iter()
                .zip(&other.x_minus)
                .map(|(a, b)| a - b)
                .collect(),
            x_plus: self
                .x_plus
                .iter()
                .zip(&other.x_plus)
                .map(|(a, b)| a - b)
                .collect(),
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a - b).collect(),
            time: self.time,
        };
        diff.l2_norm()
    }
}
