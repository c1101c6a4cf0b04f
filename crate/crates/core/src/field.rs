//! Piecewise-linear coefficient profiles on the unit interval.

use serde::{Deserialize, Serialize};

use crate::error::{HocfError, Result};

/// A real function on `[0, 1]` given by samples and linear interpolation.
///
/// The grid must start at 0, end at 1 and be strictly increasing. Integrals
/// are evaluated exactly (the trapezoid rule is exact for the interpolant),
/// so characteristic times carry no quadrature error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField", into = "RawField")]
pub struct CoefficientField {
    grid: Vec<f64>,
    values: Vec<f64>,
    /// `cumulative[i] = ∫_0^{grid[i]}` of the interpolant.
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawField {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawField> for CoefficientField {
    type Error = HocfError;

    fn try_from(raw: RawField) -> Result<Self> {
        CoefficientField::new(raw.grid, raw.values)
    }
}

impl From<CoefficientField> for RawField {
    fn from(f: CoefficientField) -> Self {
        RawField {
            grid: f.grid,
            values: f.values,
        }
    }
}

impl CoefficientField {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(HocfError::GridError(format!(
                "need at least 2 grid points, got {}",
                grid.len()
            )));
        }
        if grid.len() != values.len() {
            return Err(HocfError::GridError(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
            return Err(HocfError::GridError(
                "grid must start at 0 and end at 1".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HocfError::GridError(
                "grid must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HocfError::GridError("values must be finite".into()));
        }
        let mut cumulative = Vec::with_capacity(grid.len());
        cumulative.push(0.0);
        for i in 1..grid.len() {
            let cell = 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
            cumulative.push(cumulative[i - 1] + cell);
        }
        Ok(Self {
            grid,
            values,
            cumulative,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![0.0, 1.0], vec![c, c]).expect("constant field is well formed")
    }

    /// Linear profile with `f(0) = at_zero`, `f(1) = at_one`.
    pub fn linear(at_zero: f64, at_one: f64) -> Self {
        Self::new(vec![0.0, 1.0], vec![at_zero, at_one]).expect("linear field is well formed")
    }

    /// Samples `f` on `points` uniformly spaced nodes.
    pub fn from_fn(points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if points < 2 {
            return Err(HocfError::GridError(format!(
                "need at least 2 grid points, got {points}"
            )));
        }
        let grid: Vec<f64> = (0..points)
            .map(|i| i as f64 / (points - 1) as f64)
            .collect();
        let values = grid.iter().map(|&z| f(z)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn locate(&self, z: f64) -> usize {
        // index of the cell [grid[i], grid[i+1]] containing z
        match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&z).expect("finite grid"))
        {
            Ok(i) => i.min(self.grid.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.grid.len() - 2),
        }
    }

    /// Evaluates the interpolant; arguments outside `[0, 1]` are clamped.
    pub fn eval(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, 1.0);
        let i = self.locate(z);
        let (z0, z1) = (self.grid[i], self.grid[i + 1]);
        let s = (z - z0) / (z1 - z0);
        self.values[i] + s * (self.values[i + 1] - self.values[i])
    }

    /// `∫_0^z f`, exact for the interpolant.
    pub fn antiderivative(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, 1.0);
        let i = self.locate(z);
        self.cumulative[i] + 0.5 * (z - self.grid[i]) * (self.values[i] + self.eval(z))
    }

    /// Oriented integral `∫_a^b f`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_malformed_grids() {
        assert!(CoefficientField::new(vec![0.0], vec![1.0]).is_err());
        assert!(CoefficientField::new(vec![0.0, 0.5], vec![1.0, 1.0]).is_err());
        assert!(CoefficientField::new(vec![0.0, 0.6, 0.5, 1.0], vec![1.0; 4]).is_err());
        assert!(CoefficientField::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(CoefficientField::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn integrates_linear_profile_exactly() {
        let f = CoefficientField::linear(1.0, 2.0);
        assert_abs_diff_eq!(f.integral(0.0, 1.0), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.integral(0.25, 0.75), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(f.integral(0.75, 0.25), -0.75, epsilon = 1e-15);
    }

    #[test]
    fn eval_on_nonuniform_grid() {
        let f = CoefficientField::new(vec![0.0, 0.2, 1.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(f.eval(0.1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.eval(0.6), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.eval(1.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.integral(0.0, 1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn serde_validates() {
        let ok: CoefficientField =
            serde_json::from_str(r#"{"grid":[0,1],"values":[1,1]}"#).unwrap();
        assert_eq!(ok.eval(0.3), 1.0);
        let bad = serde_json::from_str::<CoefficientField>(r#"{"grid":[0,0.5],"values":[1,1]}"#);
        assert!(bad.is_err());
    }
}
