use serde::{Deserialize, Serialize};

use crate::quad;

/// Uniformly sampled scalar signal, `values[k] = s(t0 + k dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl Signal {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Self {
        Self { t0, dt, values }
    }

    /// Samples `f` on `len` points starting at `t0`.
    pub fn from_fn(t0: f64, dt: f64, len: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..len).map(|k| f(t0 + k as f64 * dt)).collect();
        Self { t0, dt, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.values.len().saturating_sub(1)) as f64
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Linear interpolation, clamped outside the sampled range.
    pub fn at(&self, t: f64) -> f64 {
        quad::interp(&self.values, self.t0, self.dt, t)
    }

    /// Zero-order hold: the most recent sample at or before `t`.
    pub fn hold(&self, t: f64) -> f64 {
        let s = ((t - self.t0) / self.dt + 1e-9).floor();
        if s <= 0.0 {
            return self.values[0];
        }
        let k = (s as usize).min(self.values.len() - 1);
        self.values[k]
    }
}
