//! Quadrature and finite differences on uniform grids.
//!
//! Cell integrals use the four-point cubic rule (exact for cubics), with
//! one-sided variants in the boundary cells. Derivatives use fourth-order
//! five-point stencils, one-sided at the two outermost nodes on each side.

/// Per-cell coefficients `(first index, weights)` of the cell rule for a grid
/// of `len` points, cell `[i, i+1]`.
fn cell_stencil(len: usize, i: usize) -> (usize, &'static [f64]) {
    const TRAP: [f64; 2] = [0.5, 0.5];
    const Q3_LEFT: [f64; 3] = [5.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0];
    const Q3_RIGHT: [f64; 3] = [-1.0 / 12.0, 8.0 / 12.0, 5.0 / 12.0];
    const C_LEFT: [f64; 4] = [9.0 / 24.0, 19.0 / 24.0, -5.0 / 24.0, 1.0 / 24.0];
    const C_MID: [f64; 4] = [-1.0 / 24.0, 13.0 / 24.0, 13.0 / 24.0, -1.0 / 24.0];
    const C_RIGHT: [f64; 4] = [1.0 / 24.0, -5.0 / 24.0, 19.0 / 24.0, 9.0 / 24.0];
    match len {
        0 | 1 => unreachable!("no cells"),
        2 => (0, &TRAP),
        3 => {
            if i == 0 {
                (0, &Q3_LEFT)
            } else {
                (0, &Q3_RIGHT)
            }
        }
        _ => {
            if i == 0 {
                (0, &C_LEFT)
            } else if i == len - 2 {
                (len - 4, &C_RIGHT)
            } else {
                (i - 1, &C_MID)
            }
        }
    }
}

/// Integrals over each cell `[x_i, x_{i+1}]`; `values.len() - 1` entries.
pub fn cell_integrals(values: &[f64], h: f64) -> Vec<f64> {
    let len = values.len();
    if len < 2 {
        return Vec::new();
    }
    (0..len - 1)
        .map(|i| {
            let (start, w) = cell_stencil(len, i);
            h * w
                .iter()
                .zip(&values[start..start + w.len()])
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .collect()
}

/// Definite integral over the whole grid.
pub fn integrate(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Weights `w` with `Σ w_i f_i = integrate(f, h)` for a grid of `len` points.
pub fn weights(len: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; len];
    if len < 2 {
        return w;
    }
    for i in 0..len - 1 {
        let (start, coeffs) = cell_stencil(len, i);
        for (k, c) in coeffs.iter().enumerate() {
            w[start + k] += h * c;
        }
    }
    w
}

/// `F[i] = ∫_{x_0}^{x_i} f`.
pub fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    out.push(0.0);
    let mut acc = 0.0;
    for c in cell_integrals(values, h) {
        acc += c;
        out.push(acc);
    }
    out
}

/// `F[i] = ∫_{x_i}^{x_end} f`.
pub fn cumulative_from_right(values: &[f64], h: f64) -> Vec<f64> {
    let cells = cell_integrals(values, h);
    let mut out = vec![0.0; values.len()];
    for i in (0..cells.len()).rev() {
        out[i] = out[i + 1] + cells[i];
    }
    out
}

/// Minimum number of points accepted by [`derivative`].
pub const MIN_DIFF_POINTS: usize = 5;

/// First derivative by fourth-order finite differences.
///
/// Panics if fewer than [`MIN_DIFF_POINTS`] samples are supplied.
pub fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= MIN_DIFF_POINTS, "derivative needs at least 5 samples");
    let f = values;
    let s = 1.0 / (12.0 * h);
    let mut d = vec![0.0; n];
    d[0] = s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for i in 2..n - 2 {
        d[i] = s * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
    let m = n - 1;
    d[m] = s * (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]);
    d[m - 1] = s * (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]);
    d
}

/// `[f, f', …, f^(order)]` by repeated differentiation.
pub fn derivative_stack(values: &[f64], h: f64, order: usize) -> Vec<Vec<f64>> {
    let mut stack = Vec::with_capacity(order + 1);
    stack.push(values.to_vec());
    for k in 0..order {
        let next = derivative(&stack[k], h);
        stack.push(next);
    }
    stack
}

/// Linear interpolation of samples on `x_i = x0 + i h`, clamped at the ends.
pub fn interp(values: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let n = values.len();
    if n == 1 {
        return values[0];
    }
    let s = (x - x0) / h;
    if s <= 0.0 {
        return values[0];
    }
    if s >= (n - 1) as f64 {
        return values[n - 1];
    }
    let i = s.floor() as usize;
    let frac = s - i as f64;
    values[i] + frac * (values[i + 1] - values[i])
}

/// Resamples uniform samples over an interval onto `len` uniform points of
/// the same interval.
pub fn resample(values: &[f64], len: usize) -> Vec<f64> {
    if values.len() == len {
        return values.to_vec();
    }
    let src = (values.len() - 1) as f64;
    let dst = (len.max(2) - 1) as f64;
    (0..len)
        .map(|i| interp(values, 0.0, 1.0, i as f64 * src / dst))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize, a: f64, b: f64) -> (Vec<f64>, f64) {
        let h = (b - a) / (n - 1) as f64;
        ((0..n).map(|i| a + i as f64 * h).collect(), h)
    }

    #[test]
    fn cubic_rule_is_exact_on_cubics() {
        for n in [2usize, 3, 4, 5, 9, 40] {
            let (x, h) = grid(n, -0.5, 1.5);
            let deg = match n {
                2 => 1,
                3 => 2,
                _ => 3,
            };
            let f: Vec<f64> = x.iter().map(|&t| t.powi(deg) - 2.0 * t + 0.3).collect();
            let exact = |t: f64| t.powi(deg + 1) / (deg + 1) as f64 - t * t + 0.3 * t;
            assert_abs_diff_eq!(integrate(&f, h), exact(1.5) - exact(-0.5), epsilon = 1e-13);
            let c = cumulative(&f, h);
            for (i, &xi) in x.iter().enumerate() {
                assert_abs_diff_eq!(c[i], exact(xi) - exact(-0.5), epsilon = 1e-13);
            }
            let r = cumulative_from_right(&f, h);
            assert_abs_diff_eq!(r[0], c[n - 1], epsilon = 1e-13);
        }
    }

    #[test]
    fn weights_match_integrate() {
        let (x, h) = grid(17, 0.0, 2.0);
        let f: Vec<f64> = x.iter().map(|t| (3.0 * t).sin()).collect();
        let w = weights(17, h);
        let s: f64 = w.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(s, integrate(&f, h), epsilon = 1e-14);
        assert_abs_diff_eq!(s, (1.0 - 6.0_f64.cos()) / 3.0, epsilon = 1e-4);
    }

    #[test]
    fn derivative_exact_on_quartics() {
        let (x, h) = grid(11, 0.0, 1.0);
        let f: Vec<f64> = x.iter().map(|t| t.powi(4) - t.powi(2) + 1.0).collect();
        let d = derivative(&f, h);
        for (xi, di) in x.iter().zip(&d) {
            assert_abs_diff_eq!(*di, 4.0 * xi.powi(3) - 2.0 * xi, epsilon = 1e-10);
        }
    }

    #[test]
    fn derivative_converges_at_fourth_order() {
        let err = |n: usize| {
            let (x, h) = grid(n, 0.0, 2.0);
            let f: Vec<f64> = x.iter().map(|t| t.exp()).collect();
            derivative(&f, h)
                .iter()
                .zip(&x)
                .map(|(d, t)| (d - t.exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(33) / err(65);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn interp_and_resample() {
        let v = [0.0, 1.0, 4.0];
        assert_abs_diff_eq!(interp(&v, 0.0, 0.5, 0.25), 0.5);
        assert_abs_diff_eq!(interp(&v, 0.0, 0.5, 2.0), 4.0);
        assert_abs_diff_eq!(interp(&v, 0.0, 0.5, -1.0), 0.0);
        assert_eq!(resample(&v, 5), vec![0.0, 0.5, 1.0, 2.5, 4.0]);
    }
}
