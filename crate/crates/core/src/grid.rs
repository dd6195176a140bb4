//! Uniform node grids and piecewise-linear grid functions on [0, 1].

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error("value at node {index} is {value}; grid functions must be finite and nonnegative")]
    BadValue { index: usize, value: f64 },
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
}

/// `n` equally spaced nodes `t_i = i / (n - 1)`.
pub fn uniform_nodes(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 * h }).collect()
}

/// Trapezoid weights on the uniform grid; they integrate the linear
/// interpolant exactly.
pub fn trapezoid_weights(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() < 2 {
            return Err(GridError::TooSmall(values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(GridError::BadValue { index, value });
        }
        Ok(Self {
            nodes: uniform_nodes(values.len()),
            values,
        })
    }

    /// Samples `f` at the `n` uniform nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::new(uniform_nodes(n.max(2)).into_iter().map(f).collect())
    }

    pub fn constant(n: usize, value: f64) -> Result<Self, GridError> {
        Self::new(vec![value; n.max(2)])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.len() - 1) as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Integral of the linear interpolant over [0, 1].
    pub fn integral(&self) -> f64 {
        let h = self.spacing();
        let n = self.len();
        let inner: f64 = self.values[1..n - 1].iter().sum();
        h * (inner + 0.5 * (self.values[0] + self.values[n - 1]))
    }

    /// Linear interpolation at `t`, clamped to [0, 1].
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.len();
        let x = t.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (x.floor() as usize).min(n - 2);
        let theta = x - i as f64;
        (1.0 - theta) * self.values[i] + theta * self.values[i + 1]
    }

    /// Minimum of the interpolant over [a, b].
    pub fn min_on(&self, a: f64, b: f64) -> f64 {
        let mut m = self.interpolate(a).min(self.interpolate(b));
        for (t, v) in self.nodes.iter().zip(&self.values) {
            if *t > a && *t < b {
                m = m.min(*v);
            }
        }
        m
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, GridError> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_values() {
        assert_eq!(GridFunction::new(vec![1.0]), Err(GridError::TooSmall(1)));
        assert!(matches!(
            GridFunction::new(vec![0.0, -1.0, 0.0]),
            Err(GridError::BadValue { index: 1, .. })
        ));
        assert!(GridFunction::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn interpolation_and_integral() {
        let u = GridFunction::from_fn(5, |t| t).unwrap();
        assert_eq!(u.interpolate(0.3), 0.3);
        assert!((u.integral() - 0.5).abs() < 1e-15);
        let v = GridFunction::from_fn(3, |t| t * (1.0 - t)).unwrap();
        assert_eq!(v.min_on(0.25, 0.75), 0.125);
    }
}
