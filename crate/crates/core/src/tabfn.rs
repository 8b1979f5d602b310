//! Grid-sampled scalar functions: the monotone 1-Lipschitz kind produced by
//! the optimal-prox solver, and general tabulated functions (reconstructed
//! penalties).

use crate::error::{Error, Result};

/// Slack allowed on the increment bounds of a tabulated monotone function.
pub const INCREMENT_TOL: f64 = 1e-10;

/// A non-decreasing 1-Lipschitz function sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct TabulatedMonotoneFn {
    x0: f64,
    step: f64,
    values: Vec<f64>,
}

impl TabulatedMonotoneFn {
    pub fn new(x0: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Config(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::Config(
                "tabulated function needs at least 2 values".into(),
            ));
        }
        for j in 1..values.len() {
            let d = values[j] - values[j - 1];
            if d < -INCREMENT_TOL || d > step + INCREMENT_TOL {
                return Err(Error::Config(format!(
                    "increment {d} at index {j} outside [0, {step}]"
                )));
            }
        }
        Ok(TabulatedMonotoneFn { x0, step, values })
    }

    /// Sample an arbitrary non-decreasing 1-Lipschitz function on a grid.
    pub fn sample(x0: f64, step: f64, n_points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n_points).map(|j| f(x0 + j as f64 * step)).collect();
        Self::new(x0, step, values)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.step
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.values.len() - 1)
    }

    fn end_slope(&self, left: bool) -> f64 {
        let n = self.values.len();
        let raw = if left {
            (self.values[1] - self.values[0]) / self.step
        } else {
            (self.values[n - 1] - self.values[n - 2]) / self.step
        };
        raw.clamp(0.0, 1.0)
    }

    /// Left/right extrapolation slopes (boundary segment slope clamped to [0,1]).
    pub fn extrapolation_slopes(&self) -> (f64, f64) {
        (self.end_slope(true), self.end_slope(false))
    }

    /// Evaluate by linear interpolation; off-grid inputs extrapolate linearly
    /// with the boundary slope clamped to [0,1], preserving the monotone
    /// 1-Lipschitz contract.
    pub fn eval(&self, y: f64) -> f64 {
        let n = self.values.len();
        if y <= self.x0 {
            return self.values[0] + self.end_slope(true) * (y - self.x0);
        }
        let x_last = self.x_max();
        if y >= x_last {
            return self.values[n - 1] + self.end_slope(false) * (y - x_last);
        }
        let t = (y - self.x0) / self.step;
        let j = (t.floor() as usize).min(n - 2);
        let frac = t - j as f64;
        self.values[j] + frac * (self.values[j + 1] - self.values[j])
    }

    /// Two-column CSV body `x,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (j, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.x(j), v));
        }
        out
    }
}

/// A scalar function tabulated on a strictly increasing (not necessarily
/// uniform) grid, evaluated by linear interpolation and linear extension.
#[derive(Debug, Clone)]
pub struct TabulatedFn {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl TabulatedFn {
    pub fn new(x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x.len() != values.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: values.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::Config(
                "tabulated function needs at least 2 knots".into(),
            ));
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("knots must be strictly increasing".into()));
        }
        Ok(TabulatedFn { x, values })
    }

    pub fn eval(&self, y: f64) -> f64 {
        let n = self.x.len();
        if y <= self.x[0] {
            let s = (self.values[1] - self.values[0]) / (self.x[1] - self.x[0]);
            return self.values[0] + s * (y - self.x[0]);
        }
        if y >= self.x[n - 1] {
            let s = (self.values[n - 1] - self.values[n - 2]) / (self.x[n - 1] - self.x[n - 2]);
            return self.values[n - 1] + s * (y - self.x[n - 1]);
        }
        let j = self.x.partition_point(|&v| v <= y) - 1;
        let frac = (y - self.x[j]) / (self.x[j + 1] - self.x[j]);
        self.values[j] + frac * (self.values[j + 1] - self.values[j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.x.iter().zip(&self.values) {
            out.push_str(&format!("{x},{v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_lipschitz_and_decreasing() {
        assert!(TabulatedMonotoneFn::new(0.0, 0.5, vec![0.0, 0.6]).is_err());
        assert!(TabulatedMonotoneFn::new(0.0, 0.5, vec![0.5, 0.0]).is_err());
        assert!(TabulatedMonotoneFn::new(0.0, 0.5, vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn interpolation_and_clamped_extrapolation() {
        // Identity on the grid: extrapolates with slope 1.
        let f = TabulatedMonotoneFn::sample(-1.0, 0.25, 9, |x| x).unwrap();
        assert!((f.eval(0.13) - 0.13).abs() < 1e-15);
        assert!((f.eval(5.0) - 5.0).abs() < 1e-12);
        assert!((f.eval(-5.0) + 5.0).abs() < 1e-12);

        // Constant: flat extrapolation.
        let c = TabulatedMonotoneFn::new(0.0, 1.0, vec![2.0, 2.0, 2.0]).unwrap();
        assert_eq!(c.eval(100.0), 2.0);
        assert_eq!(c.eval(-100.0), 2.0);
    }

    #[test]
    fn tabulated_fn_interpolates() {
        let f = TabulatedFn::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 2.0]).unwrap();
        assert!((f.eval(0.5) - 1.0).abs() < 1e-15);
        assert!((f.eval(2.0) - 2.0).abs() < 1e-15);
        assert!((f.eval(4.0) - 2.0).abs() < 1e-15);
        assert!(TabulatedFn::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }
}
