//! Natural cubic spline, used for user-tabulated potentials.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at the knots
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::Argument("spline needs at least 3 matching samples".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("spline abscissae must be strictly increasing".into()));
        }
        // Tridiagonal system for interior second derivatives (Thomas algorithm; diagonally dominant).
        let mut a = vec![0.0; n];
        let mut b = vec![1.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        }
        Ok(Self { x, y, m })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Derivative of order 0, 1 or 2 at `t`; `None` outside the knot range.
    pub fn eval(&self, t: f64, order: usize) -> Option<f64> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&t) {
            return None;
        }
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k => (k - 1).min(self.x.len() - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        Some(match order {
            0 => a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0,
            1 => (y1 - y0) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0,
            2 => a * m0 + b * m1,
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_converges() {
        let x: Vec<f64> = (0..201).map(|i| -2.0 + 0.02 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = CubicSpline::natural(x, y).unwrap();
        assert!((s.eval(0.3, 0).unwrap() - 0.3f64.sin()).abs() < 1e-7);
        assert!((s.eval(0.3, 1).unwrap() - 0.3f64.cos()).abs() < 1e-5);
        assert!((s.eval(0.3, 2).unwrap() + 0.3f64.sin()).abs() < 1e-3);
        assert!(s.eval(2.5, 0).is_none());
    }
}
