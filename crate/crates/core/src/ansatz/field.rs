//! Radial grid functions with finite-difference derivative stencils.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Seven-point centred stencils: sixth order for ∂, ∂², fourth order for ∂³, ∂⁴.
const D1: [f64; 7] = [-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0];
const D2: [f64; 7] = [2.0 / 180.0, -27.0 / 180.0, 270.0 / 180.0, -490.0 / 180.0, 270.0 / 180.0, -27.0 / 180.0, 2.0 / 180.0];
const D3: [f64; 7] = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];
const D4: [f64; 7] = [-1.0 / 6.0, 2.0, -13.0 / 2.0, 28.0 / 3.0, -13.0 / 2.0, 2.0, -1.0 / 6.0];

/// Values u(rᵢ) at rᵢ = i·dx, i = 0..=N (the origin is stored; the N nodes on (0, R] carry the
/// data). Derivatives use the even reflections u(−r) = u(r) at the origin and
/// u(R + r) = u(R − r) at the outer end, which enforce u_r = u_rrr = 0 at both ends.
#[derive(Debug, Clone, Serialize)]
pub struct RadialField {
    pub dx: f64,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(dx: f64, values: Vec<f64>) -> Self {
        Self { dx, values }
    }

    pub fn from_fn(dx: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Self {
        Self { dx, values: (0..=nodes).map(|i| f(i as f64 * dx)).collect() }
    }

    pub fn zeros_like(&self) -> Self {
        Self { dx: self.dx, values: vec![0.0; self.values.len()] }
    }

    /// Number of nodes on (0, R].
    pub fn nodes(&self) -> usize {
        self.values.len() - 1
    }

    pub fn radius(&self) -> f64 {
        self.dx * self.nodes() as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    fn at(&self, k: i64) -> f64 {
        let n = self.nodes() as i64;
        let j = if k < 0 {
            -k
        } else if k > n {
            2 * n - k
        } else {
            k
        };
        self.values[j as usize]
    }

    /// Stencil applied in difference form, so constants (even stencils) and locally even
    /// data (odd stencils) give exact zeros.
    fn apply(&self, i: usize, st: &[f64; 7]) -> f64 {
        let i = i as i64;
        let odd = st[3] == 0.0 && st[0] == -st[6];
        let u0 = self.at(i);
        (1..=3)
            .map(|k| {
                let (a, b) = (self.at(i + k), self.at(i - k));
                if odd {
                    st[3 + k as usize] * (a - b)
                } else {
                    st[3 + k as usize] * ((a - u0) + (b - u0))
                }
            })
            .sum()
    }

    /// Derivative of order 1..=4 at node i.
    pub fn derivative(&self, i: usize, order: usize) -> f64 {
        let h = self.dx;
        match order {
            0 => self.values[i],
            1 => self.apply(i, &D1) / h,
            2 => self.apply(i, &D2) / (h * h),
            3 => self.apply(i, &D3) / (h * h * h),
            4 => self.apply(i, &D4) / (h * h * h * h),
            _ => panic!("derivative order {order} not supported"),
        }
    }

    /// Per-node jets (u, u_r, …, u_rrrr) from the stencils.
    pub fn jets(&self) -> Vec<Jet> {
        (0..self.values.len())
            .map(|i| Jet([0, 1, 2, 3, 4].map(|k| self.derivative(i, k))))
            .collect()
    }

    pub fn check_aligned(&self, other: &RadialField) -> Result<()> {
        if self.values.len() != other.values.len() || self.dx != other.dx {
            return Err(Error::Argument("fields are on different grids".into()));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup norm over nodes with r in [lo, hi].
    pub fn max_abs_in(&self, lo: f64, hi: f64) -> f64 {
        (0..self.values.len())
            .filter(|&i| (lo..=hi).contains(&self.r(i)))
            .fold(0.0, |m, i| m.max(self.values[i].abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { dx: self.dx, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn axpy(&self, a: f64, other: &RadialField) -> Self {
        Self {
            dx: self.dx,
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_exact_on_quartics() {
        let p = |x: f64| 0.3 - 1.2 * x + 0.7 * x * x - 0.25 * x.powi(3) + 0.05 * x.powi(4);
        let f = RadialField::from_fn(0.1, 200, p);
        let i = 100;
        let x = f.r(i);
        let exact = [
            -1.2 + 1.4 * x - 0.75 * x * x + 0.2 * x.powi(3),
            1.4 - 1.5 * x + 0.6 * x * x,
            -1.5 + 1.2 * x,
            1.2,
        ];
        for k in 1..=4 {
            let d = f.derivative(i, k);
            assert!((d - exact[k - 1]).abs() < 1e-8 * exact[k - 1].abs().max(1.0), "order {k}: {d}");
        }
    }

    #[test]
    fn even_reflection_at_origin() {
        let f = RadialField::from_fn(0.05, 100, |r| (r * r).cos());
        assert!(f.derivative(0, 1).abs() < 1e-15);
        assert!(f.derivative(0, 3).abs() < 1e-15);
        assert!((f.derivative(0, 2)).abs() < 1e-6);
    }
}
