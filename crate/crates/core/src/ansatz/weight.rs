//! The weight Φ(t, r) and the associated sup-norm ‖ψ/Φ‖.

use crate::error::{Error, Result};
use crate::geometry;

use super::field::RadialField;

#[derive(Debug, Clone, Copy)]
pub struct Weight {
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    pub delta0: f64,
}

impl Weight {
    pub fn new(n: usize, p: f64, alpha: f64, delta0: f64) -> Result<Self> {
        let nf = n as f64;
        if !(p > nf && p <= nf + 1.0) {
            return Err(Error::Argument(format!("p = {p} not in (n, n+1] for n = {n}")));
        }
        Ok(Self { n, p, alpha, delta0 })
    }

    /// Default exponent p = n + 1.
    pub fn standard(n: usize, alpha: f64, delta0: f64) -> Self {
        Self { n, p: n as f64 + 1.0, alpha, delta0 }
    }

    /// Centre γₙ(t) + log|t|/(4α) of the polynomial window.
    pub fn center(&self, t: f64) -> Result<f64> {
        Ok(geometry::gamma_n(self.n, t)? + t.abs().ln() / (4.0 * self.alpha))
    }

    pub fn peak(&self, t: f64) -> f64 {
        t.abs().ln() / t.abs().sqrt()
    }

    pub fn phi(&self, t: f64, r: f64) -> Result<f64> {
        let peak = self.peak(t);
        if r >= self.delta0 {
            let d = (r - self.center(t)?).abs();
            Ok(peak / (1.0 + d).powf(self.p))
        } else if r >= 0.5 * self.delta0 {
            Ok(peak)
        } else {
            Ok(0.0)
        }
    }

    pub fn sample(&self, t: f64, dx: f64, nodes: usize) -> Result<RadialField> {
        let c = self.center(t)?;
        let peak = self.peak(t);
        Ok(RadialField::from_fn(dx, nodes, |r| {
            if r >= self.delta0 {
                peak / (1.0 + (r - c).abs()).powf(self.p)
            } else if r >= 0.5 * self.delta0 {
                peak
            } else {
                0.0
            }
        }))
    }

    /// sup |ψ|/Φ over the nodes; +∞ if ψ ≠ 0 where Φ = 0.
    pub fn weighted_norm(&self, psi: &RadialField, t: f64) -> Result<f64> {
        let mut m = 0.0f64;
        for i in 0..psi.values.len() {
            let v = psi.values[i].abs();
            if v == 0.0 {
                continue;
            }
            let w = self.phi(t, psi.r(i))?;
            if w == 0.0 {
                return Ok(f64::INFINITY);
            }
            m = m.max(v / w);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_shape() {
        let w = Weight::standard(4, 2f64.sqrt(), 0.5);
        let t = -1e4;
        assert_eq!(w.phi(t, 0.2).unwrap(), 0.0);
        let c = w.center(t).unwrap();
        assert!((w.phi(t, c).unwrap() - t.abs().ln() / 100.0).abs() < 1e-15);
        assert!(Weight::new(4, 4.0, 1.0, 0.5).is_err());
        let phi = w.sample(t, 0.01, 3000).unwrap();
        assert!((w.weighted_norm(&phi, t).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(w.weighted_norm(&phi.zeros_like(), t).unwrap(), 0.0);
        let mut bad = phi.zeros_like();
        bad.values[5] = 1.0;
        assert!(w.weighted_norm(&bad, t).unwrap().is_infinite());
    }
}
