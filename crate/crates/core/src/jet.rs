//! Truncated derivative jets (f, f′, f″, f‴, f⁗) with exact product and chain rules.
//!
//! The ansatz is assembled from tabulated layers, the cut-off and powers of r; carrying
//! derivatives analytically avoids the finite-difference noise that would swamp the
//! small error field E.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet(pub [f64; 5]);

impl Jet {
    pub const ZERO: Jet = Jet([0.0; 5]);

    pub fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0, 0.0, 0.0])
    }

    /// The independent variable itself.
    pub fn var(x: f64) -> Self {
        Jet([x, 1.0, 0.0, 0.0, 0.0])
    }

    pub fn v(&self) -> f64 {
        self.0[0]
    }

    pub fn d(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn scale(self, c: f64) -> Self {
        Jet(self.0.map(|v| v * c))
    }

    /// Composition g∘self given g and its first four derivatives at self.v() (Faà di Bruno).
    pub fn compose(self, g: [f64; 5]) -> Self {
        let [_, u1, u2, u3, u4] = self.0;
        Jet([
            g[0],
            g[1] * u1,
            g[2] * u1 * u1 + g[1] * u2,
            g[3] * u1 * u1 * u1 + 3.0 * g[2] * u1 * u2 + g[1] * u3,
            g[4] * u1.powi(4)
                + 6.0 * g[3] * u1 * u1 * u2
                + g[2] * (3.0 * u2 * u2 + 4.0 * u1 * u3)
                + g[1] * u4,
        ])
    }

    /// x^k for a variable jet x (any integer k, x ≠ 0 if k < 0).
    pub fn powi(self, k: i32) -> Self {
        let x = self.v();
        let kf = k as f64;
        let g = [
            x.powi(k),
            kf * x.powi(k - 1),
            kf * (kf - 1.0) * x.powi(k - 2),
            kf * (kf - 1.0) * (kf - 2.0) * x.powi(k - 3),
            kf * (kf - 1.0) * (kf - 2.0) * (kf - 3.0) * x.powi(k - 4),
        ];
        self.compose(g)
    }

    /// Drops one order: the jet of the derivative (top entry unknown, set to 0).
    pub fn derivative(self) -> Self {
        let a = self.0;
        Jet([a[1], a[2], a[3], a[4], 0.0])
    }

    /// Radial Laplacian value f″ + (n−1)/r f′ at radius r.
    pub fn laplacian(&self, n: usize, r: f64) -> f64 {
        self.0[2] + (n as f64 - 1.0) / r * self.0[1]
    }

    /// Jet (up to order 2) of the radial Laplacian; orders 3–4 are not available.
    pub fn laplacian_jet(&self, n: usize, r: f64) -> [f64; 3] {
        let m = n as f64 - 1.0;
        let a = self.0;
        [
            a[2] + m / r * a[1],
            a[3] + m * (a[2] / r - a[1] / (r * r)),
            a[4] + m * (a[3] / r - 2.0 * a[2] / (r * r) + 2.0 * a[1] / (r * r * r)),
        ]
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut r = self.0;
        for (a, b) in r.iter_mut().zip(o.0) {
            *a += b;
        }
        Jet(r)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.map(|v| -v))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        Jet([
            a[0] * b[0],
            a[1] * b[0] + a[0] * b[1],
            a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
            a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3],
            a[4] * b[0] + 4.0 * a[3] * b[1] + 6.0 * a[2] * b[2] + 4.0 * a[1] * b[3] + a[0] * b[4],
        ])
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        let mut r = self.0;
        r[0] += c;
        Jet(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_chain_rule_match_closed_forms() {
        let x = 0.7;
        // sin(x²)·x⁻²
        let x2 = Jet::var(x) * Jet::var(x);
        let u = x2.v();
        let s = x2.compose([u.sin(), u.cos(), -u.sin(), -u.cos(), u.sin()]);
        let f = s * Jet::var(x).powi(-2);
        // Reference by high-order finite differences of the closed form.
        let g = |t: f64| (t * t).sin() / (t * t);
        let h = 1e-2;
        let d1 = (g(x - 2.0 * h) - 8.0 * g(x - h) + 8.0 * g(x + h) - g(x + 2.0 * h)) / (12.0 * h);
        let d4 = (g(x - 2.0 * h) - 4.0 * g(x - h) + 6.0 * g(x) - 4.0 * g(x + h) + g(x + 2.0 * h)) / h.powi(4);
        assert!((f.v() - g(x)).abs() < 1e-15);
        assert!((f.d(1) - d1).abs() < 1e-6);
        assert!((f.d(4) - d4).abs() < 1e-2 * d4.abs().max(1.0));
    }
}
