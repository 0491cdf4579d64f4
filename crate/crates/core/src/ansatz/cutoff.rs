//! Smooth cut-off χ: 0 on (0, δ₀/2], 1 on [δ₀, ∞), C^∞ in between.

use crate::hermite::QuinticHermite;
use crate::jet::Jet;
use crate::quad;

const TABLE_CELLS: usize = 2000;

/// χ(r) = S((r − δ₀/2)/(δ₀/2)), S(x) = ∫₀ˣψ / ∫₀¹ψ with ψ(x) = exp(−1/(x(1−x))).
#[derive(Debug, Clone)]
pub struct CutOff {
    pub delta0: f64,
    norm: f64,
    table: QuinticHermite,
}

/// Jet of ψ at x ∈ (0, 1) (orders 0–4).
fn bump_jet(x: f64) -> Jet {
    if x <= 0.0 || x >= 1.0 {
        return Jet::ZERO;
    }
    let xv = Jet::var(x);
    let p = xv - xv * xv;
    let q = -p.powi(-1);
    let e = q.v().exp();
    q.compose([e; 5])
}

impl CutOff {
    pub fn new(delta0: f64) -> Self {
        assert!(delta0 > 0.0, "δ₀ must be positive");
        let h = 1.0 / TABLE_CELLS as f64;
        let mut f = vec![0.0; TABLE_CELLS + 1];
        for i in 0..TABLE_CELLS {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            f[i + 1] = f[i] + quad::gk15(&mut |x| bump_jet(x).v(), a, b).0;
        }
        let norm = f[TABLE_CELLS];
        let xs = (0..=TABLE_CELLS).map(|i| i as f64 * h);
        let d1: Vec<f64> = xs.clone().map(|x| bump_jet(x).v() / norm).collect();
        let d2: Vec<f64> = xs.map(|x| bump_jet(x).d(1) / norm).collect();
        let vals: Vec<f64> = f.iter().map(|v| v / norm).collect();
        Self { delta0, norm, table: QuinticHermite::new(0.0, h, vals, d1, d2) }
    }

    /// Jet of χ at r (orders 0–4, analytic derivatives).
    pub fn jet(&self, r: f64) -> Jet {
        let a = 0.5 * self.delta0;
        let x = (r - a) / a;
        if x <= 0.0 {
            return Jet::ZERO;
        }
        if x >= 1.0 {
            return Jet::constant(1.0);
        }
        let b = bump_jet(x);
        let s = 1.0 / a;
        Jet([
            self.table.eval(x),
            b.v() / self.norm * s,
            b.d(1) / self.norm * s * s,
            b.d(2) / self.norm * s.powi(3),
            b.d(3) / self.norm * s.powi(4),
        ])
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.jet(r).v()
    }
}

impl Default for CutOff {
    fn default() -> Self {
        Self::new(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus_and_smoothness() {
        let c = CutOff::default();
        assert_eq!(c.eval(0.1), 0.0);
        assert_eq!(c.eval(0.25), 0.0);
        assert_eq!(c.eval(0.5), 1.0);
        assert!((c.eval(0.375) - 0.5).abs() < 1e-12);
        // table derivative agrees with the analytic one, and differences of each order
        // reproduce the next order
        for &r in &[0.26, 0.3, 0.375, 0.44, 0.49] {
            let j = c.jet(r);
            for k in 0..4 {
                let h = 1e-5;
                let fd = (c.jet(r + h).d(k) - c.jet(r - h).d(k)) / (2.0 * h);
                assert!((fd - j.d(k + 1)).abs() < 1e-4 * j.d(k + 1).abs().max(1.0), "r={r} k={k}");
            }
        }
        // no jumps at the junctions
        for &r in &[0.25, 0.5] {
            for k in 0..5 {
                assert!((c.jet(r - 1e-9).d(k) - c.jet(r + 1e-9).d(k)).abs() < 1e-4);
            }
        }
    }
}
