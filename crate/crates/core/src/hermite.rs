//! Piecewise quintic Hermite interpolation on a uniform grid.

/// Uniform-grid quintic Hermite interpolant built from (f, f′, f″) at every node.
#[derive(Debug, Clone)]
pub struct QuinticHermite {
    x0: f64,
    h: f64,
    f: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl QuinticHermite {
    pub fn new(x0: f64, h: f64, f: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Self {
        assert!(f.len() >= 2 && f.len() == d1.len() && f.len() == d2.len());
        Self { x0, h, f, d1, d2 }
    }

    pub fn x_min(&self) -> f64 {
        self.x0
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.f.len() - 1) as f64
    }

    /// Value and first derivative at x (clamped into the table).
    pub fn eval2(&self, x: f64) -> (f64, f64) {
        let n = self.f.len();
        let s = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let h = self.h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let b = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            0.5 * t3 - t4 + 0.5 * t5,
        ];
        let db = [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            1.5 * t2 - 4.0 * t3 + 2.5 * t4,
        ];
        let c = [
            self.f[i],
            h * self.d1[i],
            h * h * self.d2[i],
            self.f[i + 1],
            h * self.d1[i + 1],
            h * h * self.d2[i + 1],
        ];
        let v: f64 = b.iter().zip(&c).map(|(b, c)| b * c).sum();
        let d: f64 = db.iter().zip(&c).map(|(b, c)| b * c).sum();
        (v, d / h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval2(x).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quintics_exactly() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) - 0.1 * x.powi(5);
        let dp = |x: f64| -2.0 + 1.5 * x * x - 0.5 * x.powi(4);
        let ddp = |x: f64| 3.0 * x - 2.0 * x.powi(3);
        let xs: Vec<f64> = (0..6).map(|i| -1.0 + 0.4 * i as f64).collect();
        let q = QuinticHermite::new(
            -1.0,
            0.4,
            xs.iter().map(|&x| p(x)).collect(),
            xs.iter().map(|&x| dp(x)).collect(),
            xs.iter().map(|&x| ddp(x)).collect(),
        );
        for k in 0..50 {
            let x = -1.0 + 2.0 * k as f64 / 49.0;
            let (v, d) = q.eval2(x);
            assert!((v - p(x)).abs() < 1e-13);
            assert!((d - dp(x)).abs() < 1e-12);
        }
    }
}
