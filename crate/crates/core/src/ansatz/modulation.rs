//! Interface position ρ(t) = γₙ(t) + h(t) and the Λ-norm of h.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry;

/// Where the unperturbed interface sits.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum Base {
    /// The shrinking/expanding Willmore sphere γₙ(t).
    Willmore,
    /// A fixed radius (the stationary dimensions n = 1, 3).
    Fixed(f64),
}

#[derive(Debug, Clone, Serialize)]
pub enum Perturbation {
    Zero,
    /// Samples (t, h, h′) on an increasing t grid; h is cubic-Hermite interpolated, h′ linearly.
    Table { t: Vec<f64>, h: Vec<f64>, dh: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulationState {
    pub n: usize,
    pub base: Base,
    pub h: Perturbation,
}

impl ModulationState {
    pub fn willmore(n: usize) -> Self {
        Self { n, base: Base::Willmore, h: Perturbation::Zero }
    }

    pub fn fixed(n: usize, radius: f64) -> Self {
        Self { n, base: Base::Fixed(radius), h: Perturbation::Zero }
    }

    pub fn with_table(mut self, t: Vec<f64>, h: Vec<f64>, dh: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.len() != h.len() || t.len() != dh.len() || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("modulation table needs ≥2 increasing samples".into()));
        }
        self.h = Perturbation::Table { t, h, dh };
        Ok(self)
    }

    /// (h(t), h′(t)).
    pub fn perturbation(&self, tt: f64) -> Result<(f64, f64)> {
        match &self.h {
            Perturbation::Zero => Ok((0.0, 0.0)),
            Perturbation::Table { t, h, dh } => {
                if tt < t[0] || tt > t[t.len() - 1] {
                    return Err(Error::Domain(format!("t = {tt} outside the modulation table")));
                }
                let i = t.partition_point(|&s| s <= tt).clamp(1, t.len() - 1) - 1;
                let w = t[i + 1] - t[i];
                let s = (tt - t[i]) / w;
                let (h00, h10, h01, h11) = (
                    (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
                    s * (1.0 - s) * (1.0 - s),
                    s * s * (3.0 - 2.0 * s),
                    s * s * (s - 1.0),
                );
                let hv = h00 * h[i] + h10 * w * dh[i] + h01 * h[i + 1] + h11 * w * dh[i + 1];
                Ok((hv, (1.0 - s) * dh[i] + s * dh[i + 1]))
            }
        }
    }

    /// (ρ(t), ρ′(t)).
    pub fn rho(&self, t: f64) -> Result<(f64, f64)> {
        let (g, dg) = match self.base {
            Base::Willmore => (geometry::gamma_n(self.n, t)?, geometry::gamma_n_prime(self.n, t)?),
            Base::Fixed(r) => (r, 0.0),
        };
        let (h, dh) = self.perturbation(t)?;
        Ok((g + h, dg + dh))
    }

    /// sup|h| + sup (|t|/log|t|)|h′| over the samples with t ≤ −1 (0 for h ≡ 0).
    pub fn lambda_norm(&self) -> f64 {
        match &self.h {
            Perturbation::Zero => 0.0,
            Perturbation::Table { t, h, dh } => {
                let idx = || (0..t.len()).filter(|&i| t[i].abs() >= 1.0 + 1e-12);
                let a = idx().fold(0.0f64, |m, i| m.max(h[i].abs()));
                let b = idx().fold(0.0f64, |m, i| m.max(t[i].abs() / t[i].abs().ln() * dh[i].abs()));
                a + b
            }
        }
    }
}
