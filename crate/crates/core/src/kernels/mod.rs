//! The biharmonic heat kernel pₙ(t, x) = ᾱₙ t^{−n/4} fₙ(|x|/t^{1/4}), the damped 1-D kernel Q,
//! Duhamel integrals and a Picard mild-solution solver.
//!
//! fₙ(s) = ∫₀^∞ e^{−ϱ⁴} ϱ^{n−1} Λ_ν(sϱ) dϱ with Λ_ν(x) = J_ν(x)/x^ν, ν = (n−2)/2, which is
//! the profile s^{1−n}∫e^{−ϱ⁴}(sϱ)^{n/2}J_ν(sϱ)dϱ written without the removable s = 0 singularity.

pub mod convolve;
pub mod duhamel;
pub mod mild;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{bessel_j_reduced, gamma, sphere_area};

pub use convolve::{fourier_cell_weights, heat_convolve, heat_weights};
pub use duhamel::{duhamel_1d, q_kernel};
pub use mild::{mild_solve, MildOptions, MildSolution};

/// e^{−ϱ⁴} < 1e−300 beyond this.
const RHO_MAX: f64 = 5.0;

/// ᾱₙ = (2π)^{−n/2}, the normalization making ∫pₙ(t, ·) = 1.
pub fn alpha_bar(n: usize) -> f64 {
    (2.0 * PI).powf(-(n as f64) / 2.0)
}

/// fₙ(s) by adaptive quadrature; fₙ(0) = Γ(n/4)/(4·2^ν Γ(n/2)).
pub fn f_n(n: usize, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("dimension must be ≥ 1".into()));
    }
    if s < 0.0 || !s.is_finite() {
        return Err(Error::Domain(format!("profile argument {s} must be ≥ 0")));
    }
    let nf = n as f64;
    let nu = (nf - 2.0) / 2.0;
    if s == 0.0 {
        return Ok(gamma(nf / 4.0) / 4.0 / (2f64.powf(nu) * gamma(nf / 2.0)));
    }
    // Fixed Kronrod panels of at most one radian of oscillation; the integrand is entire and
    // damped, so this is accurate to rounding without adaptivity.
    let width = (1.0 / s).min(0.25);
    let panels = (RHO_MAX / width).ceil() as usize;
    let h = RHO_MAX / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        for (r, w) in quad::kronrod_nodes(k as f64 * h, (k + 1) as f64 * h) {
            total += w * (-r.powi(4)).exp() * r.powi(n as i32 - 1) * bessel_j_reduced(nu, s * r);
        }
    }
    Ok(total)
}

/// Sampled fₙ and fₙ₊₂ on [0, S] with cubic Hermite evaluation (f′ₙ = −s fₙ₊₂).
#[derive(Debug, Clone, Serialize)]
pub struct KernelTable {
    pub n: usize,
    pub s_max: f64,
    pub step: f64,
    pub f: Vec<f64>,
    pub f_next: Vec<f64>,
    pub alpha_bar: f64,
    /// ᾱₙ|S^{n−1}|∫₀^S fₙ(s)s^{n−1}ds (≈ 1).
    pub mass: f64,
    /// ᾱₙ|S^{n−1}|∫₀^S |fₙ(s)|s^{n−1}ds, the L¹ norm of pₙ(1, ·).
    pub abs_mass: f64,
    pub decay_k: f64,
    pub decay_mu: f64,
}

impl KernelTable {
    pub fn build(n: usize, s_max: f64, step: f64) -> Result<Self> {
        if !(s_max > 0.0 && step > 0.0) {
            return Err(Error::Argument("need S > 0 and step > 0".into()));
        }
        let m = (s_max / step).round() as usize;
        let step = s_max / m as f64;
        let mut f = Vec::with_capacity(m + 1);
        let mut f_next = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let s = i as f64 * step;
            f.push(f_n(n, s)?);
            f_next.push(f_n(n + 2, s)?);
        }
        let ab = alpha_bar(n);
        let area = sphere_area(n);
        let w: Vec<f64> = (0..=m).map(|i| (i as f64 * step).powi(n as i32 - 1)).collect();
        let moment: Vec<f64> = f.iter().zip(&w).map(|(a, b)| a * b).collect();
        let abs_moment: Vec<f64> = f.iter().zip(&w).map(|(a, b)| a.abs() * b).collect();
        let mass = ab * area * quad::simpson(&moment, step);
        let abs_mass = ab * area * quad::simpson(&abs_moment, step);
        let (decay_k, decay_mu) = fit_decay(&f, step);
        Ok(Self { n, s_max, step, f, f_next, alpha_bar: ab, mass, abs_mass, decay_k, decay_mu })
    }

    /// fₙ(s); zero beyond the table (where the envelope is below K e^{−μS^{4/3}}).
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.abs();
        if s >= self.s_max {
            return 0.0;
        }
        let x = s / self.step;
        let i = (x.floor() as usize).min(self.f.len() - 2);
        let u = x - i as f64;
        let h = self.step;
        let (s0, s1) = (i as f64 * h, (i + 1) as f64 * h);
        let (d0, d1) = (-s0 * self.f_next[i], -s1 * self.f_next[i + 1]);
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        h00 * self.f[i] + h10 * h * d0 + h01 * self.f[i + 1] + h11 * h * d1
    }

    /// pₙ(t, x) for |x| = dist.
    pub fn p(&self, t: f64, dist: f64) -> f64 {
        let q = t.powf(0.25);
        self.alpha_bar * q.powi(-(self.n as i32)) * self.eval(dist / q)
    }

    pub fn envelope(&self, s: f64) -> f64 {
        self.decay_k * (-self.decay_mu * s.powf(4.0 / 3.0)).exp()
    }

    /// Number of sign changes of fₙ on the table (ignoring values below 1e−14).
    pub fn sign_changes(&self) -> usize {
        let mut last = 0.0f64;
        let mut count = 0;
        for &v in &self.f {
            if v.abs() < 1e-14 {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// max over s ∈ {..} of |f′ₙ(s) + s fₙ₊₂(s)| with f′ₙ from a centred difference of fresh quadratures.
    pub fn recurrence_residual(&self, points: &[f64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &s in points {
            let h = 1e-3;
            let d = (f_n(self.n, s + h)? - f_n(self.n, s - h)?) / (2.0 * h);
            worst = worst.max((d + s * f_n(self.n + 2, s)?).abs());
        }
        Ok(worst)
    }
}

/// Envelope K e^{−μ s^{4/3}}: μ is 0.9 of the least-squares slope through the local maxima of
/// |f| above 1e−12, and K the smallest constant covering every sample.
fn fit_decay(f: &[f64], step: f64) -> (f64, f64) {
    let mut pts = vec![];
    for i in 1..f.len() - 1 {
        let a = f[i].abs();
        if a > 1e-12 && a >= f[i - 1].abs() && a >= f[i + 1].abs() {
            pts.push(((i as f64 * step).powf(4.0 / 3.0), a.ln()));
        }
    }
    let mu = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (-0.9 * num / den).max(1e-3)
    } else {
        0.1
    };
    let k = f
        .iter()
        .enumerate()
        .map(|(i, v)| v.abs() * (mu * (i as f64 * step).powf(4.0 / 3.0)).exp())
        .fold(0.0, f64::max);
    (k, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_at_origin() {
        let f1 = f_n(1, 0.0).unwrap();
        assert!((f1 - (2.0 / PI).sqrt() * gamma(1.25)).abs() < 1e-14);
        assert!((f1 - 0.723_204).abs() < 1e-6);
        // the quadrature agrees with the closed form near 0
        for n in 1..=5 {
            let a = f_n(n, 1e-6).unwrap();
            assert!((a - f_n(n, 0.0).unwrap()).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn one_dimensional_profile_is_a_cosine_transform() {
        for &s in &[0.5, 2.0, 7.0] {
            let direct = quad::integrate(|r| (-r.powi(4)).exp() * (s * r).cos(), 0.0, RHO_MAX, 1e-15, 1e-13).unwrap();
            let v = f_n(1, s).unwrap();
            assert!((v - (2.0 / PI).sqrt() * direct).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn small_table() {
        let t = KernelTable::build(1, 20.0, 0.05).unwrap();
        assert!((t.mass - 1.0).abs() < 1e-6, "{}", t.mass);
        assert!(t.sign_changes() >= 1);
        assert!(t.abs_mass > 1.0);
        assert!(t.decay_mu > 0.0);
        for (i, v) in t.f.iter().enumerate() {
            assert!(v.abs() <= t.envelope(i as f64 * t.step) * (1.0 + 1e-12));
        }
        let mid = t.eval(1.025);
        assert!((mid - f_n(1, 1.025).unwrap()).abs() < 1e-8);
    }
}
