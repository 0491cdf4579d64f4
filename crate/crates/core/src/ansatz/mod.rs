//! The approximate solution z(t, r) built on a moving sphere, the operator F and its
//! variations, the error E = F(z) − ∂ₜz, the weight Φ and the diffuse energy.
//!
//! z = ω̂ + z̃ with ω̂ = ω(r−ρ)χ + χ − 1 and z̃ = (n−1)(n−3)r⁻²ω̃(r−ρ)χ.

pub mod cutoff;
pub mod field;
pub mod modulation;
pub mod ops;
pub mod weight;

use serde::Serialize;

use crate::correction::CorrectionTable;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::layer::LayerTable;
use crate::potential::Potential;

pub use cutoff::CutOff;
pub use field::RadialField;
pub use modulation::ModulationState;
pub use ops::{apply_f, apply_fprime, apply_fsecond, diffuse_energy, nonlinear_n};
pub use weight::Weight;

/// Distance beyond the interface the grid must reach.
pub const COVERAGE_MARGIN: f64 = 30.0;

#[derive(Clone, Copy)]
pub struct Ansatz<'a> {
    pub pot: &'a Potential,
    pub layer: &'a LayerTable,
    pub corr: &'a CorrectionTable,
    pub cutoff: &'a CutOff,
    pub n: usize,
}

/// Pointwise pieces of the ansatz at one radius.
#[derive(Debug, Clone, Copy)]
pub struct Pieces {
    pub omega_hat: Jet,
    pub z_tilde: Jet,
    pub dt_omega_hat: f64,
    pub dt_z_tilde: f64,
    /// χ = 0: z ≡ −1 identically near r.
    pub inert: bool,
}

impl Pieces {
    pub fn z(&self) -> Jet {
        self.omega_hat + self.z_tilde
    }

    pub fn dt_z(&self) -> f64 {
        self.dt_omega_hat + self.dt_z_tilde
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZField {
    pub t: f64,
    pub rho: f64,
    pub rho_prime: f64,
    pub z: RadialField,
    pub dt_z: Vec<f64>,
    #[serde(skip)]
    pub jets: Vec<Jet>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorField {
    pub t: f64,
    pub rho: f64,
    pub rho_prime: f64,
    pub z: RadialField,
    pub e: RadialField,
    pub e1: RadialField,
    pub e2: RadialField,
    /// Exact second-order remainder F(z) − F(ω̂) − F′(ω̂)[z̃].
    pub remainder: RadialField,
    /// ½F″(ω̂)[z̃, z̃], its leading-order approximation.
    pub half_second: RadialField,
}

impl<'a> Ansatz<'a> {
    pub fn new(pot: &'a Potential, layer: &'a LayerTable, corr: &'a CorrectionTable, cutoff: &'a CutOff, n: usize) -> Self {
        Self { pot, layer, corr, cutoff, n }
    }

    fn coupling(&self) -> f64 {
        (self.n as f64 - 1.0) * (self.n as f64 - 3.0)
    }

    pub fn pieces(&self, r: f64, rho: f64, rho_prime: f64) -> Pieces {
        let chi = self.cutoff.jet(r);
        if chi == Jet::ZERO {
            return Pieces {
                omega_hat: Jet::constant(-1.0),
                z_tilde: Jet::ZERO,
                dt_omega_hat: 0.0,
                dt_z_tilde: 0.0,
                inert: true,
            };
        }
        let y = r - rho;
        let w = Jet(self.layer.eval(y));
        let omega_hat = w * chi + chi + (-1.0);
        let c = self.coupling();
        let (z_tilde, dt_z_tilde) = if c == 0.0 {
            (Jet::ZERO, 0.0)
        } else {
            let wt = Jet(self.corr.eval(self.layer, y));
            let inv2 = Jet::var(r).powi(-2);
            ((wt * inv2 * chi).scale(c), -rho_prime * c / (r * r) * wt.d(1) * chi.v())
        };
        Pieces { omega_hat, z_tilde, dt_omega_hat: -rho_prime * w.d(1) * chi.v(), dt_z_tilde, inert: false }
    }

    /// E(t, r) = F(z) − ∂ₜz at one radius.
    pub fn error_point(&self, r: f64, rho: f64, rho_prime: f64) -> Result<f64> {
        let p = self.pieces(r, rho, rho_prime);
        if p.inert {
            return Ok(0.0);
        }
        Ok(ops::f_point(self.pot, self.n, r, &p.z())? - p.dt_z())
    }

    fn check_coverage(&self, rho: f64, dx: f64, nodes: usize) -> Result<()> {
        let need = rho + COVERAGE_MARGIN;
        let have = dx * nodes as f64;
        if have < need {
            return Err(Error::Coverage(format!("grid reaches r = {have}, need ≥ ρ + {COVERAGE_MARGIN} = {need}")));
        }
        Ok(())
    }

    /// z(t, ·) and ∂ₜz(t, ·) on rᵢ = i·dx.
    pub fn build_z(&self, modulation: &ModulationState, t: f64, dx: f64, nodes: usize) -> Result<ZField> {
        let (rho, rho_prime) = modulation.rho(t)?;
        self.check_coverage(rho, dx, nodes)?;
        let pieces: Vec<Pieces> = (0..=nodes).map(|i| self.pieces(i as f64 * dx, rho, rho_prime)).collect();
        let jets: Vec<Jet> = pieces.iter().map(|p| p.z()).collect();
        Ok(ZField {
            t,
            rho,
            rho_prime,
            z: RadialField::new(dx, jets.iter().map(|j| j.v()).collect()),
            dt_z: pieces.iter().map(|p| p.dt_z()).collect(),
            jets,
        })
    }

    /// E = F(z) − ∂ₜz with analytic derivatives, and its split E₁ + E₂.
    pub fn error_field(&self, modulation: &ModulationState, t: f64, dx: f64, nodes: usize) -> Result<ErrorField> {
        let (rho, rho_prime) = modulation.rho(t)?;
        self.check_coverage(rho, dx, nodes)?;
        let n = self.n;
        let c = self.coupling();
        let k = c * (n as f64 - 3.0) / 2.0;
        let zero = RadialField::new(dx, vec![0.0; nodes + 1]);
        let (mut z, mut e, mut e1, mut e2) = (zero.clone(), zero.clone(), zero.clone(), zero.clone());
        let (mut rem, mut half) = (zero.clone(), zero);
        for i in 0..=nodes {
            let r = i as f64 * dx;
            let p = self.pieces(r, rho, rho_prime);
            let zj = p.z();
            z.values[i] = zj.v();
            if p.inert {
                continue;
            }
            let fz = ops::f_point(self.pot, n, r, &zj)?;
            let fw = ops::f_point(self.pot, n, r, &p.omega_hat)?;
            let lin = ops::fprime_point(self.pot, n, r, &p.omega_hat, &p.z_tilde)?;
            let shift = c / (r * r) * p.omega_hat.d(2) + k / (r * r * r) * p.omega_hat.d(1);
            let remainder = fz - fw - lin;
            e.values[i] = fz - p.dt_z();
            e1.values[i] = fw - p.dt_omega_hat + shift;
            e2.values[i] = -shift + lin + remainder - p.dt_z_tilde;
            rem.values[i] = remainder;
            half.values[i] = if c == 0.0 {
                0.0
            } else {
                0.5 * ops::fsecond_point(self.pot, n, r, &p.omega_hat, &p.z_tilde, &p.z_tilde)?
            };
        }
        Ok(ErrorField { t, rho, rho_prime, z, e, e1, e2, remainder: rem, half_second: half })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::build_correction;
    use crate::layer::build_layer;

    #[test]
    fn ansatz_basics() {
        let pot = Potential::Quartic;
        let layer = build_layer(&pot, 25.0, 1e-2).unwrap();
        let corr = build_correction(&layer).unwrap();
        let cut = CutOff::default();
        let a = Ansatz::new(&pot, &layer, &corr, &cut, 4);
        let m = ModulationState::willmore(4);
        let t = -1e4;
        let zf = a.build_z(&m, t, 0.01, 6000).unwrap();
        assert!(zf.z.values[..25].iter().all(|&v| v == -1.0));
        let i = (zf.rho / 0.01).round() as usize;
        let at = a.pieces(zf.rho, zf.rho, zf.rho_prime).z();
        assert!(at.v().abs() < 1e-14, "{}", at.v());
        assert!(zf.z.values[i].abs() < 0.02);
        assert!(matches!(a.build_z(&m, t, 0.01, 3000), Err(Error::Coverage(_))));

        let ef = a.error_field(&m, t, 0.01, 6000).unwrap();
        let split = ef.e.values.iter().zip(&ef.e1.values).zip(&ef.e2.values).fold(0.0f64, |s, ((e, a), b)| s.max((e - a - b).abs()));
        assert!(split < 1e-10, "{split}");
        assert!(ef.e.values[..25].iter().all(|&v| v == 0.0));
    }
}
