//! The even double-well potential W with minima at ±1 and its derivatives.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Below this curvature at the well the tabulated potential is treated as degenerate.
const DEGENERATE_CURVATURE: f64 = 1e-4;

#[derive(Debug, Clone)]
pub enum Potential {
    /// W(s) = ¼(1 − s²)².
    Quartic,
    /// W(s) = a(1 + cos(k s)); with k = π the minima sit at ±1. The stored pair (a, k)
    /// is the affine rescaling of the plain cosine well.
    Cosine { a: f64, k: f64 },
    /// Natural cubic spline through user samples; only orders 0–2 are available.
    Tabulated { spline: CubicSpline, w_at_1: f64, curvature: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Quartic,
    CosineRescaled,
    UserTabulated,
}

impl Potential {
    /// Cosine well rescaled so its minima are ±1 and its barrier height equals the quartic's.
    pub fn cosine() -> Self {
        Potential::Cosine { a: 0.125, k: PI }
    }

    pub fn tabulated(s: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let spline = CubicSpline::natural(s, w)?;
        let (lo, hi) = spline.range();
        if lo > -1.0 || hi < 1.0 {
            return Err(Error::Domain("tabulated potential must cover [-1, 1]".into()));
        }
        let w_at_1 = spline.eval(1.0, 0).unwrap();
        let curvature = spline.eval(1.0, 2).unwrap();
        Ok(Potential::Tabulated { spline, w_at_1, curvature })
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Quartic => PotentialKind::Quartic,
            Potential::Cosine { .. } => PotentialKind::CosineRescaled,
            Potential::Tabulated { .. } => PotentialKind::UserTabulated,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Potential::Quartic => "quartic",
            Potential::Cosine { .. } => "cosine",
            Potential::Tabulated { .. } => "tabulated",
        }
    }

    /// d^order W / ds^order at s.
    pub fn eval(&self, s: f64, order: usize) -> Result<f64> {
        if order > 4 {
            return Err(Error::Argument(format!("derivative order {order} not in 0..=4")));
        }
        match self {
            Potential::Quartic => Ok(match order {
                0 => {
                    let q = (1.0 - s) * (1.0 + s);
                    0.25 * q * q
                }
                1 => s * s * s - s,
                2 => 3.0 * s * s - 1.0,
                3 => 6.0 * s,
                _ => 6.0,
            }),
            Potential::Cosine { a, k } => {
                // Evaluate through the reflected argument so the wells are resolved to full precision.
                let (c, sn) = cosine_parts(*k, s);
                Ok(match order {
                    0 => a * (1.0 + c),
                    1 => -a * k * sn,
                    2 => -a * k * k * c,
                    3 => a * k.powi(3) * sn,
                    _ => a * k.powi(4) * c,
                })
            }
            Potential::Tabulated { spline, .. } => {
                if order > 2 {
                    return Err(Error::Unsupported(format!(
                        "order-{order} derivative of a tabulated potential"
                    )));
                }
                spline
                    .eval(s, order)
                    .ok_or_else(|| Error::Domain(format!("s={s} outside the tabulated range")))
            }
        }
    }

    /// [W, W′, W″, W‴, W⁗] at s.
    pub fn derivs(&self, s: f64) -> Result<[f64; 5]> {
        Ok([
            self.eval(s, 0)?,
            self.eval(s, 1)?,
            self.eval(s, 2)?,
            self.eval(s, 3)?,
            self.eval(s, 4)?,
        ])
    }

    /// W⁽⁵⁾(s), needed only for the second variation of F. Tabulated potentials refuse it.
    pub fn fifth(&self, s: f64) -> Result<f64> {
        match self {
            Potential::Quartic => Ok(0.0),
            Potential::Cosine { a, k } => Ok(-a * k.powi(5) * cosine_parts(*k, s).1),
            Potential::Tabulated { .. } => Err(Error::Unsupported("order-5 derivative of a tabulated potential".into())),
        }
    }

    /// W″(1).
    pub fn curvature_at_well(&self) -> f64 {
        match self {
            Potential::Quartic => 2.0,
            Potential::Cosine { a, k } => a * k * k,
            Potential::Tabulated { curvature, .. } => *curvature,
        }
    }

    /// α = √W″(1).
    pub fn alpha(&self) -> Result<f64> {
        let c = self.curvature_at_well();
        let floor = match self {
            Potential::Tabulated { .. } => DEGENERATE_CURVATURE,
            _ => 0.0,
        };
        if c > floor && c.is_finite() {
            Ok(c.sqrt())
        } else {
            Err(Error::InvalidPotential(format!("W''(1) = {c} is not positive")))
        }
    }

    /// W‴(1), when available.
    pub fn third_at_well(&self) -> Result<f64> {
        self.eval(1.0, 3)
    }

    /// W(s) − W(1), accurate near the wells.
    pub fn excess(&self, s: f64) -> Result<f64> {
        match self {
            Potential::Quartic => {
                let q = (1.0 - s) * (1.0 + s);
                Ok(0.25 * q * q)
            }
            Potential::Cosine { .. } => {
                if s.abs() > 1.0 {
                    return Ok(self.eval(s, 0)? - self.eval(1.0, 0)?);
                }
                Ok(self.excess_near_well(1.0 - s.abs()))
            }
            Potential::Tabulated { w_at_1, .. } => Ok(self.eval(s, 0)? - w_at_1),
        }
    }

    /// W(1 − ε) − W(1) for ε ∈ [0, 2], without cancellation for small ε.
    pub fn excess_near_well(&self, eps: f64) -> f64 {
        match self {
            Potential::Quartic => 0.25 * eps * eps * (2.0 - eps) * (2.0 - eps),
            Potential::Cosine { a, k } => {
                let h = (0.5 * k * eps).sin();
                2.0 * a * h * h
            }
            Potential::Tabulated { spline, w_at_1, curvature } => {
                if eps < 1e-4 {
                    0.5 * curvature * eps * eps
                } else {
                    spline.eval(1.0 - eps, 0).unwrap_or(f64::NAN) - w_at_1
                }
            }
        }
    }

    /// W′(1 − ε), accurate for small ε.
    pub fn slope_near_well(&self, eps: f64) -> f64 {
        match self {
            Potential::Quartic => -eps * (1.0 - eps) * (2.0 - eps),
            Potential::Cosine { a, k } => -a * k * (k * eps).sin(),
            Potential::Tabulated { spline, curvature, .. } => {
                if eps < 1e-4 {
                    -curvature * eps
                } else {
                    spline.eval(1.0 - eps, 1).unwrap_or(f64::NAN)
                }
            }
        }
    }

    /// Checks evenness, the minimum conditions and strict interior excess.
    pub fn check_invariants(&self) -> Result<()> {
        let w1 = self.eval(1.0, 1)?;
        let wm1 = self.eval(-1.0, 1)?;
        let tol_min = match self {
            Potential::Tabulated { .. } => 1e-6,
            _ => 1e-12,
        };
        if w1.abs() > tol_min || wm1.abs() > tol_min {
            return Err(Error::InvalidPotential(format!("W'(±1) = ({w1:e}, {wm1:e}) not zero")));
        }
        self.alpha()?;
        for i in 0..=2000 {
            let s = -1.0 + i as f64 * 1e-3;
            let diff = self.eval(s, 0)? - self.eval(-s, 0)?;
            if diff.abs() > 1e-10 {
                return Err(Error::InvalidPotential(format!("W not even at s={s}")));
            }
            if s.abs() < 0.999 && self.excess(s)? <= 0.0 {
                return Err(Error::InvalidPotential(format!("W(s) <= W(1) at s={s}")));
            }
        }
        Ok(())
    }
}

/// (cos(k s), sin(k s)) for k = π, evaluated through the distance 1 − |s| to the nearer
/// well so that W′(±1) vanishes to rounding.
fn cosine_parts(k: f64, s: f64) -> (f64, f64) {
    if (s.abs() - 1.0).abs() < 0.5 {
        // cos(ks) = −cos(k(1 − |s|)), sin(ks) = sign(s)·sin(k(1 − |s|))
        let d = k * (1.0 - s.abs());
        (-d.cos(), s.signum() * d.sin())
    } else {
        let x = k * s;
        (x.cos(), x.sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn quartic_values() {
        let w = Potential::Quartic;
        assert_eq!(w.eval(1.0, 1).unwrap(), 0.0);
        assert_eq!(w.eval(1.0, 2).unwrap(), 2.0);
        assert_eq!(w.eval(0.0, 0).unwrap(), 0.25);
        assert!((w.alpha().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(w.eval(0.0, 5).is_err());
    }

    #[test]
    fn cosine_values() {
        let w = Potential::cosine();
        assert!(w.eval(1.0, 1).unwrap().abs() < 1e-12);
        assert!((w.eval(0.0, 0).unwrap() - 0.25).abs() < 1e-15);
        let c = 0.125 * PI * PI;
        assert!((w.eval(1.0, 2).unwrap() - c).abs() < 1e-14);
        assert!((w.alpha().unwrap() - c.sqrt()).abs() < 1e-15);
        w.check_invariants().unwrap();
        Potential::Quartic.check_invariants().unwrap();
    }

    #[test]
    fn near_well_forms_agree_with_direct_evaluation() {
        for w in [Potential::Quartic, Potential::cosine()] {
            for &e in &[0.5, 0.1, 1e-3] {
                let direct = w.eval(1.0 - e, 0).unwrap() - w.eval(1.0, 0).unwrap();
                assert!((w.excess_near_well(e) - direct).abs() < 1e-14, "{}", w.name());
                assert!((w.slope_near_well(e) - w.eval(1.0 - e, 1).unwrap()).abs() < 1e-14);
            }
            // no cancellation deep in the well
            let e = 1e-12;
            let rel = w.excess_near_well(e) / (0.5 * w.curvature_at_well() * e * e) - 1.0;
            assert!(rel.abs() < 1e-10);
        }
    }

    #[test]
    fn derivatives_are_consistent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for w in [Potential::Quartic, Potential::cosine()] {
            for _ in 0..1000 {
                let s: f64 = rng.gen_range(-2.0..2.0);
                for k in 0..4 {
                    let h = 1e-4;
                    let fd = (w.eval(s + h, k).unwrap() - w.eval(s - h, k).unwrap()) / (2.0 * h);
                    let ex = w.eval(s, k + 1).unwrap();
                    assert!((fd - ex).abs() <= 1e-6 * ex.abs().max(1.0), "{} k={k} s={s}", w.name());
                }
            }
        }
    }

    #[test]
    fn non_negative_excess() {
        for w in [Potential::Quartic, Potential::cosine()] {
            for i in 0..=20000 {
                let s = -1.0 + i as f64 * 1e-4;
                let e = w.excess(s).unwrap();
                if i == 0 || i == 20000 {
                    assert!(e.abs() < 1e-15);
                } else {
                    assert!(e > 0.0);
                }
            }
        }
    }

    #[test]
    fn tabulated_potential() {
        let s: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * i as f64).collect();
        let w: Vec<f64> = s.iter().map(|&v| 0.25 * (1.0 - v * v).powi(2)).collect();
        let p = Potential::tabulated(s, w).unwrap();
        assert!((p.alpha().unwrap() - 2f64.sqrt()).abs() < 1e-3);
        assert!(p.eval(0.3, 3).is_err());
        assert!(p.eval(3.0, 0).is_err());
        let s: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * i as f64).collect();
        let flat: Vec<f64> = s.iter().map(|&v| 0.25 * (1.0 - v * v).powi(4)).collect();
        let p = Potential::tabulated(s, flat).unwrap();
        assert!(matches!(p.alpha(), Err(Error::InvalidPotential(_))));
    }
}
