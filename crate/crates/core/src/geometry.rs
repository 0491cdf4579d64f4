//! Willmore flow of round spheres: γ′ = −½((n−1)/γ)³ + (n−1)²/γ³.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::sphere_area;

pub const MAX_DIMENSION: usize = 12;
const EXTINCTION_FLOOR: f64 = 1e-6;

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIMENSION {
        return Err(Error::Argument(format!("dimension {n} not in 1..={MAX_DIMENSION}")));
    }
    Ok(())
}

/// Closed-form radius γₙ(t) = (−2(n−3)(n−1)²t)^{1/4}.
pub fn gamma_n(n: usize, t: f64) -> Result<f64> {
    check_dimension(n)?;
    if n == 1 || n == 3 {
        return Err(Error::DegenerateDimension(n));
    }
    let valid = if n == 2 { t >= 0.0 } else { t <= 0.0 };
    if !valid || !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} has the wrong sign for n = {n}")));
    }
    let m = (n - 1) as f64;
    Ok((-2.0 * (n as f64 - 3.0) * m * m * t).powf(0.25))
}

/// dγₙ/dt for the closed form.
pub fn gamma_n_prime(n: usize, t: f64) -> Result<f64> {
    let g = gamma_n(n, t)?;
    willmore_rhs(n, g)
}

/// Right-hand side of the radial Willmore ODE, written as (n−1)²(3−n)/(2γ³) so that it is
/// exactly zero for n = 3.
pub fn willmore_rhs(n: usize, gamma: f64) -> Result<f64> {
    check_dimension(n)?;
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::Domain(format!("radius {gamma} must be positive")));
    }
    let m = (n - 1) as f64;
    Ok(m * m * (3.0 - n as f64) / (2.0 * gamma * gamma * gamma))
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusCurve {
    pub n: usize,
    pub t: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// Classical RK4 from (t0, gamma0) to t1. For n ≥ 4 integration stops one step short of t = 0.
pub fn integrate_willmore(n: usize, gamma0: f64, t0: f64, t1: f64, dt: f64) -> Result<RadiusCurve> {
    check_dimension(n)?;
    if !(dt > 0.0) || !(t1 > t0) {
        return Err(Error::Argument(format!("need dt > 0 and t1 > t0 (dt={dt}, t0={t0}, t1={t1})")));
    }
    willmore_rhs(n, gamma0)?;
    let mut end = t1;
    if n >= 4 && end > -dt {
        end = -dt;
        if end <= t0 {
            return Err(Error::Domain("time window lies past the extinction time".into()));
        }
    }
    let steps = ((end - t0) / dt).ceil() as usize;
    let h = (end - t0) / steps as f64;
    let f = |g: f64| -> Result<f64> {
        if g <= EXTINCTION_FLOOR {
            return Err(Error::Domain("radius below floor".into()));
        }
        willmore_rhs(n, g)
    };
    let mut t = vec![t0];
    let mut gamma = vec![gamma0];
    let mut g = gamma0;
    for i in 0..steps {
        let ti = t0 + i as f64 * h;
        let step = (|| -> Result<f64> {
            let k1 = f(g)?;
            let k2 = f(g + 0.5 * h * k1)?;
            let k3 = f(g + 0.5 * h * k2)?;
            let k4 = f(g + h * k3)?;
            Ok(g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        })();
        match step {
            Ok(v) if v > EXTINCTION_FLOOR => g = v,
            _ => return Err(Error::Extinction { t: ti }),
        }
        t.push(t0 + (i + 1) as f64 * h);
        gamma.push(g);
    }
    Ok(RadiusCurve { n, t, gamma })
}

/// ½|S^{n−1}|γ^{n−1}((n−1)/γ)².
pub fn willmore_energy_sphere(n: usize, gamma: f64) -> Result<f64> {
    check_dimension(n)?;
    if gamma <= 0.0 {
        return Err(Error::Domain(format!("radius {gamma} must be positive")));
    }
    let m = (n - 1) as f64;
    Ok(0.5 * sphere_area(n) * gamma.powi(n as i32 - 3) * m * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_values() {
        assert!((gamma_n(2, 8.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((gamma_n(4, -8.0).unwrap() - 144f64.powf(0.25)).abs() < 1e-14);
        assert!(matches!(gamma_n(3, -1.0), Err(Error::DegenerateDimension(3))));
        assert!(matches!(gamma_n(1, -1.0), Err(Error::DegenerateDimension(1))));
        assert!(matches!(gamma_n(4, 1.0), Err(Error::Domain(_))));
        assert!(gamma_n(13, -1.0).is_err());
    }

    #[test]
    fn rhs_values() {
        let g = 144f64.powf(0.25);
        assert!((willmore_rhs(4, g).unwrap() + 4.5 / g.powi(3)).abs() < 1e-15);
        assert!((willmore_rhs(2, 1.7).unwrap() - 0.5 / 1.7f64.powi(3)).abs() < 1e-15);
        assert_eq!(willmore_rhs(3, 0.3).unwrap(), 0.0);
        assert!(willmore_rhs(4, 0.0).is_err());
    }

    #[test]
    fn energies() {
        assert!((willmore_energy_sphere(2, 1.0).unwrap() - PI).abs() < 1e-14);
        for g in [0.5, 2.0, 7.0] {
            assert!((willmore_energy_sphere(3, g).unwrap() - 8.0 * PI).abs() < 1e-12);
        }
        let e3 = willmore_energy_sphere(4, 3.0).unwrap();
        let e6 = willmore_energy_sphere(4, 6.0).unwrap();
        assert!((e6 / e3 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn extinction_is_reported() {
        // n = 5 from a small radius shrinks to zero well before t = 0
        let r = integrate_willmore(5, 0.5, -1000.0, -1.0, 1e-3);
        assert!(matches!(r, Err(Error::Extinction { .. })));
    }
}
