//! The damped one-dimensional kernel Q(ν, y) of ∂ᵥ + ∂⁴_y − 2α²∂²_y and its Duhamel integral.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

use super::convolve::{convolve_weights, fourier_cell_weights};

/// Frequency beyond which ν(ξ⁴ + 2α²ξ²) > 60.
fn xi_cut(alpha: f64, nu: f64) -> f64 {
    let a2 = alpha * alpha;
    (-a2 + (a2 * a2 + 60.0 / nu).sqrt()).sqrt()
}

/// Q(ν, y) = (2π)^{−1}∫ exp(−ν(ξ⁴ + 2α²ξ²)) cos(ξy) dξ.
pub fn q_kernel(alpha: f64, nu: f64, y: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("ν = {nu} must be positive")));
    }
    let a2 = alpha * alpha;
    let xi_max = xi_cut(alpha, nu);
    let panels = ((xi_max * y.abs() / PI).ceil() as usize).max(4);
    let mut total = 0.0;
    for k in 0..panels {
        let a = xi_max * k as f64 / panels as f64;
        let b = xi_max * (k + 1) as f64 / panels as f64;
        total += quad::integrate(
            |x| (-nu * (x.powi(4) + 2.0 * a2 * x * x)).exp() * (x * y).cos(),
            a,
            b,
            1e-17,
            1e-13,
        )?;
    }
    Ok(total / PI)
}

/// Half-width of the numerical support of Q(τ, ·).
fn support(alpha: f64, tau: f64) -> f64 {
    20.0 * tau.powf(0.25) + 20.0 * alpha * tau.sqrt()
}

/// u(ν, ·) = ∫₀^{ν+T} e^{−α⁴τ} ∫ Q(τ, x) f(ν−τ, · − x) dx dτ on the uniform grid y₀ + k·dx,
/// k < len, so that ∂ᵥu + u_yyyy − 2α²u_yy + α⁴u = f with u(−T, ·) = 0. The τ-integral uses
/// the midpoint rule with `tau_steps` cells; spatial weights are exact cell averages of Q,
/// and f is extended by its end values.
#[allow(clippy::too_many_arguments)]
pub fn duhamel_1d(
    alpha: f64,
    f: &dyn Fn(f64, f64) -> f64,
    t_big: f64,
    nu: f64,
    y0: f64,
    dx: f64,
    len: usize,
    tau_steps: usize,
) -> Result<Vec<f64>> {
    if !(nu + t_big > 0.0) || tau_steps == 0 || len == 0 {
        return Err(Error::Argument("need ν > −T, at least one τ step and one node".into()));
    }
    let span = nu + t_big;
    let dtau = span / tau_steps as f64;
    let a4 = alpha.powi(4);
    let a2 = alpha * alpha;
    let mut u = vec![0.0; len];
    for m in 0..tau_steps {
        let tau = (m as f64 + 0.5) * dtau;
        let damp = (-a4 * tau).exp();
        if damp < 1e-18 {
            break;
        }
        let jmax = (support(alpha, tau) / dx).ceil() as usize + 2;
        let w = fourier_cell_weights(|x| (-tau * (x.powi(4) + 2.0 * a2 * x * x)).exp(), xi_cut(alpha, tau), dx, jmax);
        let slice: Vec<f64> = (0..len).map(|k| f(nu - tau, y0 + k as f64 * dx)).collect();
        let conv = convolve_weights(&slice, &w);
        for (ui, ci) in u.iter_mut().zip(conv) {
            *ui += dtau * damp * ci;
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_kernel_basics() {
        let a = 2f64.sqrt();
        for nu in [0.1, 1.0, 10.0] {
            let q0 = q_kernel(a, nu, 0.0).unwrap();
            assert!(q0 > 0.0);
            // ∫Q dy = 1 by the trapezoid rule (spectrally accurate for this smooth kernel)
            let h = 0.02;
            let mut s = 0.5 * q0;
            let mut k = 1;
            loop {
                let v = q_kernel(a, nu, k as f64 * h).unwrap();
                s += v;
                if k as f64 * h > support(a, nu) {
                    break;
                }
                k += 1;
            }
            assert!((2.0 * s * h - 1.0).abs() < 1e-8, "nu={nu}: {}", 2.0 * s * h);
        }
        assert!(q_kernel(a, 0.0, 1.0).is_err());
    }

    #[test]
    fn constant_forcing() {
        let a = 1.2f64;
        let u = duhamel_1d(a, &|_, _| 3.0, 2.0, 0.5, -5.0, 0.1, 101, 400).unwrap();
        let a4 = a.powi(4);
        let exact = 3.0 / a4 * (1.0 - (-a4 * 2.5f64).exp());
        for v in &u {
            assert!((v - exact).abs() < 1e-4 * exact, "{v} vs {exact}");
        }
        let z = duhamel_1d(a, &|_, _| 0.0, 2.0, 0.5, -5.0, 0.1, 11, 10).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }
}
