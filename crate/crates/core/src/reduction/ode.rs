//! The reduced modulation equation h′ + 3h/(4t) = P̃(h, h′) with h = 0 at |t| = T̂₀,
//! solved through its integral form h = 𝒫(h) by Picard iteration in the Λ-norm
//! ‖h‖_Λ = sup|h| + sup (|t|/log|t|)|h′|.
//!
//! P is the projected error with φ = 0: P = ρ′ + K/ρ³ − ∫E ω′ r^{n−1}dr / (ρ^{n−1}∫ω′²),
//! K = (n−3)(n−1)²/2. The φ-dependent parts of the projected equation are not included.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ansatz::{Ansatz, ModulationState};
use crate::error::{Error, Result};
use crate::geometry;

use super::{cut_integral, willmore_coefficient, window};

#[derive(Debug, Clone, Serialize)]
pub struct ReducedOptions {
    /// Weight exponent, p ∈ (n, n+1].
    pub p: f64,
    pub t_hat0: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Resolution of the log-spaced time grid.
    pub points_per_decade: usize,
    /// The grid covers T̂₀ ≤ |t| ≤ span·T̂₀.
    pub span: f64,
}

impl Default for ReducedOptions {
    fn default() -> Self {
        Self { p: 5.0, t_hat0: 1e3, tol: 1e-8, max_iter: 50, points_per_decade: 40, span: 1e3 }
    }
}

/// h, h′ after one application of 𝒫, with the P and P̃ values that produced them.
#[derive(Debug, Clone, Serialize)]
pub struct MapImage {
    pub h: Vec<f64>,
    pub dh: Vec<f64>,
    pub p: Vec<f64>,
    pub p_tilde: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReducedSolution {
    pub n: usize,
    pub options: ReducedOptions,
    /// Grid ordered by increasing |t|.
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub dh: Vec<f64>,
    /// P and P̃ evaluated at the previous iterate.
    pub p: Vec<f64>,
    pub p_tilde: Vec<f64>,
    pub iterations: usize,
    /// ‖𝒫(0)‖_Λ.
    pub first_iterate_norm: f64,
    /// ‖h_{k+1} − h_k‖_Λ per iteration.
    pub history: Vec<f64>,
    /// sup |h(t)| log|t| over |t| ≥ 2T̂₀.
    pub decay_constant: f64,
    /// sup |P| |t| (log|t|)^{2(p−1)}.
    pub rhs_constant: f64,
}

impl ReducedSolution {
    /// The modulation ρ = γₙ + h on the solved window.
    pub fn modulation(&self) -> Result<ModulationState> {
        let mut idx: Vec<usize> = (0..self.t.len()).collect();
        idx.sort_by(|&a, &b| self.t[a].total_cmp(&self.t[b]));
        ModulationState::willmore(self.n).with_table(
            idx.iter().map(|&i| self.t[i]).collect(),
            idx.iter().map(|&i| self.h[i]).collect(),
            idx.iter().map(|&i| self.dh[i]).collect(),
        )
    }
}

/// −1 for the ancient regime (n ≥ 4, t ≤ −T̂₀), +1 for n = 2 (t ≥ T̂₀).
fn orientation(n: usize) -> Result<f64> {
    match n {
        1 | 3 => Err(Error::DegenerateDimension(n)),
        2 => Ok(1.0),
        _ if n <= geometry::MAX_DIMENSION => Ok(-1.0),
        _ => Err(Error::Argument(format!("dimension {n} too large"))),
    }
}

/// P(h, h′) at time t.
pub fn p_value(ansatz: &Ansatz, t: f64, h: f64, dh: f64) -> Result<f64> {
    let n = ansatz.n;
    let rho = geometry::gamma_n(n, t)? + h;
    let rho_prime = geometry::gamma_n_prime(n, t)? + dh;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("interface radius {rho} is not positive at t = {t}")));
    }
    let layer = ansatz.layer;
    let (a, b) = window(layer, rho);
    let proj = cut_integral(
        |r| Ok(ansatz.error_point(r, rho, rho_prime)? * layer.eval(r - rho)[1] * r.powi(n as i32 - 1)),
        a,
        b,
        ansatz.cutoff.delta0,
    )?;
    let k = willmore_coefficient(n);
    Ok(rho_prime + k / rho.powi(3) - proj / (rho.powi(n as i32 - 1) * layer.slope_mass()))
}

/// P̃ = P + K[γ⁻³ − (γ+h)⁻³ − 3hγ⁻⁴].
pub fn p_tilde(ansatz: &Ansatz, t: f64, h: f64, dh: f64) -> Result<f64> {
    let g = geometry::gamma_n(ansatz.n, t)?;
    let k = willmore_coefficient(ansatz.n);
    Ok(p_value(ansatz, t, h, dh)? + k * (g.powi(-3) - (g + h).powi(-3) - 3.0 * h / g.powi(4)))
}

/// Cumulative ∫ of uniformly spaced samples with four-point (third-degree) panels.
fn cumulative_cubic(f: &[f64], step: f64) -> Vec<f64> {
    let m = f.len();
    let mut out = vec![0.0; m];
    for k in 0..m.saturating_sub(1) {
        let piece = if m < 4 {
            0.5 * (f[k] + f[k + 1])
        } else if k == 0 {
            (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0
        } else if k + 2 >= m {
            (f[k - 2] - 5.0 * f[k - 1] + 19.0 * f[k] + 9.0 * f[k + 1]) / 24.0
        } else {
            (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]) / 24.0
        };
        out[k + 1] = out[k] + step * piece;
    }
    out
}

/// sup|h| + sup (|t|/log|t|)|h′|.
pub fn lambda_norm(t: &[f64], h: &[f64], dh: &[f64]) -> f64 {
    let a = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let b = t.iter().zip(dh).fold(0.0f64, |m, (t, d)| m.max(t.abs() / t.abs().ln() * d.abs()));
    a + b
}

fn time_grid(n: usize, opts: &ReducedOptions) -> Result<(Vec<f64>, f64)> {
    let o = orientation(n)?;
    if !(opts.t_hat0 > std::f64::consts::E * std::f64::consts::E) || !(opts.span > 1.0) || opts.points_per_decade < 2 {
        return Err(Error::Argument("need T̂₀ > e², span > 1 and ≥ 2 points per decade".into()));
    }
    let du = std::f64::consts::LN_10 / opts.points_per_decade as f64;
    let count = (opts.span.ln() / du).round() as usize + 1;
    Ok(((0..count).map(|k| o * opts.t_hat0 * (k as f64 * du).exp()).collect(), du))
}

/// One application of 𝒫 on the grid; h′ of the image comes from differentiating 𝒫 exactly.
pub fn apply_map(ansatz: &Ansatz, t: &[f64], du: f64, h: &[f64], dh: &[f64]) -> Result<MapImage> {
    let mut p = Vec::with_capacity(t.len());
    let mut pt = Vec::with_capacity(t.len());
    for k in 0..t.len() {
        let pv = p_value(ansatz, t[k], h[k], dh[k])?;
        let g = geometry::gamma_n(ansatz.n, t[k])?;
        let kk = willmore_coefficient(ansatz.n);
        p.push(pv);
        pt.push(pv + kk * (g.powi(-3) - (g + h[k]).powi(-3) - 3.0 * h[k] / g.powi(4)));
    }
    // ∫ from T̂₀ to |t| of |s|^{3/4}P̃ in the variable u = log(|s|/T̂₀)
    let integrand: Vec<f64> = t.iter().zip(&pt).map(|(t, v)| t.abs().powf(1.75) * v).collect();
    let cum = cumulative_cubic(&integrand, du);
    let o = t[0].signum();
    let new_h: Vec<f64> = t.iter().zip(&cum).map(|(t, i)| o * t.abs().powf(-0.75) * i).collect();
    let new_dh: Vec<f64> = (0..t.len()).map(|k| pt[k] - 0.75 * new_h[k] / t[k]).collect();
    Ok(MapImage { h: new_h, dh: new_dh, p, p_tilde: pt })
}

/// Picard iteration h ← 𝒫(h) from h = 0 until ‖h_{k+1} − h_k‖_Λ < tol.
pub fn solve_reduced_ode(ansatz: &Ansatz, opts: &ReducedOptions) -> Result<ReducedSolution> {
    let n = ansatz.n;
    let nf = n as f64;
    orientation(n)?;
    if !(opts.p > nf && opts.p <= nf + 1.0) {
        return Err(Error::Argument(format!("p = {} not in (n, n+1] for n = {n}", opts.p)));
    }
    let (t, du) = time_grid(n, opts)?;
    let zeros = vec![0.0; t.len()];
    let mut img = apply_map(ansatz, &t, du, &zeros, &zeros)?;
    let first = lambda_norm(&t, &img.h, &img.dh);
    if !(2.0 * first < 1.0) {
        return Err(Error::ContractionFailure(format!(
            "‖𝒫(0)‖_Λ = {first:.3e}: the Λ-ball does not fit inside the unit ball (T̂₀ too small)"
        )));
    }
    let mut history = vec![first];
    let mut iterations = 1;
    loop {
        if *history.last().unwrap() < opts.tol {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::ContractionFailure(format!(
                "no convergence after {iterations} iterations (last difference {:.3e})",
                history.last().unwrap()
            )));
        }
        let next = apply_map(ansatz, &t, du, &img.h, &img.dh)?;
        let dh_diff: Vec<f64> = next.dh.iter().zip(&img.dh).map(|(a, b)| a - b).collect();
        let h_diff: Vec<f64> = next.h.iter().zip(&img.h).map(|(a, b)| a - b).collect();
        let diff = lambda_norm(&t, &h_diff, &dh_diff);
        let growing = history.len() >= 3 && history[history.len() - 3..].iter().all(|&d| diff > d);
        if !diff.is_finite() || lambda_norm(&t, &next.h, &next.dh) >= 1.0 || growing {
            return Err(Error::ContractionFailure(format!("Λ-norm difference {diff:.3e} at iteration {iterations}")));
        }
        history.push(diff);
        img = next;
        iterations += 1;
    }
    let two = 2.0 * opts.t_hat0;
    let decay_constant = t
        .iter()
        .zip(&img.h)
        .filter(|(t, _)| t.abs() >= two * (1.0 - 1e-12))
        .fold(0.0f64, |m, (t, h)| m.max(h.abs() * t.abs().ln()));
    let rhs_constant = t
        .iter()
        .zip(&img.p)
        .fold(0.0f64, |m, (t, p)| m.max(p.abs() * t.abs() * t.abs().ln().powf(2.0 * (opts.p - 1.0))));
    Ok(ReducedSolution {
        n,
        options: opts.clone(),
        t,
        h: img.h,
        dh: img.dh,
        p: img.p,
        p_tilde: img.p_tilde,
        iterations,
        first_iterate_norm: first,
        history,
        decay_constant,
        rhs_constant,
    })
}

/// h′ + 3h/(4t) − P̃(h, h′) at `count` log-uniform random times inside the solved window,
/// with h and h′ interpolated from the grid. Returns (t, residual) pairs.
pub fn ode_residual(ansatz: &Ansatz, sol: &ReducedSolution, count: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let modl = sol.modulation()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (sol.t[0].abs().ln(), sol.t[sol.t.len() - 1].abs().ln());
    let o = sol.t[0].signum();
    (0..count)
        .map(|_| {
            let t = o * rng.gen_range(lo..hi).exp();
            let (h, dh) = modl.perturbation(t)?;
            Ok((t, dh + 0.75 * h / t - p_tilde(ansatz, t, h, dh)?))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    /// max over the grid of |P(h₁) − P(h₂)| |t| (log|t|)^{2(p−1)} / ‖h₁ − h₂‖_Λ, per pair.
    pub constants: Vec<f64>,
    pub max: f64,
}

/// Fits the Lipschitz constant of P on random pairs h = L₀(a + b sin log|t|)/log|t| in the
/// Λ-ball of radius `radius`, L₀ = log T̂₀.
pub fn lipschitz_probe(ansatz: &Ansatz, opts: &ReducedOptions, pairs: usize, radius: f64, seed: u64) -> Result<LipschitzReport> {
    let (t, _) = time_grid(ansatz.n, opts)?;
    let l0 = opts.t_hat0.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(-0.5..0.5) * radius;
        let b = rng.gen_range(-0.25..0.25) * radius;
        let h: Vec<f64> = t.iter().map(|t| {
            let s = t.abs().ln();
            l0 * (a + b * s.sin()) / s
        }).collect();
        let dh: Vec<f64> = t.iter().map(|t| {
            let s = t.abs().ln();
            l0 * (b * s.cos() / s - (a + b * s.sin()) / (s * s)) / t
        }).collect();
        (h, dh)
    };
    let mut constants = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let (h1, d1) = sample(&mut rng);
        let (h2, d2) = sample(&mut rng);
        let dist = lambda_norm(
            &t,
            &h1.iter().zip(&h2).map(|(a, b)| a - b).collect::<Vec<_>>(),
            &d1.iter().zip(&d2).map(|(a, b)| a - b).collect::<Vec<_>>(),
        );
        let mut c = 0.0f64;
        for k in 0..t.len() {
            let dp = p_value(ansatz, t[k], h1[k], d1[k])? - p_value(ansatz, t[k], h2[k], d2[k])?;
            let s = t[k].abs().ln();
            c = c.max(dp.abs() * t[k].abs() * s.powf(2.0 * (opts.p - 1.0)) / dist);
        }
        constants.push(c);
    }
    let max = constants.iter().cloned().fold(0.0, f64::max);
    Ok(LipschitzReport { constants, max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::CutOff;
    use crate::correction::build_correction;
    use crate::layer::build_layer;
    use crate::potential::Potential;

    #[test]
    fn cumulative_cubic_is_exact_for_cubics() {
        let f: Vec<f64> = (0..11).map(|k| (k as f64 * 0.1).powi(3) - k as f64 * 0.1).collect();
        let c = cumulative_cubic(&f, 0.1);
        for (k, v) in c.iter().enumerate() {
            let x = k as f64 * 0.1;
            assert!((v - (x.powi(4) / 4.0 - x * x / 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn reduced_ode_converges_and_decays() {
        let pot = Potential::Quartic;
        let layer = build_layer(&pot, 25.0, 1e-2).unwrap();
        let corr = build_correction(&layer).unwrap();
        let cut = CutOff::default();
        let a = Ansatz::new(&pot, &layer, &corr, &cut, 4);
        let opts = ReducedOptions { points_per_decade: 20, span: 100.0, ..Default::default() };
        let sol = solve_reduced_ode(&a, &opts).unwrap();
        assert!(sol.iterations <= 30, "{}", sol.iterations);
        assert!(sol.history.last().unwrap() < &opts.tol);
        assert!(sol.decay_constant.is_finite());
        let res = ode_residual(&a, &sol, 20, 7).unwrap();
        let worst = res.iter().fold(0.0f64, |m, (_, r)| m.max(r.abs()));
        assert!(worst < 1e-6, "{worst}");
        assert!(matches!(solve_reduced_ode(&Ansatz::new(&pot, &layer, &corr, &cut, 3), &opts), Err(Error::DegenerateDimension(3))));
        let bad = ReducedOptions { p: 4.0, ..opts };
        assert!(solve_reduced_ode(&a, &bad).is_err());
        eprintln!("iter {} first {:e} decay {} rhs {} worst {worst:e}", sol.iterations, sol.first_iterate_norm, sol.decay_constant, sol.rhs_constant);
    }
}
