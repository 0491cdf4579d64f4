//! Picard iteration for mild solutions of u_t = −∂⁴ₓu + G(x, u, u_x, u_xx) in one dimension:
//! u(t) = Γ_{t−t₀}u₀ + ∫_{t₀}^t Γ_{t−s}G(u(s)) ds.
//!
//! Time is discretized on a uniform grid with G averaged by the trapezoid rule over each step
//! and the kernel integrated exactly in time, ∫_{t_m}^{t_{m+1}} Γ_{t_k−s} ds. The whole
//! trajectory shares one discrete Duhamel sum; windows of length T₁ only decide which unknowns
//! are iterated together, so the fixed point does not depend on T₁.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

use super::convolve::{convolve_weights, heat_weights};
use super::KernelTable;

#[derive(Debug, Clone)]
pub struct MildOptions {
    pub dt: f64,
    /// Global Lipschitz constant σ of G; sets T₁ = 1/(2σC₁).
    pub sigma: f64,
    /// Overrides T₁ when set.
    pub window: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MildOptions {
    fn default() -> Self {
        Self { dt: 1e-2, sigma: 1.0, window: None, tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MildSolution {
    pub t: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    /// Contraction window T₁ actually used.
    pub window: f64,
    /// Picard iterations per window.
    pub iterations: Vec<usize>,
}

type Nonlinearity<'a> = dyn Fn(f64, f64, f64, f64) -> f64 + 'a;

fn eval_g(g: &Nonlinearity, u: &[f64], x0: f64, dx: f64) -> Vec<f64> {
    let m = u.len();
    let at = |k: isize| u[k.clamp(0, m as isize - 1) as usize];
    (0..m)
        .map(|i| {
            let k = i as isize;
            let ux = (at(k + 1) - at(k - 1)) / (2.0 * dx);
            let uxx = (at(k + 1) - 2.0 * at(k) + at(k - 1)) / (dx * dx);
            g(x0 + i as f64 * dx, u[i], ux, uxx)
        })
        .collect()
}

fn add_into(acc: &mut Vec<f64>, w: &[f64], scale: f64) {
    if acc.len() < w.len() {
        acc.resize(w.len(), 0.0);
    }
    for (a, b) in acc.iter_mut().zip(w) {
        *a += scale * b;
    }
}

/// One-sided weights of ∫_{a}^{b} Γ_s ds (b − a = dt), by Gauss–Kronrod in s; the first step
/// uses s = dt·v⁴ to absorb the s → 0 behaviour.
fn integrated_weights(table: &KernelTable, lag: usize, dt: f64, dx: f64) -> Result<Vec<f64>> {
    let mut acc = vec![];
    if lag == 0 {
        for p in 0..4 {
            let (a, b) = (p as f64 / 4.0, (p + 1) as f64 / 4.0);
            for (v, w) in quad::kronrod_nodes(a, b) {
                let s = dt * v.powi(4);
                add_into(&mut acc, &heat_weights(table, s, dx)?, w * 4.0 * dt * v.powi(3));
            }
        }
    } else {
        let a = lag as f64 * dt;
        for (s, w) in quad::kronrod_nodes(a, a + dt) {
            add_into(&mut acc, &heat_weights(table, s, dx)?, w);
        }
    }
    Ok(acc)
}

/// Solves on [t₀, t₁] for u₀ sampled at x₀ + i·dx (constant extension outside).
#[allow(clippy::too_many_arguments)]
pub fn mild_solve(
    table: &KernelTable,
    g: &Nonlinearity,
    u0: &[f64],
    x0: f64,
    dx: f64,
    t0: f64,
    t1: f64,
    opts: &MildOptions,
) -> Result<MildSolution> {
    if !(t1 > t0) || !(opts.dt > 0.0) || !(opts.sigma > 0.0) {
        return Err(Error::Argument("need t1 > t0, dt > 0, σ > 0".into()));
    }
    let steps = ((t1 - t0) / opts.dt).round().max(1.0) as usize;
    let dt = (t1 - t0) / steps as f64;
    let window = opts.window.unwrap_or(1.0 / (2.0 * opts.sigma * table.abs_mass));
    let per_window = ((window / dt).floor() as usize).max(1);

    let mut lags = Vec::with_capacity(steps);
    for l in 0..steps {
        lags.push(integrated_weights(table, l, dt, dx)?);
    }
    let mut semigroup = vec![u0.to_vec()];
    for k in 1..=steps {
        semigroup.push(convolve_weights(u0, &heat_weights(table, k as f64 * dt, dx)?));
    }

    let mut u: Vec<Vec<f64>> = vec![u0.to_vec()];
    let mut gs: Vec<Vec<f64>> = vec![eval_g(g, u0, x0, dx)];
    let mut iterations = vec![];
    let mut ka = 1;
    while ka <= steps {
        let kb = (ka + per_window - 1).min(steps);
        // Contributions of the fully known averages H_m, m ≤ ka − 2.
        let history: Vec<Vec<f64>> = (ka..=kb)
            .map(|k| {
                let mut h = semigroup[k].clone();
                for m in 0..ka.saturating_sub(1) {
                    let avg: Vec<f64> = gs[m].iter().zip(&gs[m + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
                    let c = convolve_weights(&avg, &lags[k - m - 1]);
                    h.iter_mut().zip(c).for_each(|(x, y)| *x += y);
                }
                h
            })
            .collect();
        let mut cur: Vec<Vec<f64>> = vec![u[ka - 1].clone(); kb - ka + 1];
        let mut prev_diff = f64::INFINITY;
        let mut it = 0;
        loop {
            it += 1;
            let mut g_all = gs[..ka].to_vec();
            g_all.extend(cur.iter().map(|v| eval_g(g, v, x0, dx)));
            let mut next = history.clone();
            for (off, k) in (ka..=kb).enumerate() {
                for m in ka - 1..k {
                    let avg: Vec<f64> = g_all[m].iter().zip(&g_all[m + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
                    let c = convolve_weights(&avg, &lags[k - m - 1]);
                    next[off].iter_mut().zip(c).for_each(|(x, y)| *x += y);
                }
            }
            let diff = next
                .iter()
                .zip(&cur)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            cur = next;
            if !diff.is_finite() || (it > 3 && diff > prev_diff) {
                return Err(Error::LipschitzViolation(format!(
                    "Picard iterates grow on [{}, {}] (Δ = {diff:e}); σ too small for G",
                    t0 + ka as f64 * dt,
                    t0 + kb as f64 * dt
                )));
            }
            if diff < opts.tol {
                break;
            }
            if it >= opts.max_iter {
                return Err(Error::ContractionFailure(format!("no convergence after {it} Picard iterations (Δ = {diff:e})")));
            }
            prev_diff = diff;
        }
        iterations.push(it);
        for v in cur {
            gs.push(eval_g(g, &v, x0, dx));
            u.push(v);
        }
        ka = kb + 1;
    }
    Ok(MildSolution { t: (0..=steps).map(|k| t0 + k as f64 * dt).collect(), u, window, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::heat_convolve;

    fn table() -> KernelTable {
        KernelTable::build(1, 20.0, 1e-2).unwrap()
    }

    #[test]
    fn linear_decay_of_constants() {
        let t = table();
        let u0 = vec![1.0; 60];
        let opts = MildOptions { dt: 0.02, ..Default::default() };
        let sol = mild_solve(&t, &|_, u, _, _| -u, &u0, 0.0, 0.1, 0.0, 1.0, &opts).unwrap();
        for (k, tk) in sol.t.iter().enumerate() {
            let e = (-tk).exp();
            assert!(sol.u[k].iter().all(|v| (v - e).abs() < 1e-4), "t={tk}");
        }
    }

    #[test]
    fn free_evolution_and_window_independence() {
        let t = table();
        let dx = 0.1;
        let u0: Vec<f64> = (0..200).map(|i| (-(i as f64 * dx - 10.0).powi(2)).exp()).collect();
        let opts = MildOptions { dt: 0.05, ..Default::default() };
        let sol = mild_solve(&t, &|_, _, _, _| 0.0, &u0, 0.0, dx, 0.0, 0.5, &opts).unwrap();
        let direct = heat_convolve(&t, &u0, dx, 0.5).unwrap();
        let last = sol.u.last().unwrap();
        assert!(last.iter().zip(&direct).all(|(a, b)| (a - b).abs() < 1e-8));

        let g = |_: f64, u: f64, _: f64, _: f64| -0.5 * u + 0.1 * (u * 3.0).sin();
        let a = mild_solve(&t, &g, &u0, 0.0, dx, 0.0, 0.5, &opts).unwrap();
        let w = a.window / 2.0;
        let b = mild_solve(&t, &g, &u0, 0.0, dx, 0.0, 0.5, &MildOptions { window: Some(w), ..opts.clone() }).unwrap();
        let d = a.u.last().unwrap().iter().zip(b.u.last().unwrap()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(d < 1e-9, "{d}");
    }
}
