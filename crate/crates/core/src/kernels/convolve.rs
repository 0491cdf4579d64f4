//! One-dimensional convolution with the biharmonic heat kernel.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

use super::KernelTable;

/// Cell-averaged weights wⱼ = (2/π)∫₀^Ξ m(ξ) cos(ξ j dx) sin(ξ dx/2)/ξ dξ for j = 0..=jmax,
/// i.e. ∫ over the cell [(j−½)dx, (j+½)dx] of the kernel whose Fourier multiplier is m.
/// Panels are sized so that the fastest cosine turns by at most one radian per panel.
pub fn fourier_cell_weights(m: impl Fn(f64) -> f64, xi_max: f64, dx: f64, jmax: usize) -> Vec<f64> {
    let freq = (jmax as f64 + 0.5) * dx;
    let panels = ((xi_max * freq).ceil() as usize).max(8);
    let width = xi_max / panels as f64;
    let mut w = vec![0.0; jmax + 1];
    for k in 0..panels {
        for (xi, wt) in quad::kronrod_nodes(k as f64 * width, (k + 1) as f64 * width) {
            let base = if xi == 0.0 { 0.5 * dx } else { (0.5 * xi * dx).sin() / xi };
            let c = wt * m(xi) * base;
            // cos(jθ) by the Chebyshev recurrence
            let theta = xi * dx;
            let two_cos = 2.0 * theta.cos();
            let (mut prev, mut cur) = (theta.cos(), 1.0);
            for wj in w.iter_mut() {
                *wj += c * cur;
                let next = two_cos * cur - prev;
                prev = cur;
                cur = next;
            }
        }
    }
    w.iter_mut().for_each(|v| *v *= 2.0 / PI);
    w
}

/// One-sided weights (w₀, w₁, …) of Γₜ on a grid of spacing dx. Point samples dx·p₁(t, j dx)
/// when the kernel scale t^{1/4} spans at least four cells, cell averages otherwise.
pub fn heat_weights(table: &KernelTable, t: f64, dx: f64) -> Result<Vec<f64>> {
    if table.n != 1 {
        return Err(Error::Unsupported(format!("convolution only for n = 1 (table has n = {})", table.n)));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time {t} must be positive")));
    }
    let q = t.powf(0.25);
    let jmax = ((table.s_max * q) / dx).ceil() as usize + 2;
    let mut w: Vec<f64> = if q >= 4.0 * dx {
        (0..=jmax).map(|j| dx * table.p(t, j as f64 * dx)).collect()
    } else {
        let xi_max = (60.0 / t).powf(0.25);
        fourier_cell_weights(|x| (-t * x.powi(4)).exp(), xi_max, dx, jmax)
    };
    // The kernel tail beyond the table carries O(1e-9) of mass; return it to the centre so
    // constants are reproduced exactly.
    let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
    w[0] += 1.0 - total;
    Ok(w)
}

/// Symmetric discrete convolution with one-sided weights w, extending u by its end values.
pub fn convolve_weights(u: &[f64], w: &[f64]) -> Vec<f64> {
    let m = u.len();
    // tail[k] = Σ_{j ≥ k} w_j
    let mut tail = vec![0.0; w.len() + 1];
    for k in (0..w.len()).rev() {
        tail[k] = tail[k + 1] + w[k];
    }
    let tail_at = |k: usize| if k < tail.len() { tail[k] } else { 0.0 };
    let jm = w.len() - 1;
    (0..m)
        .map(|i| {
            let lo = i.saturating_sub(jm);
            let hi = (i + jm).min(m - 1);
            let mut s = 0.0;
            for (j, uj) in u.iter().enumerate().take(hi + 1).skip(lo) {
                s += w[i.abs_diff(j)] * uj;
            }
            s + u[0] * tail_at(i + 1) + u[m - 1] * tail_at(m - i)
        })
        .collect()
}

/// Γₜ[u₀] on a uniform 1-D grid with constant extension beyond both ends.
pub fn heat_convolve(table: &KernelTable, u0: &[f64], dx: f64, t: f64) -> Result<Vec<f64>> {
    if u0.is_empty() {
        return Ok(vec![]);
    }
    let w = heat_weights(table, t, dx)?;
    Ok(convolve_weights(u0, &w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_weights_agree_with_point_samples() {
        let table = KernelTable::build(1, 20.0, 1e-2).unwrap();
        let t = 1.0;
        let dx = 0.05;
        let pw = heat_weights(&table, t, dx).unwrap();
        let fw = fourier_cell_weights(|x| (-t * x.powi(4)).exp(), (60.0f64).powf(0.25), dx, pw.len() - 1);
        // cell averages differ from point samples by dx²/24·p″
        let diff = pw.iter().zip(&fw).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 2e-5, "{diff}");
        let total: f64 = fw[0] + 2.0 * fw[1..].iter().sum::<f64>();
        // the kernel tail beyond s = 20 still holds a little mass
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn constants_and_linearity() {
        let table = KernelTable::build(1, 20.0, 1e-2).unwrap();
        let dx = 0.05;
        let ones = vec![1.0; 400];
        for t in [1e-6, 0.5, 2.0] {
            let out = heat_convolve(&table, &ones, dx, t).unwrap();
            assert!(out.iter().all(|v| (v - 1.0).abs() < 1e-9), "t={t}");
        }
        let a: Vec<f64> = (0..400).map(|i| (i as f64 * dx * 0.3).sin()).collect();
        let b: Vec<f64> = (0..400).map(|i| (-(i as f64 * dx - 10.0).powi(2)).exp()).collect();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
        let (ga, gb, gm) = (
            heat_convolve(&table, &a, dx, 1.0).unwrap(),
            heat_convolve(&table, &b, dx, 1.0).unwrap(),
            heat_convolve(&table, &mix, dx, 1.0).unwrap(),
        );
        for i in 0..400 {
            assert!((gm[i] - 2.0 * ga[i] + 3.0 * gb[i]).abs() < 1e-12);
        }
    }
}
