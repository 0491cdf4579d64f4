//! The correction layer ω̃(y) = −ω′(y)·J(y), with
//! J(y) = ∫₀ʸ g, g = I/ω′², I(y) = ∫_{−∞}^y s ω′(s)²/2 ds.
//!
//! It solves L*ω̃ = ½yω′ with L* = −∂yy + W″(ω), is odd, and is orthogonal to ω′.
//! I is even (its integrand is odd with zero total mass), so it is accumulated over
//! y ≤ 0 only, starting from the exponential tail below −Y.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::QuinticHermite;
use crate::layer::LayerTable;
use crate::quad;

#[derive(Debug, Clone)]
pub struct CorrectionTable {
    pub step: f64,
    pub y_max: f64,
    pub wt: Vec<f64>,
    pub wt1: Vec<f64>,
    pub wt2: Vec<f64>,
    pub wt3: Vec<f64>,
    pub wt4: Vec<f64>,
    pub inner: Vec<f64>,
    pub g: Vec<f64>,
    pub outer: Vec<f64>,
    /// Richardson estimate (h vs 2h) of the relative error of the inner integral.
    pub quadrature_error: f64,
    i_interp: QuinticHermite,
    j_interp: QuinticHermite,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    /// −ω̃″ + W″(ω)ω̃ − ½yω′ from the analytic derivative chain.
    pub analytic_first: f64,
    /// (L*)²ω̃ + ω″ from the analytic derivative chain.
    pub analytic_second: f64,
    /// Same residuals with the derivatives replaced by sixth-order differences of the table.
    pub fd_first: f64,
    pub fd_second: f64,
    /// Both residuals at y = 0.
    pub at_origin: f64,
    /// L*ω′ residual (analytic chain and finite differences).
    pub translation_mode: f64,
    pub translation_mode_fd: f64,
    pub orthogonality: f64,
    pub max_oddness: f64,
    pub envelope_constant: f64,
    pub fitted_decay_rate: f64,
    pub inner_total: f64,
    pub window: f64,
}

/// g′ = y/2 − 2gω″/ω′.
fn g_prime(y: f64, g: f64, d1: f64, d2: f64) -> f64 {
    0.5 * y - 2.0 * g * d2 / d1
}

pub fn build_correction(layer: &LayerTable) -> Result<CorrectionTable> {
    let n = layer.len();
    let half = layer.half();
    let h = layer.step;
    let (alpha, beta) = (layer.alpha, layer.beta);
    let y_max = layer.y_max;
    if layer.d1.iter().any(|&s| s < 1e-300) {
        return Err(Error::Numerical("ω′ underflows inside the table".into()));
    }

    // I on y ≤ 0, nodes 0..=half.
    let ys: Vec<f64> = (0..=half).map(|j| layer.y(j)).collect();
    let f: Vec<f64> = (0..=half).map(|j| 0.5 * ys[j] * layer.d1[j] * layer.d1[j]).collect();
    let df: Vec<f64> = (0..=half)
        .map(|j| 0.5 * layer.d1[j] * layer.d1[j] + ys[j] * layer.d1[j] * layer.d2[j])
        .collect();
    // ∫_{−∞}^{−Y} s (αβe^{αs})²/2 ds
    let ab2 = (alpha * beta).powi(2);
    let tail = 0.5 * ab2 * (-2.0 * alpha * y_max).exp() * (-y_max / (2.0 * alpha) - 1.0 / (4.0 * alpha * alpha));
    let i_left = quad::cumulative_corrected_trapezoid(&f, &df, h, tail);

    // Richardson check at 2h on the same nodes.
    let f2: Vec<f64> = f.iter().step_by(2).cloned().collect();
    let df2: Vec<f64> = df.iter().step_by(2).cloned().collect();
    let i_coarse = quad::cumulative_corrected_trapezoid(&f2, &df2, 2.0 * h, tail);
    let quadrature_error = i_coarse
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let fine = i_left[2 * k];
            ((fine - c) / 15.0).abs() / fine.abs().max(1e-300)
        })
        .fold(0.0, f64::max);

    let mut inner = vec![0.0; n];
    for i in 0..=half {
        inner[i] = i_left[i];
        inner[n - 1 - i] = i_left[i];
    }
    let g: Vec<f64> = (0..n).map(|j| inner[j] / (layer.d1[j] * layer.d1[j])).collect();
    let gp: Vec<f64> = (0..n).map(|j| g_prime(layer.y(j), g[j], layer.d1[j], layer.d2[j])).collect();

    // J = ∫₀ʸ g, odd; accumulate from the origin outwards.
    let right: Vec<f64> = (half..n).map(|j| g[j]).collect();
    let right_d: Vec<f64> = (half..n).map(|j| gp[j]).collect();
    let j_right = quad::cumulative_corrected_trapezoid(&right, &right_d, h, 0.0);
    let mut outer = vec![0.0; n];
    for (k, v) in j_right.iter().enumerate() {
        outer[half + k] = *v;
        outer[half - k] = -*v;
    }

    let mut wt = vec![0.0; n];
    let mut wt1 = vec![0.0; n];
    let mut wt2 = vec![0.0; n];
    let mut wt3 = vec![0.0; n];
    let mut wt4 = vec![0.0; n];
    for j in 0..n {
        let y = layer.y(j);
        let w5 = layer.eval6(y)[5];
        let d = derivs_from(y, [layer.d1[j], layer.d2[j], layer.d3[j], layer.d4[j], w5], g[j], gp[j], outer[j], inner[j]);
        wt[j] = d[0];
        wt1[j] = d[1];
        wt2[j] = d[2];
        wt3[j] = d[3];
        wt4[j] = d[4];
    }

    let i_d1: Vec<f64> = (0..n).map(|j| 0.5 * layer.y(j) * layer.d1[j] * layer.d1[j]).collect();
    let i_d2: Vec<f64> = (0..n)
        .map(|j| 0.5 * layer.d1[j] * layer.d1[j] + layer.y(j) * layer.d1[j] * layer.d2[j])
        .collect();
    let y0 = layer.y(0);
    let i_interp = QuinticHermite::new(y0, h, inner.clone(), i_d1, i_d2);
    let j_interp = QuinticHermite::new(y0, h, outer.clone(), g.clone(), gp);

    Ok(CorrectionTable {
        step: h,
        y_max,
        wt,
        wt1,
        wt2,
        wt3,
        wt4,
        inner,
        g,
        outer,
        quadrature_error,
        i_interp,
        j_interp,
    })
}

/// [ω̃, ω̃′, ω̃″, ω̃‴, ω̃⁗] from layer derivatives w = [ω′, ω″, ω‴, ω⁗, ω⁽⁵⁾] and g, g′, J, I.
fn derivs_from(y: f64, w: [f64; 5], g: f64, gp: f64, j: f64, i: f64) -> [f64; 5] {
    let [w1, w2, w3, w4, w5] = w;
    [
        -w1 * j,
        -w2 * j - i / w1,
        -w3 * j - 0.5 * y * w1,
        -w4 * j - w3 * g - 0.5 * w1 - 0.5 * y * w2,
        -w5 * j - 2.0 * w4 * g - w3 * gp - w2 - 0.5 * y * w3,
    ]
}

impl CorrectionTable {
    pub fn len(&self) -> usize {
        self.wt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wt.is_empty()
    }

    /// [ω̃, ω̃′, ω̃″, ω̃‴, ω̃⁗] at any y. Beyond the table J is continued by its quadratic
    /// Taylor polynomial (ω̃ is below 1e−12 there).
    pub fn eval(&self, layer: &LayerTable, y: f64) -> [f64; 5] {
        let e = layer.eval6(y);
        let w = [e[1], e[2], e[3], e[4], e[5]];
        let a = y.abs();
        let (i, j, g) = if a <= self.y_max {
            let i = self.i_interp.eval(y);
            let g = i / (w[0] * w[0]);
            (i, self.j_interp.eval(y), g)
        } else {
            let edge = self.y_max.copysign(y);
            let (j0, g0) = self.j_interp.eval2(edge);
            let gp0 = g_prime(edge, g0, layer.eval(edge)[1], layer.eval(edge)[2]);
            let dy = y - edge;
            let g = g0 + gp0 * dy;
            (g * w[0] * w[0], j0 + g0 * dy + 0.5 * gp0 * dy * dy, g)
        };
        let gp = g_prime(y, g, w[0], w[1]);
        derivs_from(y, w, g, gp, j, i)
    }

    pub fn check_identities(&self, layer: &LayerTable, window: f64) -> IdentityReport {
        let pot = layer.potential();
        let n = self.len();
        let half = layer.half();
        let w2 = |s: f64| pot.eval(s, 2).unwrap_or(f64::NAN);
        let w3 = |s: f64| pot.eval(s, 3).unwrap_or(f64::NAN);
        let w4 = |s: f64| pot.eval(s, 4).unwrap_or(f64::NAN);

        let mut analytic_first = 0.0f64;
        let mut analytic_second = 0.0f64;
        let mut translation = 0.0f64;
        let mut at_origin = 0.0f64;
        for j in 0..n {
            let y = layer.y(j);
            if y.abs() > window {
                continue;
            }
            let w = layer.omega[j];
            let (a2, a3, a4) = (w2(w), w3(w), w4(w));
            let (d1, d2) = (layer.d1[j], layer.d2[j]);
            let r1 = -self.wt2[j] + a2 * self.wt[j] - 0.5 * y * d1;
            // v = L*ω̃ and v″ by the product rule
            let v = -self.wt2[j] + a2 * self.wt[j];
            let wv2 = a4 * d1 * d1 * self.wt[j] + a3 * d2 * self.wt[j] + 2.0 * a3 * d1 * self.wt1[j] + a2 * self.wt2[j];
            let v2 = -self.wt4[j] + wv2;
            let r2 = -v2 + a2 * v + d2;
            analytic_first = analytic_first.max(r1.abs());
            analytic_second = analytic_second.max(r2.abs());
            translation = translation.max((-layer.d3[j] + a2 * d1).abs());
            if j == half {
                at_origin = r1.abs().max(r2.abs());
            }
        }

        // Sixth-order central second differences on a strided sub-grid.
        let c = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0];
        let second = |vals: &dyn Fn(i64) -> f64, hh: f64| -> f64 {
            (c[0] * (vals(-3) + vals(3)) + c[1] * (vals(-2) + vals(2)) + c[2] * (vals(-1) + vals(1)) + c[3] * vals(0))
                / (hh * hh)
        };
        let fd_residuals = |stride: usize| -> (f64, f64, f64) {
            let hh = stride as f64 * layer.step;
            let idx: Vec<usize> = (0..n).step_by(stride).collect();
            let m = idx.len();
            let wt: Vec<f64> = idx.iter().map(|&j| self.wt[j]).collect();
            let om1: Vec<f64> = idx.iter().map(|&j| layer.d1[j]).collect();
            let mut v = vec![f64::NAN; m];
            let mut first = 0.0f64;
            let mut tm = 0.0f64;
            for k in 3..m - 3 {
                let j = idx[k];
                let a2 = w2(layer.omega[j]);
                let l = -second(&|o| wt[(k as i64 + o) as usize], hh) + a2 * wt[k];
                v[k] = l;
                let y = layer.y(j);
                if y.abs() <= window {
                    first = first.max((l - 0.5 * y * layer.d1[j]).abs());
                    let lw = -second(&|o| om1[(k as i64 + o) as usize], hh) + a2 * om1[k];
                    tm = tm.max(lw.abs());
                }
            }
            let mut sec = 0.0f64;
            for k in 6..m - 6 {
                let j = idx[k];
                let y = layer.y(j);
                if y.abs() > window {
                    continue;
                }
                let a2 = w2(layer.omega[j]);
                let l2 = -second(&|o| v[(k as i64 + o) as usize], hh) + a2 * v[k];
                sec = sec.max((l2 + layer.d2[j]).abs());
            }
            (first, sec, tm)
        };
        let stride = |hh: f64| ((hh / layer.step).round() as usize).max(1);
        let (fd_first, _, tm_fd) = fd_residuals(stride(0.01));
        let (_, fd_second, _) = fd_residuals(stride(0.05));

        let prod: Vec<f64> = (0..n).map(|j| layer.d1[j] * self.wt[j]).collect();
        let orthogonality = quad::simpson(&prod, layer.step);
        let max_oddness = (0..=half).map(|i| (self.wt[half + i] + self.wt[half - i]).abs()).fold(0.0, f64::max);
        let rate = 0.75 * layer.alpha;
        let envelope_constant = (0..n)
            .map(|j| self.wt[j].abs() * (rate * layer.y(j).abs()).exp())
            .fold(0.0, f64::max);
        // Least-squares slope of ln|ω̃| on 5 ≤ y ≤ 20.
        let pts: Vec<(f64, f64)> = (half..n)
            .filter(|&j| (5.0..=20.0).contains(&layer.y(j)) && self.wt[j] != 0.0)
            .map(|j| (layer.y(j), self.wt[j].abs().ln()))
            .collect();
        let fitted_decay_rate = {
            let m = pts.len() as f64;
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
            let (mx, my) = (sx / m, sy / m);
            let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
            -num / den
        };
        // I(+∞) = 0: accumulate the odd integrand over the whole table directly.
        let f: Vec<f64> = (0..n).map(|j| 0.5 * layer.y(j) * layer.d1[j] * layer.d1[j]).collect();
        let inner_total = quad::simpson(&f, layer.step);

        IdentityReport {
            analytic_first,
            analytic_second,
            fd_first,
            fd_second,
            at_origin,
            translation_mode: translation,
            translation_mode_fd: tm_fd,
            orthogonality,
            max_oddness,
            envelope_constant,
            fitted_decay_rate,
            inner_total,
            window,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::build_layer;
    use crate::potential::Potential;

    #[test]
    fn coarse_table_identities() {
        let layer = build_layer(&Potential::Quartic, 25.0, 5e-3).unwrap();
        let c = build_correction(&layer).unwrap();
        assert_eq!(c.wt[layer.half()], 0.0);
        let r = c.check_identities(&layer, 20.0);
        assert!(r.fd_first < 1e-6, "{r:?}");
        assert!(r.fd_second < 1e-5, "{r:?}");
        assert!(r.orthogonality.abs() < 1e-8);
        // off-node evaluation agrees with the nodes
        let j = layer.half() + 301;
        let e = c.eval(&layer, layer.y(j));
        assert!((e[0] - c.wt[j]).abs() < 1e-13);
        assert!((e[2] - c.wt2[j]).abs() < 1e-12);
        let mid = c.eval(&layer, layer.y(j) + 0.5 * layer.step);
        assert!((mid[0] - 0.5 * (c.wt[j] + c.wt[j + 1])).abs() < 1e-5);
    }
}
