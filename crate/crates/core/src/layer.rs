//! The heteroclinic layer ω: ω″ = W′(ω), ω(0) = 0, ω(±∞) = ±1, ω′ > 0.
//!
//! For y ≥ 0 we work with v = −ln(1 − ω), in which the inverse map reads
//! y = Λ(v) = ∫₀^v G, with G(v) = e^{−v}/√(2(W(1 − e^{−v}) − W(1))) → 1/α. Storing the
//! complement ε = 1 − ω keeps full relative precision deep into the tails, where ω itself
//! rounds to ±1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::QuinticHermite;
use crate::potential::Potential;
use crate::quad;

/// Largest v for which the β-integrand is integrated (e^{−40} is below f64 resolution).
const V_MAX: f64 = 40.0;
const ROOT_MAX_ITER: usize = 60;

fn g_of_v(pot: &Potential, v: f64) -> f64 {
    let eps = (-v).exp();
    eps / (2.0 * pot.excess_near_well(eps)).sqrt()
}

/// λ(s) = ∫₀ˢ (2(W(τ) − W(1)))^{−1/2} dτ, the inverse of ω.
pub fn lambda_of_s(pot: &Potential, s: f64) -> Result<f64> {
    if !(s.abs() < 1.0) {
        return Err(Error::Domain(format!("lambda requires |s| < 1, got {s}")));
    }
    let inner = |t: f64| -> f64 { 1.0 / (2.0 * pot.excess(t).unwrap_or(f64::NAN)).sqrt() };
    let split = 0.5;
    if s.abs() <= split {
        return quad::integrate(inner, 0.0, s, 1e-15, 1e-14);
    }
    let sign = s.signum();
    let core = quad::integrate(inner, 0.0, sign * split, 1e-15, 1e-14)?;
    // τ = ±(1 − e^{−v}) near the well, dτ = ±e^{−v} dv; W is even, so the distance to
    // either well enters through the same cancellation-free excess.
    let v0 = -(1.0 - split).ln();
    let v1 = -(1.0 - s.abs()).ln();
    let tail = quad::integrate(|v: f64| g_of_v(pot, v), v0, v1, 1e-15, 1e-14)?;
    Ok(core + sign * tail)
}

/// β = exp{α ∫₀¹ [(2(W(s) − W(1)))^{−1/2} − (α(1 − s))^{−1}] ds}, so that 1 − ω(y) ~ βe^{−αy}.
pub fn beta(pot: &Potential) -> Result<f64> {
    let alpha = pot.alpha()?;
    let inv = 1.0 / alpha;
    let mut total = 0.0;
    // Panel the half-line so the adaptive rule sees the O(1) region at full resolution.
    let edges = [0.0, 2.0, 5.0, 10.0, 20.0, V_MAX];
    for w in edges.windows(2) {
        total += quad::integrate(|v| g_of_v(pot, v) - inv, w[0], w[1], 1e-16, 1e-14)?;
    }
    Ok((alpha * total).exp())
}

/// Tabulated layer on the uniform grid y_j = −Y + j·step.
#[derive(Debug, Clone)]
pub struct LayerTable {
    pot: Potential,
    pub y_max: f64,
    pub step: f64,
    pub omega: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub d4: Vec<f64>,
    /// 1 − |ω| at each node (accurate in the tails).
    pub comp: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Second tail coefficient: 1 − ω ≈ βe^{−αy} − κβ²e^{−2αy}, κ = W‴(1)/(6W″(1)).
    pub kappa: f64,
    eps_interp: QuinticHermite,
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerReport {
    pub min_slope: f64,
    pub max_oddness: f64,
    pub max_ode_residual: f64,
    pub max_energy_residual: f64,
    pub in_range: bool,
}

impl LayerTable {
    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn half(&self) -> usize {
        (self.len() - 1) / 2
    }

    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - self.half() as f64) * self.step
    }

    /// Complement ε(|y|) = 1 − |ω(y)| at any y, using the exponential tail beyond Y − 1.
    pub fn complement(&self, y: f64) -> f64 {
        let a = y.abs();
        let blend_start = self.y_max - 2.0;
        if a <= blend_start {
            return self.eps_interp.eval(a);
        }
        let tail = self.tail_complement(a);
        if a >= blend_start + 1.0 {
            return tail;
        }
        let th = a - blend_start;
        (1.0 - th) * self.eps_interp.eval(a) + th * tail
    }

    fn tail_complement(&self, a: f64) -> f64 {
        let e = self.beta * (-self.alpha * a).exp();
        e - self.kappa * e * e
    }

    /// [ω, ω′, ω″, ω‴, ω⁗, ω⁽⁵⁾] at y. Higher derivatives follow from ω′ = √(2(W(ω)−W(1)))
    /// and the ODE, so ω″ − W′(ω) vanishes identically.
    pub fn eval6(&self, y: f64) -> [f64; 6] {
        let eps = self.complement(y);
        let sg = if y < 0.0 { -1.0 } else { 1.0 };
        let w = sg * (1.0 - eps);
        let d1 = (2.0 * self.pot.excess_near_well(eps)).sqrt();
        let d2 = sg * self.pot.slope_near_well(eps);
        let w2 = self.pot.eval(w, 2).unwrap_or(f64::NAN);
        let w3 = self.pot.eval(w, 3).unwrap_or(f64::NAN);
        let w4 = self.pot.eval(w, 4).unwrap_or(f64::NAN);
        let d3 = w2 * d1;
        let d4 = w3 * d1 * d1 + w2 * d2;
        let d5 = w4 * d1 * d1 * d1 + 3.0 * w3 * d1 * d2 + w2 * w2 * d1;
        [w, d1, d2, d3, d4, d5]
    }

    pub fn eval(&self, y: f64) -> [f64; 5] {
        let e = self.eval6(y);
        [e[0], e[1], e[2], e[3], e[4]]
    }

    /// ∫ ω′² dy (the translation-mode mass), by Simpson on the table.
    pub fn slope_mass(&self) -> f64 {
        let sq: Vec<f64> = self.d1.iter().map(|v| v * v).collect();
        quad::simpson(&sq, self.step)
    }

    pub fn check_invariants(&self) -> LayerReport {
        let n = self.len();
        let half = self.half();
        let min_slope = self.d1.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_oddness = (0..=half)
            .map(|i| (self.omega[half + i] + self.omega[half - i]).abs())
            .fold(0.0, f64::max);
        let in_range = self.omega.iter().all(|w| w.abs() < 1.0);
        // Independent ODE residual: sixth-order second difference of the complement,
        // sampled with stride so rounding stays below the truncation error.
        let stride = 10usize;
        let h = self.step * stride as f64;
        let c = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0];
        let mut max_ode = 0.0f64;
        for j in (half + 3 * stride..n - 3 * stride).step_by(stride) {
            let e = |k: i64| self.comp[(j as i64 + k * stride as i64) as usize];
            let second = (c[0] * (e(-3) + e(3)) + c[1] * (e(-2) + e(2)) + c[2] * (e(-1) + e(1)) + c[3] * e(0))
                / (h * h);
            // ε″ = −ω″ = −W′(1 − ε)
            let res = (-second - self.pot.slope_near_well(self.comp[j])).abs();
            max_ode = max_ode.max(res);
        }
        let max_energy = (0..n)
            .map(|j| {
                let lhs = 0.5 * self.d1[j] * self.d1[j];
                (lhs - self.pot.excess_near_well(self.comp[j])).abs()
            })
            .fold(0.0, f64::max);
        LayerReport { min_slope, max_oddness, max_ode_residual: max_ode, max_energy_residual: max_energy, in_range }
    }
}

/// Builds the layer on [−Y, Y] by monotone root-finding of Λ(v) = y node by node.
pub fn build_layer(pot: &Potential, y_max: f64, step: f64) -> Result<LayerTable> {
    if !(y_max > 0.0 && step > 0.0) {
        return Err(Error::Argument("Y and step must be positive".into()));
    }
    let alpha = pot.alpha()?;
    let beta = beta(pot)?;
    let kappa = match pot.third_at_well() {
        Ok(w3) => w3 / (6.0 * pot.curvature_at_well()),
        Err(_) => 0.0,
    };
    let half = (y_max / step).round() as usize;
    let y_max = half as f64 * step;

    // Non-negative half: v_i with Λ(v_i) = i·step.
    let mut v = vec![0.0; half + 1];
    for i in 1..=half {
        let target = step; // increment of Λ from the previous node
        let v0 = v[i - 1];
        let incr = |b: f64| quad::gk15(&mut |t| g_of_v(pot, t), v0, b).0;
        let mut lo = v0;
        let mut hi = v0 + 2.0 * step / g_of_v(pot, v0);
        let mut grow = 0;
        while incr(hi) < target {
            hi = v0 + 2.0 * (hi - v0);
            grow += 1;
            if grow > 60 {
                return Err(Error::Numerical(format!("layer root bracket failed at node {i}")));
            }
        }
        let mut x = v0 + step / g_of_v(pot, v0);
        let mut converged = false;
        for _ in 0..ROOT_MAX_ITER {
            let f = incr(x) - target;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let dx = f / g_of_v(pot, x);
            let mut nx = x - dx;
            if !(nx > lo && nx < hi) {
                nx = 0.5 * (lo + hi);
            }
            if (nx - x).abs() <= 4.0 * f64::EPSILON * nx.abs().max(1.0) || hi - lo < 1e-15 {
                x = nx;
                converged = true;
                break;
            }
            x = nx;
        }
        if !converged {
            return Err(Error::Numerical(format!("layer root-find did not converge at node {i}")));
        }
        v[i] = x;
    }

    let n = 2 * half + 1;
    let mut omega = vec![0.0; n];
    let mut comp = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let mut d3 = vec![0.0; n];
    let mut d4 = vec![f64::NAN; n];
    let have_third = pot.eval(0.0, 3).is_ok();
    for i in 0..=half {
        let eps = (-v[i]).exp();
        let w = 1.0 - eps;
        let s1 = (2.0 * pot.excess_near_well(eps)).sqrt();
        let s2 = pot.slope_near_well(eps);
        let w2 = pot.eval(w, 2)?;
        let s3 = w2 * s1;
        let s4 = if have_third { pot.eval(w, 3)? * s1 * s1 + w2 * s2 } else { f64::NAN };
        for (j, sg) in [(half + i, 1.0), (half - i, -1.0)] {
            omega[j] = sg * w;
            comp[j] = eps;
            d1[j] = s1;
            d2[j] = sg * s2;
            d3[j] = s3;
            d4[j] = sg * s4;
        }
    }
    omega[half] = 0.0;
    if !have_third {
        // Without W‴ the fourth derivative comes from differencing ω‴.
        for j in 0..n {
            let (a, b) = (j.saturating_sub(1), (j + 1).min(n - 1));
            d4[j] = (d3[b] - d3[a]) / ((b - a) as f64 * step);
        }
    }

    let pos: Vec<usize> = (half..n).collect();
    let eps_interp = QuinticHermite::new(
        0.0,
        step,
        pos.iter().map(|&j| comp[j]).collect(),
        pos.iter().map(|&j| -d1[j]).collect(),
        pos.iter().map(|&j| -d2[j]).collect(),
    );

    let table = LayerTable {
        pot: pot.clone(),
        y_max,
        step,
        omega,
        d1,
        d2,
        d3,
        d4,
        comp,
        alpha,
        beta,
        kappa,
        eps_interp,
    };
    if table.d1.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Numerical("layer lost monotonicity".into()));
    }
    Ok(table)
}

/// Λ(v) for the complement-variable round trip: y as a function of ε = 1 − ω (y ≥ 0).
pub fn y_of_complement(pot: &Potential, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("complement {eps} not in (0, 1]")));
    }
    let v1 = -eps.ln();
    quad::integrate(|v| g_of_v(pot, v), 0.0, v1, 1e-15, 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_matches_closed_form_for_quartic() {
        let p = Potential::Quartic;
        let want = 2f64.sqrt() * 0.5f64.atanh();
        assert!((lambda_of_s(&p, 0.5).unwrap() - want).abs() < 1e-12);
        assert!((lambda_of_s(&p, -0.5).unwrap() + want).abs() < 1e-12);
        assert_eq!(lambda_of_s(&p, 0.0).unwrap(), 0.0);
        let s = 0.999_999;
        assert!((lambda_of_s(&p, s).unwrap() - 2f64.sqrt() * s.atanh()).abs() < 1e-10);
        assert!(lambda_of_s(&p, 1.0).is_err());
    }

    #[test]
    fn beta_of_quartic_is_two() {
        assert!((beta(&Potential::Quartic).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn small_layer_matches_tanh() {
        let p = Potential::Quartic;
        let t = build_layer(&p, 12.0, 1e-2).unwrap();
        let s2 = 2f64.sqrt();
        for j in 0..t.len() {
            let y = t.y(j);
            assert!((t.omega[j] - (y / s2).tanh()).abs() < 1e-13, "y={y}");
        }
        assert!((t.d1[t.half()] - 1.0 / s2).abs() < 1e-15);
        // off-node evaluation
        for k in 0..200 {
            let y = -14.0 + 28.0 * k as f64 / 199.0 + 1e-3;
            let e = t.eval(y);
            let th = (y / s2).tanh();
            assert!((e[0] - th).abs() < 1e-12, "y={y}");
            assert!((e[1] - (1.0 - th * th) / s2).abs() < 1e-12);
        }
    }
}
