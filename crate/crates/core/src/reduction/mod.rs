//! Lyapunov–Schmidt machinery: projections onto the translation mode ω′(r − ρ), the
//! multiplier c(t), the split of the projected error, the spectral gap of the linearized
//! operator and the reduced equation for the modulation h(t).

pub mod gap;
pub mod ode;

use serde::Serialize;

use crate::ansatz::{ops, Ansatz, ModulationState, RadialField};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::layer::LayerTable;
use crate::quad;

pub use gap::{dense_projected_minimum, spectral_gap, SpectralGap};
pub use ode::{
    apply_map, lambda_norm, lipschitz_probe, ode_residual, p_tilde, p_value, solve_reduced_ode, LipschitzReport,
    MapImage, ReducedOptions, ReducedSolution,
};

/// Kronrod panel width for integrals against ω′(r − ρ).
const PANEL: f64 = 0.5;

/// (n−3)(n−1)²/2, the coefficient of the Willmore term ρ′ = −K/ρ³.
pub(crate) fn willmore_coefficient(n: usize) -> f64 {
    let nf = n as f64;
    (nf - 3.0) * (nf - 1.0) * (nf - 1.0) / 2.0
}

/// ∫ₐᵇ f on Kronrod panels of width ≤ PANEL.
pub(crate) fn panel_integral(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let panels = ((b - a) / PANEL).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        for (x, w) in quad::kronrod_nodes(a + k as f64 * h, a + (k + 1) as f64 * h) {
            total += w * f(x)?;
        }
    }
    Ok(total)
}

/// Like `panel_integral`, with breakpoints at the edges δ₀/2 and δ₀ of the cut-off zone.
pub(crate) fn cut_integral(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, delta0: f64) -> Result<f64> {
    let mut pts = vec![a];
    pts.extend([0.5 * delta0, delta0].into_iter().filter(|&x| x > a && x < b));
    pts.push(b);
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += panel_integral(&mut f, w[0], w[1])?;
    }
    Ok(total)
}

/// The radial interval where ω′(r − ρ) is resolved by the layer table.
pub(crate) fn window(layer: &LayerTable, rho: f64) -> (f64, f64) {
    ((rho - layer.y_max).max(0.0), rho + layer.y_max)
}

fn radial_weight(n: usize, r: f64) -> f64 {
    r.powi(n as i32 - 1)
}

/// ∫₀^∞ φ(r)ω′(r − ρ)r^{n−1}dr by composite Simpson on the grid of φ.
pub fn project_kernel(phi: &RadialField, layer: &LayerTable, modulation: &ModulationState, t: f64) -> Result<f64> {
    let (rho, _) = modulation.rho(t)?;
    let n = modulation.n;
    let f: Vec<f64> = (0..phi.values.len())
        .map(|i| {
            let r = phi.r(i);
            phi.values[i] * layer.eval(r - rho)[1] * radial_weight(n, r)
        })
        .collect();
    Ok(quad::simpson(&f, phi.dx))
}

fn check_denominator(t: f64, rho: f64, n: usize, value: f64) -> Result<()> {
    if !(value.abs() >= 1e-8 * radial_weight(n, rho).abs()) {
        return Err(Error::Threshold { t, value });
    }
    Ok(())
}

/// ∫₀^∞ ∂ᵣω̂ ω′(r − ρ)r^{n−1}dr, the coefficient of c(t).
pub fn c_denominator(ansatz: &Ansatz, rho: f64, rho_prime: f64) -> Result<f64> {
    let (a, b) = window(ansatz.layer, rho);
    cut_integral(
        |r| {
            let p = ansatz.pieces(r, rho, rho_prime);
            Ok(p.omega_hat.d(1) * ansatz.layer.eval(r - rho)[1] * radial_weight(ansatz.n, r))
        },
        a,
        b,
        ansatz.cutoff.delta0,
    )
}

/// The multiplier c(t) that keeps φ orthogonal to ω′(r − ρ) when φ evolves by
/// φₜ = F′(z)[φ] + g + N(φ) − c ∂ᵣω̂. The linear term is used in its integrated-by-parts
/// form, so only φ, φᵣ and φᵣᵣ enter.
pub fn compute_c(phi: &RadialField, g: &RadialField, ansatz: &Ansatz, modulation: &ModulationState, t: f64) -> Result<f64> {
    phi.check_aligned(g)?;
    let n = ansatz.n;
    let m = n as f64 - 1.0;
    let (rho, rho_prime) = modulation.rho(t)?;
    let jp = phi.jets();
    let pot = ansatz.pot;
    let mut rhs = vec![0.0; phi.values.len()];
    let mut den = vec![0.0; phi.values.len()];
    for i in 1..phi.values.len() {
        let r = phi.r(i);
        let w = ansatz.layer.eval(r - rho);
        let p = ansatz.pieces(r, rho, rho_prime);
        let z = p.z();
        let [_, w1, w2, w3, _] = pot.derivs(z.v())?;
        let wr = radial_weight(n, r);
        let ph = &jp[i];
        let mode = w[3] + m / r * w[2] - w2 * w[1];
        let dual = -ph.d(2) - m / r * ph.d(1) + w2 * ph.v();
        let chem = z.laplacian(n, r) - w1;
        let nonlinear = ops::f_point(pot, n, r, &(z + *ph))? - ops::f_point(pot, n, r, &z)? - ops::fprime_point(pot, n, r, &z, ph)?;
        rhs[i] = (mode * dual + chem * w3 * ph.v() * w[1] - rho_prime * ph.v() * w[2] + (g.values[i] + nonlinear) * w[1]) * wr;
        den[i] = p.omega_hat.d(1) * w[1] * wr;
    }
    let d = quad::simpson(&den, phi.dx);
    check_denominator(t, rho, n, d)?;
    Ok(quad::simpson(&rhs, phi.dx) / d)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub t: f64,
    pub rho: f64,
    pub rho_prime: f64,
    /// ∫E ω′(r − ρ)r^{n−1}dr over (0, ∞).
    pub raw_projection: f64,
    /// ∫∂ᵣω̂ ω′(r − ρ)r^{n−1}dr.
    pub denominator: f64,
    /// c(t) for φ = 0.
    pub c: f64,
    /// The contribution of (0, δ₀).
    pub inner: f64,
    /// ∫_{δ₀}^∞ Ẽₗ ω′ r^{n−1}dr, l = 1..5.
    pub e_tilde: [f64; 5],
    /// |inner + ΣẼ − raw|.
    pub split_residual: f64,
    /// Ẽ₁ projection minus (ρ′ + (n−3)(n−1)²/(2ρ³))ρ^{n−1}∫ω′².
    pub leading_residual: f64,
    /// ρ^{n−1}log|t|/|t|^{5/4}.
    pub leading_scale: f64,
    pub slope_mass: f64,
}

/// Ẽ₁…Ẽ₅ at a radius r ≥ δ₀.
pub fn e_tilde_point(ansatz: &Ansatz, r: f64, rho: f64, rho_prime: f64) -> Result<[f64; 5]> {
    let n = ansatz.n;
    let nf = n as f64;
    let m = nf - 1.0;
    let c = m * (nf - 3.0);
    let pot = ansatz.pot;
    let p = ansatz.pieces(r, rho, rho_prime);
    let w = ansatz.layer.eval(r - rho);
    let oh = p.omega_hat;
    let wd = pot.derivs(oh.v())?;
    let w5 = pot.fifth(oh.v())?;
    let chem: Jet = oh.derivative().derivative() - oh.compose([wd[1], wd[2], wd[3], wd[4], w5]);
    let e1 = w[1] * (rho_prime + willmore_coefficient(n) / (r * r * r));
    let e2 = -chem.d(2) + wd[2] * chem.v();
    let e3 = 2.0 * m / r * (wd[2] - pot.eval(w[0], 2)?) * w[1];
    let lin = ops::fprime_point(pot, n, r, &oh, &p.z_tilde)?;
    let e4 = lin - c / (r * r) * ((nf - 3.0) / (2.0 * r) * w[1] + w[2]);
    let remainder = ops::f_point(pot, n, r, &p.z())? - ops::f_point(pot, n, r, &oh)? - lin;
    let e5 = remainder - p.dt_z_tilde;
    Ok([e1, e2, e3, e4, e5])
}

/// Projects E and its five pieces onto ω′(r − ρ) for the ansatz with φ = 0.
pub fn projected_error_split(ansatz: &Ansatz, modulation: &ModulationState, t: f64) -> Result<ProjectionReport> {
    let n = ansatz.n;
    let (rho, rho_prime) = modulation.rho(t)?;
    let layer = ansatz.layer;
    let delta0 = ansatz.cutoff.delta0;
    let (a, b) = window(layer, rho);
    let wr = |r: f64| layer.eval(r - rho)[1] * radial_weight(n, r);
    let e = |r: f64| Ok(ansatz.error_point(r, rho, rho_prime)? * wr(r));

    // E vanishes on (0, δ₀/2); the inner region is integrated separately so no panel
    // straddles the edge of the cut-off
    let inner = if a < delta0 {
        panel_integral(e, a.max(0.5 * delta0), delta0)?
    } else {
        0.0
    };
    let lo = a.max(delta0);
    let raw = inner + panel_integral(e, lo, b)?;
    let mut e_tilde = [0.0; 5];
    for (l, slot) in e_tilde.iter_mut().enumerate() {
        *slot = panel_integral(|r| Ok(e_tilde_point(ansatz, r, rho, rho_prime)?[l] * wr(r)), lo, b)?;
    }
    let denominator = c_denominator(ansatz, rho, rho_prime)?;
    check_denominator(t, rho, n, denominator)?;
    let slope_mass = layer.slope_mass();
    let leading = (rho_prime + willmore_coefficient(n) / rho.powi(3)) * radial_weight(n, rho) * slope_mass;
    let tt = t.abs();
    Ok(ProjectionReport {
        t,
        rho,
        rho_prime,
        raw_projection: raw,
        denominator,
        c: raw / denominator,
        inner,
        e_tilde,
        split_residual: (inner + e_tilde.iter().sum::<f64>() - raw).abs(),
        leading_residual: e_tilde[0] - leading,
        leading_scale: radial_weight(n, rho) * tt.ln() / tt.powf(1.25),
        slope_mass,
    })
}

/// ∫ω′(y)²y dy over the layer table; vanishes by parity.
pub fn slope_odd_moment(layer: &LayerTable) -> f64 {
    let f: Vec<f64> = (0..layer.len()).map(|j| layer.d1[j] * layer.d1[j] * layer.y(j)).collect();
    quad::simpson(&f, layer.step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::CutOff;
    use crate::correction::{build_correction, CorrectionTable};
    use crate::layer::build_layer;
    use crate::potential::Potential;

    fn setup() -> (Potential, LayerTable, CorrectionTable, CutOff) {
        let pot = Potential::Quartic;
        let layer = build_layer(&pot, 25.0, 1e-2).unwrap();
        let corr = build_correction(&layer).unwrap();
        (pot, layer, corr, CutOff::default())
    }

    #[test]
    fn kernel_projection_oracles() {
        let (_, layer, _, _) = setup();
        let m2 = layer.slope_mass();
        for (n, rho) in [(4, 20.0), (2, 30.0)] {
            let modl = ModulationState::fixed(n, rho);
            let phi = RadialField::from_fn(0.01, 6000, |r| {
                let y = r - rho;
                layer.eval(y)[1] * if y.abs() < 20.0 { 1.0 } else { 0.0 }
            });
            let v = project_kernel(&phi, &layer, &modl, 0.0).unwrap();
            let approx = rho.powi(n as i32 - 1) * m2;
            assert!(v > 0.0 && ((v - approx) / approx).abs() < 0.02, "{v} {approx}");
            assert_eq!(project_kernel(&phi.zeros_like(), &layer, &modl, 0.0).unwrap(), 0.0);
        }
        let (_, layer, corr, _) = setup();
        let modl = ModulationState::fixed(1, 30.0);
        let phi = RadialField::from_fn(0.01, 6000, |r| corr.eval(&layer, r - 30.0)[0]);
        assert!(project_kernel(&phi, &layer, &modl, 0.0).unwrap().abs() < 1e-6);
        assert!(slope_odd_moment(&layer).abs() < 1e-10);
    }

    #[test]
    fn multiplier_trivial_cases_and_threshold() {
        let (pot, layer, corr, cut) = setup();
        let a = Ansatz::new(&pot, &layer, &corr, &cut, 4);
        let modl = ModulationState::willmore(4);
        let t = -1e4;
        let ef = a.error_field(&modl, t, 0.01, 6000).unwrap();
        let zero = ef.e.zeros_like();
        assert_eq!(compute_c(&zero, &zero, &a, &modl, t).unwrap(), 0.0);
        let c = compute_c(&zero, &ef.e, &a, &modl, t).unwrap();
        let (rho, _) = modl.rho(t).unwrap();
        let den: Vec<f64> = (0..=6000)
            .map(|i| {
                let r = i as f64 * 0.01;
                a.pieces(r, rho, 0.0).omega_hat.d(1) * layer.eval(r - rho)[1] * r.powi(3)
            })
            .collect();
        let d = quad::simpson(&den, 0.01);
        let proj = project_kernel(&ef.e, &layer, &modl, t).unwrap();
        assert!((c * d - proj).abs() < 1e-10, "{} {}", c * d, proj);

        // a layer centred far outside the domain has no overlap with the mode
        let tiny = ModulationState::fixed(4, -40.0);
        let f = RadialField::from_fn(0.01, 4000, |_| 0.0);
        assert!(matches!(compute_c(&f, &f, &a, &tiny, t), Err(Error::Threshold { .. })));
    }

    #[test]
    fn multiplier_preserves_orthogonality() {
        let (pot, layer, corr, cut) = setup();
        let n = 4;
        let a = Ansatz::new(&pot, &layer, &corr, &cut, n);
        let modl = ModulationState::willmore(n);
        let t = -1e4;
        let dx = 0.01;
        let nodes = 6000;
        let (rho, rho_prime) = modl.rho(t).unwrap();
        let phi = RadialField::from_fn(dx, nodes, |r| 1e-3 * (r - rho - 0.7) * (-(r - rho - 0.3).powi(2) / 2.0).exp());
        let ef = a.error_field(&modl, t, dx, nodes).unwrap();
        let c = compute_c(&phi, &ef.e, &a, &modl, t).unwrap();

        // d/dt ∫φω′r³ from the undivided evolution equation must vanish
        let zf = a.build_z(&modl, t, dx, nodes).unwrap();
        let lin = crate::ansatz::apply_fprime(&pot, &zf.z, &phi, n).unwrap();
        let nl = crate::ansatz::nonlinear_n(&pot, &zf.z, &phi, n).unwrap();
        let f: Vec<f64> = (0..=nodes)
            .map(|i| {
                let r = i as f64 * dx;
                let w = layer.eval(r - rho);
                let dwh = a.pieces(r, rho, rho_prime).omega_hat.d(1);
                ((lin.values[i] + ef.e.values[i] + nl.values[i] - c * dwh) * w[1] - rho_prime * phi.values[i] * w[2])
                    * r.powi(3)
            })
            .collect();
        let drift = quad::simpson(&f, dx);
        let scale = quad::simpson(&f.iter().map(|v| v.abs()).collect::<Vec<_>>(), dx);
        assert!(drift.abs() < 1e-8 * scale.max(1.0), "{drift} {scale}");
        assert!(c.is_finite() && c != 0.0);
    }

    #[test]
    fn error_split_is_consistent() {
        let (pot, layer, corr, cut) = setup();
        let a = Ansatz::new(&pot, &layer, &corr, &cut, 4);
        let modl = ModulationState::willmore(4);
        let mut ratios = vec![];
        for t in [-1e3, -1e4, -1e5] {
            let rep = projected_error_split(&a, &modl, t).unwrap();
            assert!(rep.split_residual < 1e-10 * rep.raw_projection.abs().max(1e-3), "{rep:?}");
            assert!(rep.e_tilde[1].abs() < 1e-10 && rep.e_tilde[2].abs() < 1e-10, "{:?}", rep.e_tilde);
            let expect = rep.rho.powi(3) * rep.slope_mass;
            assert!((rep.denominator - expect).abs() < 0.1 * expect);
            ratios.push(rep.leading_residual / rep.leading_scale);
        }
        assert!(ratios.iter().all(|r| r.is_finite() && r.abs() < 100.0), "{ratios:?}");
    }
}
