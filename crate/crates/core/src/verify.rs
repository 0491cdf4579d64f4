//! The acceptance suite: quantitative checks A1–A11, each returning measured values against
//! fixed limits.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use serde::Serialize;

use crate::ansatz::{apply_f, apply_fprime, apply_fsecond, Ansatz, CutOff, ModulationState, RadialField, Weight};
use crate::correction::{build_correction, CorrectionTable};
use crate::error::{Error, Result};
use crate::geometry;
use crate::kernels::{heat_convolve, q_kernel, KernelTable};
use crate::layer::{beta, build_layer, LayerTable};
use crate::pde::{self, EvolveOptions};
use crate::potential::Potential;
use crate::reduction::{self, ReducedOptions};

pub const ALL: [&str; 11] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11"];

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// value < limit
    Below,
    /// value ≥ limit
    AtLeast,
    /// |value − limit| < tolerance stored in `tol`
    Near,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub bound: Bound,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub metrics: Vec<Metric>,
    pub seconds: f64,
    /// Set when the check could not be evaluated at all.
    pub error: Option<String>,
}

impl CheckOutcome {
    /// One-line summary: `A1 PASS layer oracle (0.41 s) sup|ω−tanh|=3.1e-12<1e-8; ...`.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {} {} ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds
        );
        for m in &self.metrics {
            let rel = match m.bound {
                Bound::Below => format!("{:.3e} < {:.1e}", m.value, m.limit),
                Bound::AtLeast => format!("{:.3e} >= {:.1e}", m.value, m.limit),
                Bound::Near => format!("{:.6e} ≈ {} ± {:.1e}", m.value, m.limit, m.tol),
            };
            s.push_str(&format!("; {} {}{}", m.name, rel, if m.pass { "" } else { " ✗" }));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!("; error: {e}"));
        }
        s
    }
}

#[derive(Default)]
struct Metrics(Vec<Metric>);

impl Metrics {
    fn below(&mut self, name: &str, value: f64, limit: f64) {
        let pass = value < limit;
        self.0.push(Metric { name: name.into(), value, limit, bound: Bound::Below, tol: 0.0, pass });
    }
    fn at_least(&mut self, name: &str, value: f64, limit: f64) {
        let pass = value >= limit;
        self.0.push(Metric { name: name.into(), value, limit, bound: Bound::AtLeast, tol: 0.0, pass });
    }
    fn near(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        let pass = (value - target).abs() < tol;
        self.0.push(Metric { name: name.into(), value, limit: target, bound: Bound::Near, tol, pass });
    }
    fn flag(&mut self, name: &str, ok: bool) {
        self.at_least(name, if ok { 1.0 } else { 0.0 }, 1.0);
    }
}

fn title(id: &str) -> &'static str {
    match id {
        "A1" => "layer oracle",
        "A2" => "correction identities",
        "A3" => "kernel suite",
        "A4" => "ansatz error bound",
        "A5" => "interface tracking, n = 2",
        "A6" => "ancient window, n = 4",
        "A7" => "stationary dimension n = 3",
        "A8" => "spectral gap",
        "A9" => "reduced ODE",
        "A10" => "leading projection identity",
        "A11" => "operator cross-checks",
        _ => "unknown",
    }
}

fn runtime_limit(id: &str) -> Option<f64> {
    match id {
        "A1" => Some(5.0),
        "A2" => Some(10.0),
        "A3" => Some(60.0),
        "A4" => Some(30.0),
        "A5" | "A6" => Some(600.0),
        "A9" => Some(300.0),
        _ => None,
    }
}

/// Runs one criterion. Unknown ids are an argument error; numerical failures inside a check
/// are reported as a failed outcome rather than an error.
pub fn run(id: &str) -> Result<CheckOutcome> {
    let check: fn(&mut Metrics) -> Result<()> = match id {
        "A1" => a1,
        "A2" => a2,
        "A3" => a3,
        "A4" => a4,
        "A5" => a5,
        "A6" => a6,
        "A7" => a7,
        "A8" => a8,
        "A9" => a9,
        "A10" => a10,
        "A11" => a11,
        _ => return Err(Error::Argument(format!("unknown criterion {id:?}"))),
    };
    let start = Instant::now();
    let mut m = Metrics::default();
    let result = check(&mut m);
    let seconds = start.elapsed().as_secs_f64();
    if let Some(limit) = runtime_limit(id) {
        m.below("runtime_s", seconds, limit);
    }
    let error = result.err().map(|e| e.to_string());
    let passed = error.is_none() && m.0.iter().all(|x| x.pass);
    Ok(CheckOutcome { id: id.into(), title: title(id).into(), passed, metrics: m.0, seconds, error })
}

pub fn run_all() -> Vec<CheckOutcome> {
    ALL.iter().map(|id| run(id).expect("known id")).collect()
}

struct Fixture {
    pot: Potential,
    layer: LayerTable,
    corr: CorrectionTable,
    cut: CutOff,
}

impl Fixture {
    fn quartic() -> Result<Self> {
        let pot = Potential::Quartic;
        let layer = build_layer(&pot, 25.0, 1e-2)?;
        let corr = build_correction(&layer)?;
        Ok(Self { pot, layer, corr, cut: CutOff::default() })
    }

    fn ansatz(&self, n: usize) -> Ansatz<'_> {
        Ansatz::new(&self.pot, &self.layer, &self.corr, &self.cut, n)
    }
}

fn a1(m: &mut Metrics) -> Result<()> {
    let pot = Potential::Quartic;
    let layer = build_layer(&pot, 25.0, 1e-2)?;
    let mut sup = 0.0f64;
    for k in -10_000..=10_000 {
        let y = k as f64 * 1e-3;
        sup = sup.max((layer.eval(y)[0] - (y / SQRT_2).tanh()).abs());
    }
    m.below("sup|omega-tanh|", sup, 1e-8);
    m.near("beta", beta(&pot)?, 2.0, 1e-6);
    m.flag("alpha_exact", pot.alpha()? == SQRT_2);
    Ok(())
}

fn a2(m: &mut Metrics) -> Result<()> {
    let layer = build_layer(&Potential::Quartic, 25.0, 1e-2)?;
    let corr = build_correction(&layer)?;
    let rep = corr.check_identities(&layer, 20.0);
    m.below("first_identity", rep.analytic_first.max(rep.fd_first), 1e-6);
    m.below("second_identity", rep.analytic_second.max(rep.fd_second), 1e-5);
    m.below("orthogonality", rep.orthogonality, 1e-8);
    Ok(())
}

fn a3(m: &mut Metrics) -> Result<()> {
    let mut mass = 0.0f64;
    let mut rec = 0.0f64;
    let mut f1 = None;
    for n in 1..=4 {
        // the n ≥ 2 profiles still carry ~1e−5 of mass beyond s = 20
        let t = KernelTable::build(n, 30.0, 0.02)?;
        mass = mass.max((t.mass - 1.0).abs());
        rec = rec.max(t.recurrence_residual(&[0.5, 2.0, 5.0])?);
        if n == 1 {
            f1 = Some(t);
        }
    }
    let f1 = f1.expect("n = 1 built");
    m.below("mass_defect", mass, 1e-6);
    m.below("recurrence", rec, 1e-5);
    let inner: Vec<f64> = f1.f.iter().cloned().take((20.0 / f1.step) as usize).collect();
    let changes = inner.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    m.at_least("f1_sign_changes_on_(0,20)", changes as f64, 1.0);

    // Γ₁Γ₁u₀ against Γ₂u₀ for a Gaussian, compared away from the window edges
    let dx = 0.05;
    let half = 800i64;
    let u0: Vec<f64> = (-half..=half).map(|k| (-(k as f64 * dx).powi(2)).exp()).collect();
    let twice = heat_convolve(&f1, &heat_convolve(&f1, &u0, dx, 1.0)?, dx, 1.0)?;
    let once = heat_convolve(&f1, &u0, dx, 2.0)?;
    let centre = half as usize;
    let reach = (15.0 / dx) as usize;
    let defect = (centre - reach..=centre + reach).map(|i| (twice[i] - once[i]).abs()).fold(0.0, f64::max);
    m.below("semigroup_defect", defect, 1e-6);

    // |Q(ν, y)| ν^{1/4} e^{|y|/ν^{1/4}} over the lattice
    let mut env = 0.0f64;
    for nu in [0.1, 1.0, 10.0] {
        let q = f64::powf(nu, 0.25);
        for k in 0..=200 {
            let y = k as f64 * 0.1;
            env = env.max(q_kernel(SQRT_2, nu, y)?.abs() * q * (y / q).exp());
        }
    }
    m.flag("q_envelope_finite", env.is_finite());
    m.below("q_envelope_constant", env, 1e3);
    Ok(())
}

/// sup_r |E(t, r)| log|t| / Φ(t, r) for n = 4, h ≡ 0, p = 5.
pub fn error_ratio(ansatz: &Ansatz, t: f64, dx: f64) -> Result<f64> {
    let modulation = ModulationState::willmore(ansatz.n);
    let (rho, _) = modulation.rho(t)?;
    let nodes = ((rho + crate::ansatz::COVERAGE_MARGIN + 10.0) / dx).ceil() as usize;
    let ef = ansatz.error_field(&modulation, t, dx, nodes)?;
    let alpha = ansatz.layer.alpha;
    let w = Weight::new(ansatz.n, ansatz.n as f64 + 1.0, alpha, ansatz.cutoff.delta0)?;
    Ok(w.weighted_norm(&ef.e, t)? * t.abs().ln())
}

fn a4(m: &mut Metrics) -> Result<()> {
    let fx = Fixture::quartic()?;
    let a = fx.ansatz(4);
    let ratios: Vec<f64> = [-1e3, -1e4, -1e5].iter().map(|&t| error_ratio(&a, t, 0.01)).collect::<Result<_>>()?;
    for (t, r) in ["C(-1e3)", "C(-1e4)", "C(-1e5)"].iter().zip(&ratios) {
        m.flag(&format!("{t}_finite"), r.is_finite());
        m.at_least(t, *r, 0.0);
    }
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    m.below("max/min", hi / lo, 1.5);
    Ok(())
}

/// Evolves the ansatz over [t0, t1] with ten equally spaced checkpoints and compares the
/// tracked interface with γₙ. Returns the tracked radii.
fn tracking(m: &mut Metrics, n: usize, t0: f64, t1: f64) -> Result<Vec<f64>> {
    let fx = Fixture::quartic()?;
    let a = fx.ansatz(n);
    let dx = 0.02;
    let dt = pde::auto_dt(dx, t1 - t0);
    let steps = ((t1 - t0) / dt).round() as usize;
    let opts = EvolveOptions { dt, track_every: steps / 10, ..Default::default() };
    let u0 = pde::initial_from_ansatz(&a, &ModulationState::willmore(n), t0, t1, dx)?;
    let run = pde::evolve(&fx.pot, &u0, n, t0, t1, &opts)?;
    let mut worst = f64::MIN;
    let mut rhos = vec![];
    for k in 1..=10 {
        let t = t0 + (t1 - t0) * k as f64 / 10.0;
        let rho = run.rho_at(t)?;
        let tol = 3.0 / t.abs().ln();
        worst = worst.max((rho - geometry::gamma_n(n, t)?).abs() / tol);
        rhos.push(rho);
    }
    m.below("max|rho-gamma|/(3/log|t|)", worst, 1.0);
    m.below("max_energy_increase", run.max_energy_increase, 1e-8);
    m.below("sup|u|", run.max_abs, pde::RANGE_LIMIT);
    Ok(rhos)
}

fn a5(m: &mut Metrics) -> Result<()> {
    tracking(m, 2, 1e3, 2e3).map(|_| ())
}

fn a6(m: &mut Metrics) -> Result<()> {
    let rhos = tracking(m, 4, -2e3, -1e3)?;
    m.flag("moves_inward", rhos.windows(2).all(|w| w[1] < w[0]));
    Ok(())
}

fn a7(m: &mut Metrics) -> Result<()> {
    let pot = Potential::Quartic;
    let layer = build_layer(&pot, 25.0, 1e-2)?;
    let dx = 0.02;
    let u = RadialField::from_fn(dx, 3000, |r| layer.eval(r - 20.0)[0]);
    let opts = EvolveOptions { dt: pde::auto_dt(dx, 1.0), ..Default::default() };
    let run = pde::evolve(&pot, &u, 3, 0.0, 1.0, &opts)?;
    let drift = run.final_state().iter().zip(&u.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    m.below("drift", drift, 1e-3);
    m.below("max_energy_increase", run.max_energy_increase, 1e-8);
    let rhs = [0.1, 1.0, 7.3, 20.0, 1e3]
        .iter()
        .map(|&g| geometry::willmore_rhs(3, g).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    m.below("willmore_rhs_n3", rhs, 1e-14);
    Ok(())
}

fn a8(m: &mut Metrics) -> Result<()> {
    let layer = build_layer(&Potential::Quartic, 25.0, 1e-2)?;
    for step in [0.1, 0.05] {
        let g = reduction::spectral_gap(&layer, 20.0, step)?;
        let dense = reduction::dense_projected_minimum(&layer, 20.0, step)?;
        m.near(&format!("gap(h={step})"), g.eigenvalue, 2.25, 0.05 * 2.25);
        m.below(&format!("vs_dense(h={step})"), (g.eigenvalue - dense).abs() / dense, 1e-8);
        if step == 0.1 {
            m.below("translation_residual", g.translation_residual, 1e-8);
        }
    }
    Ok(())
}

fn a9(m: &mut Metrics) -> Result<()> {
    let fx = Fixture::quartic()?;
    let a = fx.ansatz(4);
    let mut norms = vec![];
    for (k, t_hat0) in [1e3, 1e4, 1e5].into_iter().enumerate() {
        let opts = ReducedOptions { t_hat0, ..Default::default() };
        let sol = reduction::solve_reduced_ode(&a, &opts)?;
        norms.push(sol.first_iterate_norm);
        if k == 0 {
            m.below("iterations", sol.iterations as f64, 31.0);
            m.flag("decay_constant_finite", sol.decay_constant.is_finite());
            m.at_least("sup|h|log|t|", sol.decay_constant, 0.0);
            let res = reduction::ode_residual(&a, &sol, 20, 2024)?;
            m.below("ode_residual", res.iter().fold(0.0f64, |w, (_, r)| w.max(r.abs())), 1e-6);
        }
    }
    for (i, w) in norms.windows(2).enumerate() {
        m.below(&format!("|P(0)| step {}", i + 1), w[1], w[0]);
    }
    Ok(())
}

fn a10(m: &mut Metrics) -> Result<()> {
    let fx = Fixture::quartic()?;
    let a = fx.ansatz(4);
    let modulation = ModulationState::willmore(4);
    let mut lead = 0.0f64;
    let mut outer = 0.0f64;
    for t in [-1e3, -1e4, -1e5] {
        let rep = reduction::projected_error_split(&a, &modulation, t)?;
        lead = lead.max((rep.leading_residual / rep.leading_scale).abs());
        outer = outer.max(rep.e_tilde[1].abs()).max(rep.e_tilde[2].abs());
    }
    m.below("leading_ratio", lead, 1.0);
    m.below("E2_E3_projection", outer, 1e-10);
    Ok(())
}

fn a11(m: &mut Metrics) -> Result<()> {
    let fx = Fixture::quartic()?;
    let n = 4;
    let a = fx.ansatz(n);
    let t = -1e4;
    let modulation = ModulationState::willmore(n);
    let (rho, _) = modulation.rho(t)?;
    let dx = 0.02;
    let nodes = ((rho + crate::ansatz::COVERAGE_MARGIN) / dx).ceil() as usize;
    let z = a.build_z(&modulation, t, dx, nodes)?.z;
    let phi = RadialField::from_fn(dx, nodes, |r| (-(r - rho).powi(2)).exp());
    let fz = apply_f(&fx.pot, &z, n)?;
    let lin = apply_fprime(&fx.pot, &z, &phi, n)?;
    let quad = apply_fsecond(&fx.pot, &z, &phi, &phi, n)?;

    let mut gateaux = vec![];
    let mut taylor = vec![];
    let increment = |eps: f64| -> Result<Vec<f64>> {
        let f = apply_f(&fx.pot, &z.axpy(eps, &phi), n)?;
        Ok(f.values.iter().zip(&fz.values).map(|(a, b)| a - b).collect())
    };
    for eps in [1e-3, 5e-4, 2.5e-4] {
        let d = increment(eps)?;
        gateaux.push(d.iter().zip(&lin.values).fold(0.0f64, |w, (d, l)| w.max((d / eps - l).abs())));
    }
    // the cubic remainder needs larger steps to rise above rounding in the stencils
    for eps in [0.1, 0.05] {
        let d = increment(eps)?;
        let res = (0..d.len()).map(|i| (d[i] - eps * lin.values[i] - 0.5 * eps * eps * quad.values[i]).abs());
        taylor.push(res.fold(0.0f64, f64::max));
    }
    let gr = gateaux[0] / gateaux[1];
    let gr2 = gateaux[1] / gateaux[2];
    m.near("gateaux_halving_ratio", gr.min(gr2), 2.0, 0.2);
    m.near("gateaux_halving_ratio_2", gr.max(gr2), 2.0, 0.2);
    m.near("taylor_ratio", taylor[0] / taylor[1], 8.0, 0.8);

    let psi = RadialField::from_fn(dx, nodes, |r| (0.3 * r).sin() * (-(r - rho - 1.0).powi(2) / 4.0).exp());
    let ab = apply_fsecond(&fx.pot, &z, &phi, &psi, n)?;
    let ba = apply_fsecond(&fx.pot, &z, &psi, &phi, n)?;
    let asym = ab.values.iter().zip(&ba.values).fold(0.0f64, |w, (x, y)| w.max((x - y).abs()));
    m.below("fsecond_asymmetry", asym, 1e-12);
    Ok(())
}
