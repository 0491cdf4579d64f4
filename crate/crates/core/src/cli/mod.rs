//! Command-line front end: `wch <subcommand>`, optional `--config key=value` file, CSV outputs
//! and a JSON manifest per run.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::ansatz::{Ansatz, CutOff, ModulationState, RadialField, Weight, COVERAGE_MARGIN};
use crate::correction::build_correction;
use crate::error::Error;
use crate::geometry;
use crate::kernels::KernelTable;
use crate::layer::build_layer;
use crate::pde::{self, EvolveOptions};
use crate::potential::Potential;
use crate::reduction::{self, ReducedOptions};
use crate::verify;

use config::{read_config, Resolver};
use output::{manifest_path_for, write_csv, Manifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Compute(_) => 1,
        }
    }
}

/// Radial interface solutions of the Willmore-type Cahn–Hilliard flow.
///
/// Every option can also be given in a `key = value` file passed with --config (keys are the
/// long option names without dashes); options on the command line take precedence. Relative
/// output paths are placed under $WCH_OUT when it is set.
#[derive(Debug, Parser)]
#[command(name = "wch", version, about, long_about = None)]
pub struct Cli {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (or directory for evolve/verify).
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Space dimension n of the radial problem.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Double-well potential W: quartic, cosine, or a CSV file of (s, W(s)) samples.
    #[arg(long, global = true)]
    pub potential: Option<String>,
    /// Seed for randomized sampling (residual sample times).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Layer profile ω solving ω″ = W′(ω), ω(±∞) = ±1, ω(0) = 0.
    Profile(ProfileArgs),
    /// Correction layer ω̃ with L*ω̃ = ½yω′ and the residuals of its identities.
    Correction(ProfileArgs),
    /// Radius γₙ(t) of a sphere moving by Willmore flow.
    Willmore(WillmoreArgs),
    /// Biharmonic heat-kernel profile fₙ(s).
    Kernel(KernelArgs),
    /// Ansatz z and its error E = F(z) − ∂ₜz against the weight Φ.
    Error(ErrorArgs),
    /// Reduced interface ODE for the radius correction h(t), or the spectral gap.
    Reduce(ReduceArgs),
    /// Direct evolution of the radial PDE from the ansatz and interface tracking.
    Evolve(EvolveArgs),
    /// Acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Half-width Y of the layer table [−Y, Y].
    #[arg(long = "Y")]
    pub y: Option<f64>,
    /// Grid spacing of the layer table.
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WillmoreArgs {
    /// Initial time.
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// Final time.
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// RK4 step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Initial radius γ(t0); defaults to the closed form γₙ(t0).
    #[arg(long)]
    pub gamma0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Table extent S: fₙ is sampled on [0, S].
    #[arg(long = "S")]
    pub s: Option<f64>,
    /// Sample spacing.
    #[arg(long)]
    pub step: Option<f64>,
    /// Check f′ₙ(s) + s fₙ₊₂(s) = 0 at s ∈ {0.5, 2, 5}.
    #[arg(long)]
    pub check_recurrence: bool,
    /// Check ᾱₙ∫pₙ(1, x)dx = 1.
    #[arg(long)]
    pub check_mass: bool,
}

#[derive(Debug, Args)]
pub struct ErrorArgs {
    /// Time t at which the ansatz is evaluated.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Outer radius of the grid, or `auto` (ρ(t) + 40).
    #[arg(long = "R")]
    pub r: Option<String>,
    /// Radial grid spacing.
    #[arg(long)]
    pub dx: Option<f64>,
    /// Decay exponent p ∈ (n, n+1] of the weight Φ (default n + 1).
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Decay exponent p ∈ (n, n+1] of the weight.
    #[arg(long)]
    pub p: Option<f64>,
    /// Starting time scale T̂₀: the ODE is posed for |t| ≥ T̂₀.
    #[arg(long = "That0")]
    pub that0: Option<f64>,
    /// Stopping tolerance of the fixed-point iteration in the Λ-norm.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Resolution of the logarithmic time grid.
    #[arg(long)]
    pub points_per_decade: Option<usize>,
    /// The time grid covers T̂₀ ≤ |t| ≤ span·T̂₀.
    #[arg(long)]
    pub span: Option<f64>,
    /// Number of random times at which the ODE residual is checked.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Compute the spectral gap of (−∂yy + W″(ω))² on the complement of ω′ instead.
    #[arg(long)]
    pub spectral_gap: bool,
    /// Truncation Y of the spectral-gap interval [−Y, Y].
    #[arg(long = "gap-Y")]
    pub gap_y: Option<f64>,
    /// Coarse grid spacing for the spectral gap (also run at half of it).
    #[arg(long)]
    pub gap_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Initial time.
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// Final time.
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Radial grid spacing.
    #[arg(long)]
    pub dx: Option<f64>,
    /// Time step, or `auto`.
    #[arg(long)]
    pub dt: Option<String>,
    /// Time between full-profile snapshots.
    #[arg(long)]
    pub snap: Option<f64>,
    /// Time between interface/energy samples (default: 200 samples per run).
    #[arg(long)]
    pub track: Option<f64>,
    /// Start from the stationary profile ω(r − r0) (required for n = 3).
    #[arg(long)]
    pub stationary: bool,
    /// Radius of the stationary profile.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Interfaces are sought in (δ₀, R − 5).
    #[arg(long)]
    pub delta0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `all` or a comma-separated list of criteria (e.g. A1,A5).
    #[arg(long)]
    pub suite: Option<String>,
}

/// Parses `args` (including the program name), runs the command and returns the exit code:
/// 0 success, 1 failed run or invariant, 2 usage error, 3 I/O error.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut ctx = Context::default();
    let result = run(&cli, &mut ctx);
    match (result, ctx.manifest.take()) {
        (Ok(()), Some((mut m, path))) => finish(&mut m, &path, ctx.start),
        (Err(CliError::Compute(e)), Some((mut m, path))) => {
            eprintln!("error: {e}");
            m.fail(e.to_string());
            finish(&mut m, &path, ctx.start)
        }
        (Ok(()), None) => 0,
        (Err(e), _) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn finish(m: &mut Manifest, path: &Path, start: Option<Instant>) -> i32 {
    m.settle();
    m.wall_time_s = start.map(|s| s.elapsed().as_secs_f64()).unwrap_or(0.0);
    if let Err(e) = m.write(path) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    for o in &m.outputs {
        println!("wrote {} ({} bytes, sha256 {})", o.path, o.bytes, &o.sha256[..16]);
    }
    for i in m.invariants.iter().filter(|i| !i.pass) {
        eprintln!("invariant failed: {}{}", i.name, i.value.map(|v| format!(" (value {v:e})")).unwrap_or_default());
    }
    println!("manifest {} status {}", path.display(), m.status);
    if m.ok() {
        0
    } else {
        1
    }
}

#[derive(Default)]
struct Context {
    manifest: Option<(Manifest, PathBuf)>,
    start: Option<Instant>,
}

/// Effective global settings.
struct Globals {
    potential: Potential,
    seed: u64,
}

fn resolve_out(root: &Path, out: &str) -> PathBuf {
    let p = PathBuf::from(out);
    if p.is_absolute() {
        p
    } else {
        root.join(p)
    }
}

fn load_potential(spec: &str) -> Result<Potential, CliError> {
    match spec {
        "quartic" => Ok(Potential::Quartic),
        "cosine" => Ok(Potential::cosine()),
        path => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(false)
                .trim(csv::Trim::All)
                .comment(Some(b'#'))
                .from_path(path)
                .map_err(|e| CliError::Usage(format!("potential {path:?} is neither quartic, cosine nor a readable file: {e}")))?;
            let (mut s, mut w) = (vec![], vec![]);
            for (i, rec) in rdr.records().enumerate() {
                let rec = rec.map_err(|e| CliError::Io(format!("{path}: {e}")))?;
                let parsed: Option<(f64, f64)> = match (rec.get(0), rec.get(1)) {
                    (Some(a), Some(b)) => a.parse().ok().zip(b.parse().ok()),
                    _ => None,
                };
                match parsed {
                    Some((a, b)) => {
                        s.push(a);
                        w.push(b);
                    }
                    None if i == 0 => continue, // header row
                    None => return Err(CliError::Usage(format!("{path}: row {} is not two numbers", i + 1))),
                }
            }
            let pot = Potential::tabulated(s, w)?;
            pot.check_invariants()?;
            Ok(pot)
        }
    }
}

fn run(cli: &Cli, ctx: &mut Context) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => read_config(p)?,
        None => Default::default(),
    };
    let mut r = Resolver::new(file);
    let potential_name = r.get("potential", cli.potential.clone(), "quartic".to_string())?;
    let potential = load_potential(&potential_name)?;
    let seed = r.get("seed", cli.seed, 20240u64)?;
    let g = Globals { potential, seed };
    match &cli.command {
        Command::Profile(a) => profile(cli, a, &g, r, ctx),
        Command::Correction(a) => correction(cli, a, &g, r, ctx),
        Command::Willmore(a) => willmore(cli, a, r, ctx),
        Command::Kernel(a) => kernel(cli, a, r, ctx),
        Command::Error(a) => error_cmd(cli, a, &g, r, ctx),
        Command::Reduce(a) => reduce(cli, a, &g, r, ctx),
        Command::Evolve(a) => evolve(cli, a, &g, r, ctx),
        Command::Verify(a) => verify_cmd(cli, a, r, ctx),
    }
}

impl Context {
    /// Closes parameter resolution and opens the manifest.
    fn begin(&mut self, command: &str, r: Resolver, manifest_path: PathBuf) -> Result<&mut Manifest, CliError> {
        r.finish()?;
        self.start = Some(Instant::now());
        self.manifest = Some((Manifest::new(command, r.effective), manifest_path));
        Ok(&mut self.manifest.as_mut().expect("just set").0)
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{key} must be positive (got {v})")))
    }
}

fn check_p(n: usize, p: f64) -> Result<(), CliError> {
    let nf = n as f64;
    if p > nf && p <= nf + 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("p = {p} must lie in (n, n+1] = ({n}, {}]", n + 1)))
    }
}

fn profile(cli: &Cli, a: &ProfileArgs, g: &Globals, mut r: Resolver, ctx: &mut Context) -> Result<(), CliError> {
    let y_max = positive("Y", r.get("Y", a.y, 25.0)?)?;
    let step = positive("step", r.get("step", a.step, 1e-3)?)?;
    let out = resolve_out(&root_of(), &r.get("out", cli.out.clone(), "profile.csv".into())?);
    let m = ctx.begin("profile", r, manifest_path_for(&out))?;
    let layer = build_layer(&g.potential, y_max, step)?;
    let rows = (0..layer.len()).map(|j| vec![layer.y(j), layer.omega[j], layer.d1[j], layer.d2[j], layer.d3[j], layer.d4[j]]);
    write_csv(&out, &["y", "omega", "omega1", "omega2", "omega3", "omega4"], rows)?;
    m.record_output(&out)?;
    let rep = layer.check_invariants();
    m.check("monotone", rep.min_slope > 0.0, Some(rep.min_slope));
    m.check("range", rep.in_range, None);
    m.check("odd", rep.max_oddness < 1e-12, Some(rep.max_oddness));
    m.check("ode_residual", rep.max_ode_residual < 1e-6, Some(rep.max_ode_residual));
    m.check("first_integral", rep.max_energy_residual < 1e-8, Some(rep.max_energy_residual));
    m.result("alpha", layer.alpha);
    m.result("beta", layer.beta);
    m.result("slope_mass", layer.slope_mass());
    Ok(())
}

fn correction(cli: &Cli, a: &ProfileArgs, g: &Globals, mut r: Resolver, ctx: &mut Context) -> Result<(), CliError> {
    let y_max = positive("Y", r.get("Y", a.y, 25.0)?)?;
    let step = positive("step", r.get("step", a.step, 1e-2)?)?;
    let out = resolve_out(&root_of(), &r.get("out", cli.out.clone(), "correction.csv".into())?);
    let m = ctx.begin("correction", r, manifest_path_for(&out))?;
    let pot = &g.potential;
    let layer = build_layer(pot, y_max, step)?;
    let corr = build_correction(&layer)?;
    let mut rows = Vec::with_capacity(corr.len());
    for j in 0..corr.len() {
        let y = layer.y(j);
        let w = layer.omega[j];
        let (a2, a3, a4) = (pot.eval(w, 2)?, pot.eval(w, 3)?, pot.eval(w, 4)?);
        let (d1, d2) = (layer.d1[j], layer.d2[j]);
        let (c0, c1, c2, c3, c4) = (corr.wt[j], corr.wt1[j], corr.wt2[j], corr.wt3[j], corr.wt4[j]);
        let l = -c2 + a2 * c0;
        let l2 = -(-c4 + a4 * d1 * d1 * c0 + a3 * d2 * c0 + 2.0 * a3 * d1 * c1 + a2 * c2) + a2 * l;
        rows.push(vec![y, c0, c1, c2, c3, l - 0.5 * y * d1, l2 + d2]);
    }
    write_csv(&out, &["y", "wt", "wt1", "wt2", "wt3", "resid_L", "resid_L2"], rows)?;
    m.record_output(&out)?;
    let rep = corr.check_identities(&layer, 20.0f64.min(y_max));
    m.check("first_identity", rep.analytic_first < 1e-6, Some(rep.analytic_first));
    m.check("second_identity", rep.analytic_second < 1e-5, Some(rep.analytic_second));
    m.check("orthogonality", rep.orthogonality < 1e-8, Some(rep.orthogonality));
    m.result("identities", &rep);
    Ok(())
}

fn willmore(cli: &Cli, a: &WillmoreArgs, mut r: Resolver, ctx: &mut Context) -> Result<(), CliError> {
    let n = r.get("n", cli.n, 4)?;
    let t0 = r.get("t0", a.t0, -100.0)?;
    let t1 = r.get("t1", a.t1, -10.0)?;
    let dt = positive("dt", r.get("dt", a.dt, 1e-3)?)?;
    let gamma0 = r.optional("gamma0", a.gamma0)?;
    let out = resolve_out(&root_of(), &r.get("out", cli.out.clone(), "gamma.csv".into())?);
    if !(t1 > t0) {
        return Err(CliError::Usage(format!("t1 = {t1} must exceed t0 = {t0}")));
    }
    let gamma0 = match gamma0 {
        Some(v) => positive("gamma0", v)?,
        None => geometry::gamma_n(n, t0).map_err(|e| CliError::Usage(format!("{e}; pass --gamma0")))?,
    };
    let m = ctx.begin("willmore", r, manifest_path_for(&out))?;
    let curve = geometry::integrate_willmore(n, gamma0, t0, t1, dt)?;
    let exact = |t: f64| geometry::gamma_n(n, t).ok().filter(|e| (geometry::gamma_n(n, t0).unwrap_or(f64::NAN) - gamma0).abs() < 1e-12 * e.max(1.0));
    let mut worst = 0.0f64;
    let mut has_exact = false;
    let rows: Vec<Vec<f64>> = curve
        .t
        .iter()
        .zip(&curve.gamma)
        .map(|(&t, &gm)| {
            let e = exact(t);
            if let Some(e) = e {
                has_exact = true;
                worst = worst.max((gm - e).abs());
            }
            vec![t, gm, e.unwrap_or(f64::NAN)]
        })
        .collect();
    write_csv(&out, &["t", "gamma", "gamma_exact"], rows)?;
    m.record_output(&out)?;
    if has_exact {
        m.check("closed_form", worst < 1e-8, Some(worst));
    }
    m.result("gamma_final", curve.gamma.last().copied());
    Ok(())
}

/// $WCH_OUT or the working directory.
fn root_of() -> PathBuf {
    std::env::var_os("WCH_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn kernel(cli: &Cli, a: &KernelArgs, mut r: Resolver, ctx: &mut Context) -> Result<(), CliError> {
    let n = r.get("n", cli.n, 1)?;
    let s_max = positive("S", r.get("S", a.s, 20.0)?)?;
    let step = positive("step", r.get("step", a.step, 1e-2)?)?;
    let check_recurrence = r.switch("check-recurrence", a.check_recurrence)?;
    let check_mass = r.switch("check-mass", a.check_mass)?;
    let out = resolve_out(&root_of(), &r.get("out", cli.out.clone(), format!("f{n}.csv"))?);
    if n == 0 {
        return Err(CliError::Usage("n must be ≥ 1".into()));
    }
    let m = ctx.begin("kernel", r, manifest_path_for(&out))?;
    let table = KernelTable::build(n, s_max, step)?;
    let rows = table.f.iter().enumerate().map(|(i, &f)| {
        let s = i as f64 * table.step;
        vec![s, f, table.envelope(s)]
    });
    write_csv(&out, &["s", "f", "envelope"], rows)?;
    m.record_output(&out)?;
    let covered = table.f.iter().enumerate().all(|(i, v)| v.abs() <= table.envelope(i as f64 * table.step) * (1.0 + 1e-12));
    m.check("envelope", covered && table.decay_mu > 0.0, Some(table.decay_mu));
    if check_recurrence {
        let res = table.recurrence_residual(&[0.5, 2.0, 5.0])?;
        m.check("recurrence", res < 1e-5, Some(res));
    }
    if check_mass {
        let d = (table.mass - 1.0).abs();
        m.check("mass", d < 1e-6, Some(d));
    }
    m.result("mass", table.mass);
    m.result("abs_mass", table.abs_mass);
    m.result("sign_changes", table.sign_changes());
    m.result("decay_K", table.decay_k);
    m.result("decay_mu", table.decay_mu);
    Ok(())
}

fn error_cmd(cli: &Cli, a: &ErrorArgs, g: &Globals, mut r: Resolver, ctx: &mut Context) -> Result<(), CliError> {
    let n = r.get("n", cli.n, 4)?;
    let t = r.get("t", a.t, -1e4)?;
    let radius = r.get("R", a.r.clone(), "auto".into())?;
    let dx = positive("dx", r.get("dx", a.dx, 0.01)?)?;
    let p = r.get("p", a.p, n as f64 + 1.0)?;
    let out = resolve_out(&root_of(), &r.get("out", cli.out.clone(), "error.csv".into())?);
    check_p(n, p)?;
    let modulation = ModulationState::willmore(n);
    let (rho, _) = modulation.rho(t).map_err(|e| CliError::Usage(e.to_string()))?;
    let radius = match radius.as_str() {
        "auto" => rho + COVERAGE_MARGIN + 10.0,
        s => s.parse::<f64>().map_err(|_| CliError::Usage(format!("R must be a number or `auto`, got {s:?}")))?,
    };
    let nodes = (radius / dx).ceil() as usize;
    let m = ctx.begin("error", r, manifest_path_for(&out))?;
    let layer = build_layer(&g.potential, 25.0, 1e-2)?;
    let corr = build_correction(&layer)?;
    let cut = CutOff::default();
    let ansatz = Ansatz::new(&g.potential, &layer, &corr, &cut, n);
    let ef = ansatz.error_field(&modulation, t, dx, nodes)?;
    let w = Weight::new(n, p, layer.alpha, cut.delta0)?;
    let log = t.abs().ln();
    let mut sup = 0.0f64;
    let mut rows = Vec::with_capacity(nodes + 1);
    for i in 0..=nodes {
        let rr = ef.e.r(i);
        let e = ef.e.values[i];
        let phi = w.phi(t, rr)?;
        let ratio = if e == 0.0 { 0.0 } else { e.abs() * log / phi };
        sup = sup.max(ratio);
        rows.push(vec![rr, ef.z.values[i], e, phi, ratio]);
    }
    write_csv(&out, &["r", "z", "E", "Phi", "ratio"], rows)?;
    m.record_output(&out)?;
    m.check("ratio_finite", sup.is_finite(), Some(sup));
    m.result("sup_ratio", sup);
    m.result("rho", ef.rho);
    Ok(())
}

fn reduce(cli: &Cli, a: &ReduceArgs, g: &Globals, mut r: Resolver, ctx: &mut Context) -> Result<(), CliError> {
    let n = r.get("n", cli.n, 4)?;
    let gap = r.switch("spectral-gap", a.spectral_gap)?;
    let d = ReducedOptions::default();
    let opts = ReducedOptions {
        p: r.get("p", a.p, d.p)?,
        t_hat0: positive("That0", r.get("That0", a.that0, d.t_hat0)?)?,
        tol: positive("tol", r.get("tol", a.tol, d.tol)?)?,
        max_iter: r.get("max-iter", a.max_iter, d.max_iter)?,
        points_per_decade: r.get("points-per-decade", a.points_per_decade, d.points_per_decade)?,
        span: r.get("span", a.span, d.span)?,
    };
    let samples = r.get("samples", a.samples, 20)?;
    let gap_y = r.get("gap-Y", a.gap_y, 20.0)?;
    let gap_step = positive("gap-step", r.get("gap-step", a.gap_step, 0.1)?)?;
    let default_out = if gap { "gap.csv" } else { "h.csv" };
    let out = resolve_out(&root_of(), &r.get("out", cli.out.clone(), default_out.into())?);
    if !gap {
        check_p(n, opts.p)?;
        if n == 1 || n == 3 {
            return Err(CliError::Usage(Error::DegenerateDimension(n).to_string()));
        }
    }
    let seed = g.seed;
    let m = ctx.begin("reduce", r, manifest_path_for(&out))?;
    let layer = build_layer(&g.potential, 25.0, 1e-2)?;
    if gap {
        let mut rows = vec![];
        let mut gaps = vec![];
        for step in [gap_step, gap_step / 2.0] {
            let sg = reduction::spectral_gap(&layer, gap_y, step)?;
            let dense = reduction::dense_projected_minimum(&layer, gap_y, step)?;
            m.check(&format!("positive(h={step})"), sg.positive, Some(sg.eigenvalue));
            m.check(&format!("dense_agreement(h={step})"), (sg.eigenvalue - dense).abs() < 1e-8 * dense, Some(dense));
            rows.push(vec![step, sg.eigenvalue, dense, sg.residual, sg.translation_residual]);
            gaps.push(sg);
        }
        write_csv(&out, &["step", "eigenvalue", "dense", "residual", "translation_residual"], rows)?;
        m.record_output(&out)?;
        m.check("translation_mode", gaps[0].translation_residual < 1e-8, Some(gaps[0].translation_residual));
        m.result("spectral_gap", &gaps);
        return Ok(());
    }
    let corr = build_correction(&layer)?;
    let cut = CutOff::default();
    let ansatz = Ansatz::new(&g.potential, &layer, &corr, &cut, n);
    let sol = reduction::solve_reduced_ode(&ansatz, &opts)?;
    let mut idx: Vec<usize> = (0..sol.t.len()).collect();
    idx.sort_by(|&i, &j| sol.t[i].total_cmp(&sol.t[j]));
    let rows = idx.iter().map(|&i| vec![sol.t[i], sol.h[i], sol.dh[i], sol.p[i], sol.p_tilde[i]]);
    write_csv(&out, &["t", "h", "hprime", "P", "Ptilde"], rows)?;
    m.record_output(&out)?;
    let res = reduction::ode_residual(&ansatz, &sol, samples, seed)?;
    let worst = res.iter().fold(0.0f64, |w, (_, v)| w.max(v.abs()));
    m.check("converged", sol.history.last().is_some_and(|&h| h < opts.tol), sol.history.last().copied());
    m.check("ode_residual", worst < 1e-6, Some(worst));
    m.check("decay_constant_finite", sol.decay_constant.is_finite(), Some(sol.decay_constant));
    m.result("iterations", sol.iterations);
    m.result("first_iterate_norm", sol.first_iterate_norm);
    m.result("history", &sol.history);
    m.result("decay_constant", sol.decay_constant);
    m.result("rhs_constant", sol.rhs_constant);
    Ok(())
}

fn evolve(cli: &Cli, a: &EvolveArgs, g: &Globals, mut r: Resolver, ctx: &mut Context) -> Result<(), CliError> {
    let n = r.get("n", cli.n, 2)?;
    let stationary = r.switch("stationary", a.stationary)?;
    let (dt0, dt1) = if n >= 4 { (-2e3, -1e3) } else if stationary { (0.0, 1.0) } else { (1e3, 2e3) };
    let t0 = r.get("t0", a.t0, dt0)?;
    let t1 = r.get("t1", a.t1, dt1)?;
    let dx = positive("dx", r.get("dx", a.dx, 0.02)?)?;
    let dt_s = r.get("dt", a.dt.clone(), "auto".into())?;
    let snap = r.optional("snap", a.snap)?;
    let track = r.optional("track", a.track)?;
    let r0 = positive("r0", r.get("r0", a.r0, 20.0)?)?;
    let delta0 = positive("delta0", r.get("delta0", a.delta0, 0.5)?)?;
    let out = resolve_out(&root_of(), &r.get("out", cli.out.clone(), "run".into())?);
    if n == 3 && !stationary {
        return Err(CliError::Usage(format!("{}; pass --stationary to evolve ω(r − r0)", Error::DegenerateDimension(3))));
    }
    if !(t1 > t0) {
        return Err(CliError::Usage(format!("t1 = {t1} must exceed t0 = {t0}")));
    }
    let dt = match dt_s.as_str() {
        "auto" => pde::auto_dt(dx, t1 - t0),
        s => positive("dt", s.parse().map_err(|_| CliError::Usage(format!("dt must be a number or `auto`, got {s:?}")))?)?,
    };
    let steps = ((t1 - t0) / dt).round().max(1.0) as usize;
    let every = |span: f64| ((span / dt).round() as usize).clamp(1, steps);
    let track_every = match track {
        Some(s) => every(positive("track", s)?),
        None => (steps / 200).max(1),
    };
    let snap_every = match snap {
        Some(s) => Some(every(positive("snap", s)?)),
        None => None,
    };
    if !stationary {
        // the window must lie on the Willmore branch
        pde::nodes_for_window(n, t0, t1, dx).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let m = ctx.begin("evolve", r, out.join("manifest.json"))?;
    m.result("dt_effective", dt);
    let pot = &g.potential;
    let layer = build_layer(pot, 25.0, 1e-2)?;
    let corr = build_correction(&layer)?;
    let cut = CutOff::new(delta0);
    let ansatz = Ansatz::new(pot, &layer, &corr, &cut, n);
    let initial = if stationary {
        let nodes = ((r0 + pde::OUTER_CLEARANCE) / dx).ceil() as usize;
        RadialField::from_fn(dx, nodes, |x| layer.eval(x - r0)[0])
    } else {
        pde::initial_from_ansatz(&ansatz, &ModulationState::willmore(n), t0, t1, dx)?
    };
    let opts = EvolveOptions { dt, track_every, snap_every, delta0, ..Default::default() };
    let run = pde::evolve(pot, &initial, n, t0, t1, &opts)?;

    // h predicted by the reduced ODE on a grid covering the window
    let prediction = if stationary {
        None
    } else {
        let lo = t0.abs().min(t1.abs());
        let hi = t0.abs().max(t1.abs());
        let opts = ReducedOptions {
            p: n as f64 + 1.0,
            t_hat0: lo,
            span: (1.01 * hi / lo).max(ReducedOptions::default().span),
            ..Default::default()
        };
        match reduction::solve_reduced_ode(&ansatz, &opts).and_then(|s| s.modulation()) {
            Ok(modl) => Some(modl),
            Err(e) => {
                m.result("h_pred_unavailable", e.to_string());
                None
            }
        }
    };
    let mut rows = vec![];
    let mut worst_tracking = 0.0f64;
    for p in &run.track {
        let gamma = if stationary { r0 } else { geometry::gamma_n(n, p.t)? };
        let h_pred = prediction.as_ref().and_then(|md| md.perturbation(p.t).ok()).map(|x| x.0).unwrap_or(f64::NAN);
        if !stationary && p.t.abs() > 1.0 {
            worst_tracking = worst_tracking.max((p.rho - gamma).abs() * p.t.abs().ln() / 3.0);
        }
        rows.push(vec![p.t, p.rho, gamma, h_pred, p.energy]);
    }
    let track_path = out.join("track.csv");
    write_csv(&track_path, &["t", "rho_num", "gamma_n", "h_pred", "energy"], rows)?;
    m.record_output(&track_path)?;
    let mut snaps = vec![];
    for (k, s) in run.snapshots.iter().enumerate() {
        let path = out.join(format!("snap_{k:05}.csv"));
        write_csv(&path, &["r", "u"], s.u.iter().enumerate().map(|(i, &u)| vec![i as f64 * dx, u]))?;
        m.record_output(&path)?;
        snaps.push(s.t);
    }
    m.check("range", run.max_abs <= pde::RANGE_LIMIT, Some(run.max_abs));
    m.check("energy_monotone", run.energy_monotone, Some(run.max_energy_increase));
    m.check("single_interface", run.track.iter().all(|p| p.rho.is_finite()), None);
    m.result("snapshot_times", snaps);
    m.result("steps", run.steps);
    m.result("radius", run.radius);
    if !stationary {
        m.result("max_tracking_error_over_3_div_log_t", worst_tracking);
    }
    Ok(())
}

fn verify_cmd(cli: &Cli, a: &VerifyArgs, mut r: Resolver, ctx: &mut Context) -> Result<(), CliError> {
    let suite = r.get("suite", a.suite.clone(), "all".into())?;
    let out = resolve_out(&root_of(), &r.get("out", cli.out.clone(), "verify".into())?);
    let ids: Vec<String> = if suite == "all" {
        verify::ALL.iter().map(|s| s.to_string()).collect()
    } else {
        suite.split(',').map(|s| s.trim().to_uppercase()).collect()
    };
    if let Some(bad) = ids.iter().find(|id| !verify::ALL.contains(&id.as_str())) {
        return Err(CliError::Usage(format!("unknown criterion {bad:?} in suite (known: {})", verify::ALL.join(", "))));
    }
    let m = ctx.begin("verify", r, out.join("manifest.json"))?;
    let mut outcomes = vec![];
    for id in &ids {
        let o = verify::run(id)?;
        println!("{}", o.line());
        m.check(id, o.passed, None);
        outcomes.push(o);
    }
    m.result("criteria", &outcomes);
    Ok(())
}
