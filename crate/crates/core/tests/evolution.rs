use wch::ansatz::{Ansatz, CutOff, ModulationState};
use wch::correction::build_correction;
use wch::layer::build_layer;
use wch::pde::{self, EvolveOptions};
use wch::potential::Potential;
use wch::Error;

fn final_radius(dx: f64, dt: f64) -> (f64, f64) {
    let pot = Potential::Quartic;
    let layer = build_layer(&pot, 25.0, 1e-2).unwrap();
    let corr = build_correction(&layer).unwrap();
    let cut = CutOff::default();
    let a = Ansatz::new(&pot, &layer, &corr, &cut, 2);
    let (t0, t1) = (1e3, 1.02e3);
    let u0 = pde::initial_from_ansatz(&a, &ModulationState::willmore(2), t0, t1, dx).unwrap();
    let opts = EvolveOptions { dt, track_every: 1000, snap_every: Some(usize::MAX), ..Default::default() };
    let run = pde::evolve(&pot, &u0, 2, t0, t1, &opts).unwrap();
    assert!(run.energy_monotone);
    (run.track_interface(t0).unwrap(), run.rho_at(t1).unwrap())
}

#[test]
fn initial_interface_and_grid_convergence() {
    let dt = 0.005;
    let (start, coarse) = final_radius(0.04, dt);
    let gamma0 = wch::geometry::gamma_n(2, 1e3).unwrap();
    assert!((start - gamma0).abs() < 0.04, "{start} vs {gamma0}");
    let (_, fine) = final_radius(0.02, dt);
    let (_, finer) = final_radius(0.01, dt);
    let d1 = (coarse - fine).abs();
    let d2 = (fine - finer).abs();
    assert!(d1 < 4.0 * 0.04 * 0.04, "{coarse} {fine} {d1}");
    assert!(d2 < 4.0 * 0.02 * 0.02, "{fine} {finer} {d2}");
    eprintln!("{coarse} {fine} {finer} {d1:e} {d2:e}");
}

#[test]
fn degenerate_dimension_has_no_willmore_window() {
    assert!(matches!(pde::nodes_for_window(3, -10.0, -5.0, 0.02), Err(Error::DegenerateDimension(3))));
    assert!(pde::nodes_for_window(4, 10.0, 20.0, 0.02).is_err());
    assert_eq!(pde::auto_dt(0.02, 1.0), 0.1 * 0.02 * 0.02);
    assert_eq!(pde::auto_dt(0.02, 1e3), 0.02);
    assert!(pde::auto_dt(0.01, 1e3) <= 0.005 + 1e-15);
}
