use couette_core::eigen::{resolved_spectrum, GridPair};
use couette_core::evolve::*;
use couette_core::operators::{assemble_k0, assemble_os};
use couette_core::*;
use num_complex::Complex64;
use std::f64::consts::PI;

fn real(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
    move |y| Complex64::new(f(y), 0.0)
}

#[test]
fn k0_single_mode_closed_form() {
    let grid = make_grid(48).unwrap();
    let cfg = FlowConfig::case_i(1.0, 0.0, 0.0, 0.0);
    let op = assemble_k0(&cfg, &grid).unwrap();
    let phi0 = grid.nodes().mapv(real(|y| (PI * y / 2.0).cos()));
    let h = evolve_mode(&op, &grid, phi0.view(), 0.005, 2.0).unwrap();
    // squared norm decays at twice the eigenvalue
    let want = (-PI * PI / 2.0 * 2.0).exp() * h.energy[0];
    let got = *h.energy.last().unwrap();
    assert!((got / want - 1.0).abs() < 0.01, "{got} vs {want}");
    let fit = fit_decay(&h).unwrap();
    assert!((fit.rate / (PI * PI / 2.0) - 1.0).abs() < 0.02);
}

#[test]
fn zero_initial_state_stays_zero() {
    let grid = make_grid(24).unwrap();
    let cfg = FlowConfig::case_i(1.0, -0.1, 1.0, 0.0);
    let op = assemble_os(&cfg, 1, &grid).unwrap();
    let h = evolve_mode(&op, &grid, linalg::CVector::zeros(24).view(), 0.01, 1.0).unwrap();
    assert!(h.energy.iter().all(|&e| e == 0.0));
    assert!(matches!(fit_decay(&h), Err(Error::NonPositiveEnergy(_))));
}

#[test]
fn rejects_short_horizon() {
    let grid = make_grid(24).unwrap();
    let op = assemble_k0(&FlowConfig::case_i(1.0, 0.0, 0.0, 0.0), &grid).unwrap();
    let phi0 = grid.nodes().mapv(real(|y| 1.0 - y));
    assert!(evolve_mode(&op, &grid, phi0.view(), 0.1, 5.0).is_err());
    assert!(evolve_mode(&op, &grid, phi0.view(), 0.0, 5.0).is_err());
}

fn os_rate(cfg: &FlowConfig, k: i64, dt: f64, t_end: f64) -> (f64, f64) {
    let grids = GridPair::new(64).unwrap();
    let spec = resolved_spectrum(cfg, k, &grids, &SolverSettings::default(), false).unwrap();
    let m = spec.max_real().unwrap();
    let op = assemble_os(cfg, k, &grids.coarse).unwrap();
    let phi0 = grids.coarse.nodes().mapv(real(|y| (y * (1.0 - y)).powi(2) * (1.0 + y)));
    let h = evolve_mode(&op, &grids.coarse, phi0.view(), dt, t_end).unwrap();
    (fit_decay(&h).unwrap().rate, m)
}

#[test]
fn os_decay_matches_abscissa() {
    let cfg = FlowConfig::case_i(1.0, -0.1, 1.0, 0.0);
    let (rate, m) = os_rate(&cfg, 1, 0.01, 8.0);
    assert!(m < 0.0);
    assert!((rate / (2.0 * m.abs()) - 1.0).abs() < 0.02, "rate {rate}, m {m}");
}

#[test]
fn step_refinement_is_stable() {
    let cfg = FlowConfig::case_ii(1.0, 0.2, 0.5, 2.0, 0.0);
    let (coarse, _) = os_rate(&cfg, 1, 0.02, 8.0);
    let (fine, _) = os_rate(&cfg, 1, 0.01, 8.0);
    assert!((coarse / fine - 1.0).abs() < 0.005);
}
