use couette_core::eigen::{resolved_spectrum, GridPair};
use couette_core::energy::*;
use couette_core::params::lambda_from_c;
use couette_core::*;
use num_complex::Complex64;

fn pairs(cfg: &FlowConfig, k: i64, grids: &GridPair) -> Vec<OsEigenpair> {
    let out = converged_pairs(cfg, k, grids, &SolverSettings::default()).unwrap();
    assert!(out.len() >= 10, "{cfg:?} k={k}: {}", out.len());
    out
}

fn configs() -> Vec<FlowConfig> {
    vec![
        FlowConfig::case_i(1.0, -0.1, 1.0, 0.0),
        FlowConfig::case_i(1.0, 0.5, 3.0, 0.0),
        FlowConfig::case_i(0.5, 1.0, 0.0, 2.0),
        FlowConfig::case_ii(1.0, -0.05, 0.1, 1.0, 0.0),
        FlowConfig::case_ii(1.0, 0.4, 0.8, -1.0, 1.0),
    ]
}

#[test]
fn weak_form_holds_for_converged_pairs() {
    let grids = GridPair::new(96).unwrap();
    for cfg in configs() {
        for k in [1, -2, 3] {
            for pair in pairs(&cfg, k, &grids) {
                let res = check_weak_form(&pair, &grids.coarse, &cfg).unwrap();
                assert!(res < WEAK_FORM_TOL, "{cfg:?} k={k} c={}: {res}", pair.c);
            }
        }
    }
}

#[test]
fn perturbed_phase_speed_breaks_weak_form() {
    let grids = GridPair::new(96).unwrap();
    let cfg = FlowConfig::case_i(1.0, 0.5, 3.0, 0.0);
    let mut pair = pairs(&cfg, 1, &grids).remove(0);
    pair.c += 0.1;
    assert!(check_weak_form(&pair, &grids.coarse, &cfg).unwrap() > 1e-3);
}

#[test]
fn lambda_and_phase_speed_consistent() {
    let grids = GridPair::new(64).unwrap();
    for cfg in configs() {
        for k in [1, 2] {
            let spec = resolved_spectrum(&cfg, k, &grids, &SolverSettings::default(), false).unwrap();
            for &l in &spec.eigenvalues {
                let c = params::c_from_lambda(&cfg, k, l).unwrap();
                let back = lambda_from_c(&cfg, k, c).unwrap();
                assert!((back - l).norm() <= 1e-8 * l.norm().max(1.0));
            }
        }
    }
}

#[test]
fn imc_bound_and_chain() {
    let grids = GridPair::new(96).unwrap();
    for cfg in configs() {
        let condition_ii = check_case1(&cfg).is_ok_and(|r| r.criterion_id == CriterionId::I_ii && r.is_proven());
        for k in [1, 2, -3] {
            for pair in pairs(&cfg, k, &grids) {
                let e = compute_functionals(pair.phi.view(), &grids.coarse, pair.k, &cfg, FunctionalVariant::Iform).unwrap();
                match check_imc_bound(&pair, &e) {
                    ImcCheck::Checked { holds, bound, im_c, .. } => {
                        assert!(holds, "{cfg:?}: Im c = {im_c}, bound = {bound}");
                        if condition_ii {
                            assert!(bound < 0.0 && im_c < 0.0);
                        }
                    }
                    ImcCheck::Skipped => panic!("sheared flow skipped"),
                }
                if chain_h(&cfg) > 0.0 {
                    let chain = check_inequality_chain(&e, &cfg, pair.k).unwrap();
                    assert!(chain.all_hold(), "{cfg:?}: {chain:?}");
                    assert!(chain.boundary_ok);
                } else {
                    assert!(check_inequality_chain(&e, &cfg, pair.k).is_err());
                }
                // ∫φ'φ̄ is imaginary, so Q is real
                assert!(e.q.im.abs() < 1e-9 * e.i0sq.sqrt() * e.i1sq.sqrt());
            }
        }
    }
}

#[test]
fn dissipative_case_i_modes_decay() {
    let grids = GridPair::new(96).unwrap();
    for cfg in [FlowConfig::case_i(1.0, 0.1, 2.0, 0.0), FlowConfig::case_i(0.3, 2.0, 1.0, -1.0)] {
        for k in 1..=4 {
            for pair in pairs(&cfg, k, &grids) {
                assert!(pair.c.im < 0.0);
            }
        }
    }
}

#[test]
fn vorticity_free_chain_reduces_to_plain_ordering() {
    let grids = GridPair::new(96).unwrap();
    // α = 0 makes the base flow constant, so use the λ-form eigenfunctions
    let cfg = FlowConfig::case_i(1.0, 0.0, 1.0, 0.0);
    let spec = resolved_spectrum(&cfg, 1, &grids, &SolverSettings::default(), true).unwrap();
    for phi in spec.eigenfunctions.unwrap().iter().take(20) {
        let pair = OsEigenpair { k: 1, reynolds: 0.0, c: Complex64::new(0.0, 0.0), phi: phi.clone() };
        let e = compute_functionals(pair.phi.view(), &grids.coarse, 1, &cfg, FunctionalVariant::Iform).unwrap();
        let chain = check_inequality_chain(&e, &cfg, 1).unwrap();
        assert_eq!(chain.h, 1.0);
        assert!(e.i0sq <= e.i1sq && e.i1sq <= e.i2sq);
    }
}
