use couette_core::green::*;
use couette_core::*;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Two-solution construction: u_L = ζcosh(ζy) + r sinh(ζy) meets the Robin
/// row, u_R = sinh(ζ(1−y)) the Dirichlet row, and the jump of G' is −1.
fn oracle(zeta: Complex64, r: f64, y: f64, s: f64) -> Complex64 {
    let (lo, hi) = if y < s { (y, s) } else { (s, y) };
    let ul = zeta * (zeta * lo).cosh() + r * (zeta * lo).sinh();
    let ur = (zeta * (1.0 - hi)).sinh();
    ul * ur / (zeta * (zeta * zeta.cosh() + r * zeta.sinh()))
}

fn max_diff(a: &linalg::CVector, b: &linalg::CVector) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn zetas() -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 4.0), Complex64::new(10.0, 0.0)]
}

#[test]
fn closed_form_value() {
    let p = GreenParams::new(Complex64::new(1.0, 0.0), 0.0).unwrap();
    let g = green_eval(&p, 0.5, 0.5).unwrap();
    let want = 0.5f64.cosh() * 0.5f64.sinh() / 1.0f64.cosh();
    assert!((g.re - want).abs() < 1e-15 && g.im.abs() < 1e-15);
    assert!((g.re - 0.380797).abs() < 1e-6);
}

#[test]
fn matches_two_solution_oracle() {
    for zeta in zetas() {
        for r in [0.0, 1.0, -0.2] {
            let p = GreenParams::new(zeta, r).unwrap();
            for y in [0.0, 0.1, 0.5, 0.93, 1.0] {
                for s in [0.0, 0.2, 0.5, 0.77, 1.0] {
                    let got = green_eval(&p, y, s).unwrap();
                    let want = oracle(zeta, r, y, s);
                    assert!((got - want).norm() < 1e-13 * want.norm().max(1.0), "{zeta} {r} {y} {s}");
                }
            }
        }
    }
}

#[test]
fn reciprocity_for_real_parameters() {
    for (z, r) in [(1.0, 0.0), (10.0, 1.0), (2.5, -0.2)] {
        let p = GreenParams::new(Complex64::new(z, 0.0), r).unwrap();
        for y in [0.0, 0.13, 0.6, 0.99] {
            for s in [0.05, 0.4, 0.8, 1.0] {
                let d = green_eval(&p, y, s).unwrap() - green_eval(&p, s, y).unwrap();
                assert!(d.norm() < 1e-10);
            }
        }
    }
}

#[test]
fn manufactured_solution() {
    let grid = make_grid(64).unwrap();
    for zeta in zetas() {
        for r in [0.0, 1.0, -0.2] {
            // g(0) = 1, g'(0) = r, g(1) = 0
            let h = |y: f64| (PI * y / 2.0).cos() + (1.0 + r) * y;
            let dh = |y: f64| -PI / 2.0 * (PI * y / 2.0).sin() + (1.0 + r);
            let ddh = |y: f64| -PI * PI / 4.0 * (PI * y / 2.0).cos();
            let g = grid.nodes().mapv(|y| Complex64::new((1.0 - y) * h(y), 0.0));
            let f = grid.nodes().mapv(|y| {
                let gpp = -2.0 * dh(y) + (1.0 - y) * ddh(y);
                zeta * zeta * (1.0 - y) * h(y) - gpp
            });
            let p = GreenParams::new(zeta, r).unwrap();
            let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let direct = resolvent_solve_direct(&p, &grid, f.view()).unwrap();
            assert!(max_diff(&direct, &g) / scale < 1e-7);
            let green = resolvent_solve_green(&p, &grid, f.view()).unwrap();
            assert!(max_diff(&green, &g) / scale < 1e-7);
        }
    }
}

#[test]
fn green_and_direct_agree_on_random_forcing() {
    let grid = make_grid(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for zeta in zetas() {
        for r in [0.0, 1.0, -0.2] {
            let p = GreenParams::new(zeta, r).unwrap();
            for _ in 0..3 {
                let f = random_forcing(&grid, &mut rng).unwrap();
                let a = resolvent_solve_green(&p, &grid, f.view()).unwrap();
                let b = resolvent_solve_direct(&p, &grid, f.view()).unwrap();
                assert!(max_diff(&a, &b) < 1e-8, "{zeta} {r}: {}", max_diff(&a, &b));
            }
        }
    }
}

#[test]
fn estimate_bounded_on_positive_axis() {
    let grid = make_grid(64).unwrap();
    let cfg = FlowConfig::case_i(1.0, 0.0, 1.0, 0.0);
    let lambdas: Vec<Complex64> = [1.0, 10.0, 100.0].iter().map(|&l| Complex64::new(l, 0.0)).collect();
    let report = resolvent_estimate_scan(&cfg, 1, &lambdas, &grid, 0).unwrap();
    assert!(report.bounded);
    assert!(report.spread() < 3.0, "{report:?}");
}

#[test]
fn estimate_finite_at_zero() {
    let grid = make_grid(48).unwrap();
    for k in [0, 1] {
        let cfg = FlowConfig::case_i(0.7, 0.4, 1.0, 0.0);
        let report = resolvent_estimate_scan(&cfg, k, &[Complex64::new(0.0, 0.0)], &grid, 0).unwrap();
        assert!(report.bounded && report.max_ratio > 0.0);
    }
}

#[test]
fn viscosity_rescaling() {
    // (λ + μ(k² − ∂²))u = f with μ = 2 equals (λ/2 + k² − ∂²)u = f/2
    let grid = make_grid(48).unwrap();
    let f = random_forcing(&grid, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    let lambda = Complex64::new(3.0, 1.0);
    let p = GreenParams::new(zeta_for(lambda, 2.0, 1), 0.5 / 2.0).unwrap();
    let u = resolvent_solve_direct(&p, &grid, f.view()).unwrap() / Complex64::new(2.0, 0.0);
    let d2 = grid.differentiate(u.view(), 2).unwrap();
    for i in 1..grid.len() - 1 {
        let lhs = lambda * u[i] + 2.0 * (u[i] - d2[i]);
        assert!((lhs - f[i]).norm() < 1e-9);
    }
}

#[test]
fn case_ii_rejected() {
    let grid = make_grid(16).unwrap();
    let cfg = FlowConfig::case_ii(1.0, 0.1, 0.1, 1.0, 0.0);
    assert!(resolvent_estimate_scan(&cfg, 1, &[Complex64::new(1.0, 0.0)], &grid, 0).is_err());
}
