//! Green function of the per-mode resolvent problem
//!
//! ```text
//! (ζ² − ∂²)u = f on (0, 1),   u'(0) = r·u(0),   u(1) = 0,
//! ```
//!
//! with `r = α/μ`, and the empirical resolvent estimate built on it. The
//! viscous problem `(λ + μ(k² − ∂²))u = f` maps onto this one through
//! `ζ² = λ/μ + k²` and a factor `1/μ`.

use ndarray::ArrayView1;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cheb::ChebGrid;
use crate::error::{Error, Result};
use crate::linalg::{solve_vector, CMatrix, CVector};
use crate::params::{FlowConfig, SlipBoundary};

/// Chebyshev modes in the random forcing.
pub const FORCING_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenParams {
    pub zeta: Complex64,
    pub slip_ratio: f64,
}

impl GreenParams {
    /// Validated parameters: `Re ζ > 0` and a nonvanishing denominator.
    pub fn new(zeta: Complex64, slip_ratio: f64) -> Result<Self> {
        let p = Self { zeta, slip_ratio };
        p.denominator()?;
        Ok(p)
    }

    /// `(r + ζ) − (r − ζ)e^{−2ζ}`.
    fn denominator(&self) -> Result<Complex64> {
        let (z, r) = (self.zeta, self.slip_ratio);
        if !(z.re > 0.0) || !r.is_finite() || !z.is_finite() {
            return Err(Error::SingularDenominator(format!("zeta = {z} must have positive real part")));
        }
        let d = (r + z) - (r - z) * (-2.0 * z).exp();
        if d.norm() <= 1e-14 * (r.abs() + z.norm()) {
            return Err(Error::SingularDenominator(format!("denominator vanishes at zeta = {z}, r = {r}")));
        }
        Ok(d)
    }
}

/// `ζ = sqrt(λ/μ + k²)` on the principal branch.
pub fn zeta_for(lambda: Complex64, mu: f64, k: i64) -> Complex64 {
    (lambda / mu + (k * k) as f64).sqrt()
}

/// `G(y, s)` as a sum of terms whose exponentials all have nonpositive real
/// exponent, so it stays finite for large `Re ζ`.
pub fn green_eval(p: &GreenParams, y: f64, s: f64) -> Result<Complex64> {
    for v in [y, s] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfDomain(v));
        }
    }
    let d = p.denominator()?;
    let (z, r) = (p.zeta, p.slip_ratio);
    let e = |x: f64| (-z * x).exp();
    let scale = 2.0 * z * d;
    let g1 = (r + z) * e(2.0 - s - y) / scale;
    let g2 = (r - z) * e(s + y) / scale;
    let g3 = -(r - z) * e(2.0 - s + y) / scale;
    let g4 = -(r - z) * e(2.0 + s - y) / scale;
    let g5 = -e((s - y).abs()) / (2.0 * z);
    Ok(-(g1 + g2 + g3 + g4 + g5))
}

/// `u(y_i) = ∫ G(y_i, s) f(s) ds`, split at `s = y_i` where `G` has a kink.
/// Each piece uses the grid's own rule mapped onto the subinterval, with `f`
/// interpolated barycentrically.
pub fn resolvent_solve_green(p: &GreenParams, grid: &ChebGrid, f: ArrayView1<Complex64>) -> Result<CVector> {
    p.denominator()?;
    if f.len() != grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            got: f.len(),
        });
    }
    let (t, w) = (grid.nodes(), grid.weights());
    let mut u = CVector::zeros(grid.len());
    for (i, &y) in grid.nodes().iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (lo, hi) in [(0.0, y), (y, 1.0)] {
            let len = hi - lo;
            if len <= 0.0 {
                continue;
            }
            for (&tj, &wj) in t.iter().zip(w.iter()) {
                let s = (lo + len * tj).clamp(0.0, 1.0);
                acc += green_eval(p, y, s)? * grid.interpolate(f, s)? * (len * wj);
            }
        }
        u[i] = acc;
    }
    Ok(u)
}

/// Dense collocation solve of the same boundary value problem.
pub fn resolvent_solve_direct(p: &GreenParams, grid: &ChebGrid, f: ArrayView1<Complex64>) -> Result<CVector> {
    let n = grid.len();
    if f.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: f.len() });
    }
    let z2 = p.zeta * p.zeta;
    let (d1, d2) = (grid.diff(1), grid.diff(2));
    let mut m = CMatrix::from_shape_fn((n, n), |(i, j)| {
        let diag = if i == j { z2 } else { Complex64::new(0.0, 0.0) };
        diag - d2[[i, j]]
    });
    let mut rhs = f.to_owned();
    let last = n - 1;
    for j in 0..n {
        let unit = |idx: usize| if j == idx { 1.0 } else { 0.0 };
        m[[0, j]] = Complex64::new(p.slip_ratio * unit(0) - d1[[0, j]], 0.0);
        m[[last, j]] = Complex64::new(unit(last), 0.0);
    }
    rhs[0] = Complex64::new(0.0, 0.0);
    rhs[last] = Complex64::new(0.0, 0.0);
    solve_vector(&m, &rhs)
}

fn l2_sq(grid: &ChebGrid, u: &CVector) -> Result<f64> {
    grid.integrate_real(u.mapv(|z| z.norm_sqr()).view())
}

/// `∫(1+k²+k⁴)|u|² + (1+k²)|u'|² + |u''|²`.
pub fn h2_norm_sq(grid: &ChebGrid, u: ArrayView1<Complex64>, k: i64) -> Result<f64> {
    let k2 = (k * k) as f64;
    let u0 = u.to_owned();
    let u1 = grid.differentiate(u, 1)?;
    let u2 = grid.differentiate(u, 2)?;
    Ok((1.0 + k2 + k2 * k2) * l2_sq(grid, &u0)? + (1.0 + k2) * l2_sq(grid, &u1)? + l2_sq(grid, &u2)?)
}

/// Smooth forcing: a Gaussian combination of the first [`FORCING_MODES`]
/// Chebyshev polynomials, normalized to unit `L²` norm.
pub fn random_forcing(grid: &ChebGrid, rng: &mut ChaCha8Rng) -> Result<CVector> {
    let coeffs: Vec<Complex64> = (0..FORCING_MODES)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let f = grid.nodes().mapv(|y| {
        let x = 1.0 - 2.0 * y;
        let theta = x.clamp(-1.0, 1.0).acos();
        coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * (j as f64 * theta).cos())
            .sum::<Complex64>()
    });
    let norm = l2_sq(grid, &f)?.sqrt();
    Ok(f / Complex64::new(norm, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventSample {
    pub lambda: Complex64,
    pub zeta: Complex64,
    /// `(|λ|‖u‖ + μ‖u‖_{H²}) / ‖f‖`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventReport {
    pub samples: Vec<ResolventSample>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Every ratio is finite.
    pub bounded: bool,
}

impl ResolventReport {
    /// `max_ratio / min_ratio`, or 1 when every ratio is zero.
    pub fn spread(&self) -> f64 {
        if self.max_ratio == 0.0 {
            1.0
        } else {
            self.max_ratio / self.min_ratio
        }
    }
}

/// Ratio of the resolvent estimate for one forcing.
pub fn resolvent_ratio(config: &FlowConfig, k: i64, lambda: Complex64, grid: &ChebGrid, f: &CVector) -> Result<ResolventSample> {
    let SlipBoundary::CaseI { alpha } = config.slip else {
        return Err(Error::InvalidParameter(
            "the resolvent estimate is set up for the Case I Stokes problem".into(),
        ));
    };
    config.validate()?;
    let mu = config.mu;
    let p = GreenParams {
        zeta: zeta_for(lambda, mu, k),
        slip_ratio: alpha / mu,
    };
    let f_norm = l2_sq(grid, f)?.sqrt();
    if f_norm == 0.0 {
        return Ok(ResolventSample {
            lambda,
            zeta: p.zeta,
            ratio: 0.0,
        });
    }
    let u = resolvent_solve_direct(&p, grid, f.view())? / Complex64::new(mu, 0.0);
    let ratio = (lambda.norm() * l2_sq(grid, &u)?.sqrt() + mu * h2_norm_sq(grid, u.view(), k)?.sqrt()) / f_norm;
    Ok(ResolventSample {
        lambda,
        zeta: p.zeta,
        ratio,
    })
}

/// Draws a fresh forcing for every `λ` from a generator seeded with `seed`.
pub fn resolvent_estimate_scan(
    config: &FlowConfig,
    k: i64,
    lambdas: &[Complex64],
    grid: &ChebGrid,
    seed: u64,
) -> Result<ResolventReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forcings = lambdas
        .iter()
        .map(|_| random_forcing(grid, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    scan_with_forcings(config, k, lambdas, grid, &forcings)
}

pub fn scan_with_forcings(
    config: &FlowConfig,
    k: i64,
    lambdas: &[Complex64],
    grid: &ChebGrid,
    forcings: &[CVector],
) -> Result<ResolventReport> {
    if forcings.len() != lambdas.len() {
        return Err(Error::SizeMismatch {
            expected: lambdas.len(),
            got: forcings.len(),
        });
    }
    let samples = lambdas
        .iter()
        .zip(forcings)
        .map(|(&l, f)| resolvent_ratio(config, k, l, grid, f))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    Ok(ResolventReport {
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        bounded: ratios.iter().all(|r| r.is_finite()),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::make_grid;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_left_half_plane() {
        assert!(GreenParams::new(Complex64::new(-1.0, 0.0), 0.0).is_err());
        assert!(GreenParams::new(Complex64::new(0.0, 2.0), 0.0).is_err());
        assert!(GreenParams::new(c(1.0), 0.0).is_ok());
    }

    #[test]
    fn dirichlet_at_top() {
        let p = GreenParams::new(Complex64::new(3.0, 4.0), 1.0).unwrap();
        for s in [0.0, 0.3, 1.0] {
            assert!(green_eval(&p, 1.0, s).unwrap().norm() < 1e-15);
        }
        assert!(matches!(green_eval(&p, 1.5, 0.0), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn large_zeta_is_finite() {
        let p = GreenParams::new(c(200.0), -0.2).unwrap();
        for y in [0.0, 0.25, 0.5, 1.0] {
            for s in [0.0, 0.5, 0.999, 1.0] {
                assert!(green_eval(&p, y, s).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn zero_forcing() {
        let g = make_grid(16).unwrap();
        let p = GreenParams::new(c(1.0), 0.0).unwrap();
        let zero = CVector::zeros(16);
        assert!(resolvent_solve_green(&p, &g, zero.view()).unwrap().iter().all(|z| z.norm() == 0.0));
        assert!(resolvent_solve_direct(&p, &g, zero.view()).unwrap().iter().all(|z| z.norm() == 0.0));
        let cfg = FlowConfig::case_i(1.0, 0.0, 1.0, 0.0);
        let r = scan_with_forcings(&cfg, 1, &[c(1.0)], &g, &[zero]).unwrap();
        assert_eq!(r.max_ratio, 0.0);
    }

    #[test]
    fn forcing_is_unit_and_seeded() {
        let g = make_grid(32).unwrap();
        let a = random_forcing(&g, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = random_forcing(&g, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert!((l2_sq(&g, &a).unwrap() - 1.0).abs() < 1e-12);
    }
}
