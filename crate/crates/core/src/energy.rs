//! Energy functionals of Orr–Sommerfeld eigenfunctions and the integral
//! inequalities behind the stability criteria.
//!
//! With `L = ∂² − k²`, an eigenpair `(c, φ)` in Orr–Sommerfeld form solves
//! `L²φ = ikR(y − c)Lφ`. Pairing with `φ̄` and integrating by parts gives
//!
//! ```text
//! I₂² + 2k²I₁² + k⁴I₀² = ikR[−∫φ'φ̄ − ∫(y−c)|φ'|² − k²∫(y−c)|φ|²]
//! ```
//!
//! where `I₂²` carries the slip boundary terms. The imaginary part yields
//! `Im c = (Im ∫φ'φ̄ − J/(kR)) / (I₁² + k²I₀²)` with `J` the left side.

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cheb::ChebGrid;
use crate::eigen::{resolved_spectrum, GridPair, SolverSettings};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::params::{build_profile, c_from_lambda, FlowConfig, SlipBoundary};

/// Tolerance on the Hölder bound for `Im c`.
pub const IMC_SLACK: f64 = 1e-7;
/// Relative tolerance on each link of the inequality chain.
pub const CHAIN_SLACK: f64 = 1e-9;
/// Boundary rows are considered satisfied below this relative residual.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Eigenfunctions whose top Chebyshev coefficients exceed this fraction of
/// the largest one are not resolved and are excluded from verification.
pub const TAIL_TOL: f64 = 1e-6;
/// Relative residual allowed in the integrated weak-form identity.
pub const WEAK_FORM_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FunctionalVariant {
    #[default]
    Iform,
    /// `H₂² = ∫|φ|² + Σ (α_l/μ)|φ(l)|²`, transcribed as written for the
    /// streamwise-velocity form. `H₀, H₁` coincide with `I₀, I₁`.
    Hform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyFunctionals {
    pub i0sq: f64,
    pub i1sq: f64,
    pub i2sq: f64,
    /// `(i/2)∫φ φ̄'`.
    pub q: Complex64,
    pub variant: FunctionalVariant,
    /// Largest relative residual of the mode's boundary rows.
    pub boundary_residual: f64,
}

impl EnergyFunctionals {
    /// `I₂² + 2k²I₁² + k⁴I₀²`.
    pub fn dissipation(&self, k: f64) -> f64 {
        let k2 = k * k;
        self.i2sq + 2.0 * k2 * self.i1sq + k2 * k2 * self.i0sq
    }
}

pub fn compute_functionals(
    phi: ArrayView1<Complex64>,
    grid: &ChebGrid,
    _k: i64,
    config: &FlowConfig,
    variant: FunctionalVariant,
) -> Result<EnergyFunctionals> {
    let d1 = grid.differentiate(phi, 1)?;
    let d2 = grid.differentiate(phi, 2)?;
    let phi = phi.to_owned();
    let last = grid.len() - 1;
    let (r0, r1) = config.slip_ratios();

    let flat = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let norm2 = |v: &Array1<Complex64>| grid.integrate_product(v.view(), v.view(), flat).map(|z| z.re);
    let i0sq = norm2(&phi)?;
    let i1sq = norm2(&d1)?;
    let i2sq = match variant {
        FunctionalVariant::Iform => {
            let top = r1.map_or(0.0, |r| r * d1[last].norm_sqr());
            norm2(&d2)? + r0 * d1[0].norm_sqr() + top
        }
        FunctionalVariant::Hform => {
            let top = r1.map_or(0.0, |r| r * phi[last].norm_sqr());
            i0sq + r0 * phi[0].norm_sqr() + top
        }
    };
    let q = Complex64::new(0.0, 0.5) * grid.integrate_product(phi.view(), d1.view(), flat)?;

    // boundary rows of the Orr–Sommerfeld mode
    let top_row = match r1 {
        None => d1[last],
        Some(r) => d2[last] + d1[last] * r,
    };
    let rows = [phi[0], d2[0] - d1[0] * r0, top_row, phi[last]];
    let peak = |v: &Array1<Complex64>| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = peak(&phi) + peak(&d1) + peak(&d2);
    let boundary_residual = if scale == 0.0 {
        0.0
    } else {
        rows.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
    };

    Ok(EnergyFunctionals {
        i0sq,
        i1sq,
        i2sq,
        q,
        variant,
        boundary_residual,
    })
}

/// `h` of the inequality chain: `1 − (2|α|−α)/μ` or
/// `1 − (2max|α_l| − α₀ − α₁)/μ`.
pub fn chain_h(config: &FlowConfig) -> f64 {
    let t = match config.slip {
        SlipBoundary::CaseI { alpha } => 2.0 * alpha.abs() - alpha,
        SlipBoundary::CaseII { alpha0, alpha1 } => 2.0 * alpha0.abs().max(alpha1.abs()) - alpha0 - alpha1,
    };
    1.0 - t / config.mu
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `(lhs − rhs) / max(|lhs|, |rhs|)`.
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let slack = if scale == 0.0 { 0.0 } else { (lhs - rhs) / scale };
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            holds: slack >= -CHAIN_SLACK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub h: f64,
    pub checks: Vec<InequalityCheck>,
    /// False when the sampled function violates the mode's boundary rows.
    pub boundary_ok: bool,
}

impl ChainReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn min_slack(&self) -> f64 {
        self.checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }
}

/// `I₂² ≥ hI₁²`, `I₂² ≥ hI₀²`, `I₁² ≥ I₀²`.
pub fn check_inequality_chain(e: &EnergyFunctionals, config: &FlowConfig, _k: i64) -> Result<ChainReport> {
    let h = chain_h(config);
    if h <= 0.0 {
        return Err(Error::HypothesisViolated(format!(
            "viscosity {} is not above the chain threshold (h = {h})",
            config.mu
        )));
    }
    Ok(ChainReport {
        h,
        checks: vec![
            InequalityCheck::new("I2sq >= h I1sq", e.i2sq, h * e.i1sq),
            InequalityCheck::new("I2sq >= h I0sq", e.i2sq, h * e.i0sq),
            InequalityCheck::new("I1sq >= I0sq", e.i1sq, e.i0sq),
        ],
        boundary_ok: e.boundary_residual < BOUNDARY_TOL,
    })
}

/// Eigenpair in Orr–Sommerfeld form `L²φ = ikR(y − c)Lφ` with `k > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsEigenpair {
    pub k: i64,
    pub reynolds: f64,
    pub c: Complex64,
    pub phi: CVector,
}

/// Converts a solver eigenpair `(λ, φ)` at wavenumber `k`.
///
/// A decreasing profile flips the sign of `c`; a negative effective
/// wavenumber is folded into `k > 0` by complex conjugation.
pub fn os_eigenpair(config: &FlowConfig, k: i64, lambda: Complex64, phi: &CVector) -> Result<OsEigenpair> {
    if k == 0 {
        return Err(Error::ZeroWavenumber);
    }
    let profile = build_profile(config)?;
    if profile.slope == 0.0 {
        return Err(Error::ZeroReynolds);
    }
    let c = c_from_lambda(config, k, lambda)?;
    let reynolds = profile.slope.abs() / config.mu;
    // L²φ = i(ks)R(y − sc)Lφ with s the sign of the slope
    let s = profile.slope.signum();
    let k_os = k * s as i64;
    let c_os = c * s;
    let (c, phi) = if k_os > 0 {
        (c_os, phi.clone())
    } else {
        (c_os.conj(), phi.mapv(|z| z.conj()))
    };
    Ok(OsEigenpair {
        k: k_os.abs(),
        reynolds,
        c,
        phi,
    })
}

/// Resolution-confirmed eigenpairs of wavenumber `k ≠ 0` with resolved
/// eigenfunctions, in Orr–Sommerfeld form.
pub fn converged_pairs(
    config: &FlowConfig,
    k: i64,
    grids: &GridPair,
    settings: &SolverSettings,
) -> Result<Vec<OsEigenpair>> {
    let spec = resolved_spectrum(config, k, grids, settings, true)?;
    let funcs = spec.eigenfunctions.unwrap_or_default();
    let mut out = Vec::new();
    for (&lambda, phi) in spec.eigenvalues.iter().zip(&funcs) {
        if grids.coarse.tail_ratio(phi.view())? <= TAIL_TOL {
            out.push(os_eigenpair(config, k, lambda, phi)?);
        }
    }
    Ok(out)
}

/// Both sides of the integrated weak-form identity. All integrals of
/// products are evaluated exactly for the polynomial interpolant.
pub fn weak_form_sides(pair: &OsEigenpair, grid: &ChebGrid, config: &FlowConfig) -> Result<(Complex64, Complex64)> {
    let e = compute_functionals(pair.phi.view(), grid, pair.k, config, FunctionalVariant::Iform)?;
    let k = pair.k as f64;
    let phi = &pair.phi;
    let d1 = grid.differentiate(phi.view(), 1)?;
    let one = Complex64::new(1.0, 0.0);
    let p = grid.integrate_product(d1.view(), phi.view(), [one, Complex64::new(0.0, 0.0)])?;
    // weight y − c
    let shifted = [-pair.c, one];
    let m1 = grid.integrate_product(d1.view(), d1.view(), shifted)?;
    let m0 = grid.integrate_product(phi.view(), phi.view(), shifted)?;
    let lhs = Complex64::new(e.dissipation(k), 0.0);
    let rhs = Complex64::new(0.0, k * pair.reynolds) * (-p - m1 - k * k * m0);
    Ok((lhs, rhs))
}

/// `|LHS − RHS| / (|LHS| + |RHS|)`, or 0 when both vanish.
pub fn check_weak_form(pair: &OsEigenpair, grid: &ChebGrid, config: &FlowConfig) -> Result<f64> {
    let (lhs, rhs) = weak_form_sides(pair, grid, config)?;
    let scale = lhs.norm() + rhs.norm();
    Ok(if scale == 0.0 { 0.0 } else { (lhs - rhs).norm() / scale })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ImcCheck {
    /// `R = 0`: the bound is vacuous.
    Skipped,
    Checked {
        im_c: f64,
        /// `(I₀I₁ − J/(kR)) / (I₁² + k²I₀²)`.
        bound: f64,
        /// `bound − Im c`.
        slack: f64,
        holds: bool,
    },
}

/// Hölder bound on `Im c`.
pub fn check_imc_bound(pair: &OsEigenpair, e: &EnergyFunctionals) -> ImcCheck {
    if pair.reynolds == 0.0 {
        return ImcCheck::Skipped;
    }
    let k = pair.k as f64;
    let bound = ((e.i0sq * e.i1sq).sqrt() - e.dissipation(k) / (k * pair.reynolds)) / (e.i1sq + k * k * e.i0sq);
    let slack = bound - pair.c.im;
    ImcCheck::Checked {
        im_c: pair.c.im,
        bound,
        slack,
        holds: slack >= -IMC_SLACK,
    }
}
