//! Physical parameters, the affine Couette base profile and the change of
//! variables between growth rates `λ` and Orr–Sommerfeld phase speeds `c`.
//!
//! Everything is nondimensional: the channel is `y ∈ [0, 1]` and the
//! streamwise direction has period `2π`, so wavenumbers are integers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wall configuration.
///
/// `CaseI`: no-slip top wall moving with speed `a`, Navier slip bottom wall
/// (coefficient `alpha`) moving with speed `b`.
/// `CaseII`: Navier slip on both walls, `alpha0` at `y = 0`, `alpha1` at
/// `y = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum SlipBoundary {
    #[serde(rename = "I")]
    CaseI { alpha: f64 },
    #[serde(rename = "II")]
    CaseII { alpha0: f64, alpha1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    #[serde(rename = "I")]
    CaseI,
    #[serde(rename = "II")]
    CaseII,
}

/// Full physical parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub mu: f64,
    pub slip: SlipBoundary,
    /// Speed of the top wall.
    pub a: f64,
    /// Speed of the bottom wall.
    pub b: f64,
}

impl FlowConfig {
    pub fn case_i(mu: f64, alpha: f64, a: f64, b: f64) -> Self {
        Self {
            mu,
            slip: SlipBoundary::CaseI { alpha },
            a,
            b,
        }
    }

    pub fn case_ii(mu: f64, alpha0: f64, alpha1: f64, a: f64, b: f64) -> Self {
        Self {
            mu,
            slip: SlipBoundary::CaseII { alpha0, alpha1 },
            a,
            b,
        }
    }

    pub fn case(&self) -> Case {
        match self.slip {
            SlipBoundary::CaseI { .. } => Case::CaseI,
            SlipBoundary::CaseII { .. } => Case::CaseII,
        }
    }

    /// Checks `μ > 0`, finiteness and the nonvanishing profile denominator.
    pub fn validate(&self) -> Result<()> {
        let values = match self.slip {
            SlipBoundary::CaseI { alpha } => vec![self.mu, alpha, self.a, self.b],
            SlipBoundary::CaseII { alpha0, alpha1 } => {
                vec![self.mu, alpha0, alpha1, self.a, self.b]
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "all parameters must be finite".into(),
            ));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be positive, got {}",
                self.mu
            )));
        }
        self.denominator().map(|_| ())
    }

    /// Both walls stress-free: every constant flow is steady.
    fn is_stress_free(&self) -> bool {
        matches!(self.slip, SlipBoundary::CaseII { alpha0, alpha1 } if alpha0 == 0.0 && alpha1 == 0.0)
    }

    /// Profile denominator: `μ + α` (Case I) or `μ(α₀+α₁) + α₀α₁` (Case II).
    fn denominator(&self) -> Result<f64> {
        if self.is_stress_free() {
            return Ok(1.0);
        }
        let (d, scale, what) = match self.slip {
            SlipBoundary::CaseI { alpha } => (
                self.mu + alpha,
                self.mu.abs() + alpha.abs(),
                "mu + alpha = 0",
            ),
            SlipBoundary::CaseII { alpha0, alpha1 } => (
                self.mu * (alpha0 + alpha1) + alpha0 * alpha1,
                self.mu * (alpha0.abs() + alpha1.abs()) + (alpha0 * alpha1).abs(),
                "mu(alpha0 + alpha1) + alpha0 alpha1 = 0",
            ),
        };
        if d == 0.0 || d.abs() <= 4.0 * f64::EPSILON * scale {
            return Err(Error::DegenerateDenominator(what));
        }
        Ok(d)
    }

    /// Slip ratios `α/μ` entering the boundary rows: `(bottom, top)`.
    /// Case I has no slip ratio at the no-slip top wall.
    pub fn slip_ratios(&self) -> (f64, Option<f64>) {
        match self.slip {
            SlipBoundary::CaseI { alpha } => (alpha / self.mu, None),
            SlipBoundary::CaseII { alpha0, alpha1 } => (alpha0 / self.mu, Some(alpha1 / self.mu)),
        }
    }

    /// Same configuration with both walls shifted by `s`.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            a: self.a + s,
            b: self.b + s,
            ..*self
        }
    }
}

/// Affine base flow `U(y) = slope·y + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouetteProfile {
    pub slope: f64,
    pub intercept: f64,
}

impl CouetteProfile {
    pub fn velocity(&self, y: f64) -> f64 {
        self.slope * y + self.intercept
    }
}

/// Per-wavenumber parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub k: i64,
    /// Effective Reynolds number `R = |slope|/μ`.
    pub reynolds: f64,
    /// `kα(a−b)` in Case I, `kα₀α₁(a−b)` in Case II.
    pub xi: f64,
}

/// Builds the steady affine profile. In Case II with `α₀ = α₁ = 0` the
/// profile formula is `0/0`; the flow is taken as the constant `(a+b)/2`,
/// the limit along `α₀ = α₁ → 0`.
pub fn build_profile(config: &FlowConfig) -> Result<CouetteProfile> {
    config.validate()?;
    if config.is_stress_free() {
        return Ok(CouetteProfile {
            slope: 0.0,
            intercept: 0.5 * (config.a + config.b),
        });
    }
    let d = config.denominator()?;
    let (mu, a, b) = (config.mu, config.a, config.b);
    let (slope, intercept) = match config.slip {
        SlipBoundary::CaseI { alpha } => (alpha * (a - b) / d, (mu * a + alpha * b) / d),
        SlipBoundary::CaseII { alpha0, alpha1 } => (
            alpha0 * alpha1 * (a - b) / d,
            (mu * (alpha1 * a + alpha0 * b) + alpha0 * alpha1 * b) / d,
        ),
    };
    // a == b must give an exactly constant flow
    if a == b {
        return Ok(CouetteProfile {
            slope: 0.0,
            intercept: a,
        });
    }
    Ok(CouetteProfile { slope, intercept })
}

/// `R₁ = |α(a−b)|/(μ|μ+α|)` or `R₂ = |α₀α₁(a−b)|/(μ|μ(α₀+α₁)+α₀α₁|)`.
pub fn effective_reynolds(config: &FlowConfig) -> Result<f64> {
    let profile = build_profile(config)?;
    Ok(profile.slope.abs() / config.mu)
}

pub fn mode_params(config: &FlowConfig, k: i64) -> Result<ModeParams> {
    let reynolds = effective_reynolds(config)?;
    let xi = match config.slip {
        SlipBoundary::CaseI { alpha } => k as f64 * alpha * (config.a - config.b),
        SlipBoundary::CaseII { alpha0, alpha1 } => {
            k as f64 * alpha0 * alpha1 * (config.a - config.b)
        }
    };
    Ok(ModeParams { k, reynolds, xi })
}

/// `λ = −ik(|slope|·c + intercept)`, so that `Re λ = k·μ·R·Im c`.
pub fn lambda_from_c(config: &FlowConfig, k: i64, c: Complex64) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::ZeroWavenumber);
    }
    let profile = build_profile(config)?;
    let k = k as f64;
    Ok(-Complex64::i() * k * (profile.slope.abs() * c + profile.intercept))
}

/// Inverse of [`lambda_from_c`]. Undefined for a constant base flow.
pub fn c_from_lambda(config: &FlowConfig, k: i64, lambda: Complex64) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::ZeroWavenumber);
    }
    let profile = build_profile(config)?;
    if profile.slope == 0.0 {
        return Err(Error::ZeroReynolds);
    }
    let k = k as f64;
    Ok((Complex64::i() * lambda / k - profile.intercept) / profile.slope.abs())
}
