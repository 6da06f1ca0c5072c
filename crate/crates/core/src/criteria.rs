//! Closed-form sufficient conditions for linear stability.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::params::{effective_reynolds, FlowConfig, SlipBoundary};

/// The constant `2√2`.
pub const TWO_SQRT_2: f64 = 2.0 * SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ProvenStable,
    /// The sufficient conditions do not apply. Never a claim of instability.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum CriterionId {
    I_i,
    I_ii,
    II_iii,
    II_iv,
}

impl CriterionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriterionId::I_i => "I_i",
            CriterionId::I_ii => "I_ii",
            CriterionId::II_iii => "II_iii",
            CriterionId::II_iv => "II_iv",
        }
    }
}

/// Outcome of a criterion check. For `Unknown`, `criterion_id` names the
/// last condition tried and `margin` is its (nonpositive) slack: either
/// `μ − threshold` when the viscosity hypothesis fails, or `2√2 − lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub verdict: Verdict,
    pub criterion_id: CriterionId,
    pub margin: f64,
    pub details: BTreeMap<String, f64>,
}

impl CriterionResult {
    pub fn is_proven(&self) -> bool {
        self.verdict == Verdict::ProvenStable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoincareConvention {
    /// `‖f‖ ≤ C‖f'‖`, `C = 1/π`.
    #[default]
    NormForm,
    /// `‖f‖² ≤ C‖f'‖²`, `C = 1/π²`.
    SquaredForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareConstant {
    pub value: f64,
    pub convention: PoincareConvention,
}

pub fn poincare_constant(convention: PoincareConvention) -> PoincareConstant {
    let value = match convention {
        PoincareConvention::NormForm => 1.0 / PI,
        PoincareConvention::SquaredForm => 1.0 / (PI * PI),
    };
    PoincareConstant { value, convention }
}

/// Root of `2δ³ + δ − 1` in `(0, 1)`.
pub fn delta0() -> f64 {
    let mut d: f64 = 0.5;
    for _ in 0..50 {
        let step = (2.0 * d * d * d + d - 1.0) / (6.0 * d * d + 1.0);
        d -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    d
}

/// `inf_k f(k) = 2√2·√h`, attained in the `δ → 1` limit.
pub fn bound_min_f(h: f64) -> Result<f64> {
    if h <= 0.0 || h.is_nan() {
        return Err(Error::NonpositiveH(h));
    }
    Ok(TWO_SQRT_2 * h.sqrt())
}

/// The family `f(k; h, δ) = (1/k)·max{h + 2√2k³√(1−δ), h + 2k²δ}`.
pub fn f_family(k: f64, h: f64, delta: f64) -> f64 {
    let cubic = h + TWO_SQRT_2 * k.powi(3) * (1.0 - delta).sqrt();
    let quad = h + 2.0 * k * k * delta;
    cubic.max(quad) / k
}

/// Wavenumber where the two branches of [`f_family`] meet.
pub fn f_breakpoint(delta: f64) -> f64 {
    SQRT_2 / 2.0 * delta / (1.0 - delta).sqrt()
}

fn detail(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn check_case1(config: &FlowConfig) -> Result<CriterionResult> {
    let SlipBoundary::CaseI { alpha } = config.slip else {
        return Err(Error::InvalidParameter("check_case1 needs a Case I configuration".into()));
    };
    let r1 = effective_reynolds(config)?;
    let mu = config.mu;
    if alpha >= 0.0 {
        return Ok(CriterionResult {
            verdict: Verdict::ProvenStable,
            criterion_id: CriterionId::I_i,
            margin: f64::INFINITY,
            details: detail(&[("alpha", alpha), ("reynolds", r1)]),
        });
    }
    let threshold = -3.0 * alpha;
    if mu <= threshold {
        return Ok(CriterionResult {
            verdict: Verdict::Unknown,
            criterion_id: CriterionId::I_ii,
            margin: mu - threshold,
            details: detail(&[("reynolds", r1), ("mu_threshold", threshold)]),
        });
    }
    let lhs = r1 / (1.0 + 3.0 * alpha / mu).sqrt();
    let margin = TWO_SQRT_2 - lhs;
    Ok(CriterionResult {
        verdict: if lhs < TWO_SQRT_2 { Verdict::ProvenStable } else { Verdict::Unknown },
        criterion_id: CriterionId::I_ii,
        margin,
        details: detail(&[("reynolds", r1), ("mu_threshold", threshold), ("lhs", lhs)]),
    })
}

pub fn check_case2(config: &FlowConfig, convention: PoincareConvention) -> Result<CriterionResult> {
    let SlipBoundary::CaseII { alpha0, alpha1 } = config.slip else {
        return Err(Error::InvalidParameter("check_case2 needs a Case II configuration".into()));
    };
    let r2 = effective_reynolds(config)?;
    let mu = config.mu;
    if alpha0 >= 0.0 && alpha1 >= 0.0 {
        return Ok(CriterionResult {
            verdict: Verdict::ProvenStable,
            criterion_id: CriterionId::II_iii,
            margin: f64::INFINITY,
            details: detail(&[("alpha0", alpha0), ("alpha1", alpha1), ("reynolds", r2)]),
        });
    }
    let cp = poincare_constant(convention).value;
    let amax = alpha0.abs().max(alpha1.abs());
    let sum = alpha0 + alpha1;
    let t1 = (1.0 + cp) * amax - cp * sum;
    let t2 = 2.0 * amax - sum;
    let threshold = t1.max(t2);
    let mut details = detail(&[
        ("reynolds", r2),
        ("poincare", cp),
        ("threshold_poincare", t1),
        ("threshold_h", t2),
    ]);
    if mu <= threshold {
        return Ok(CriterionResult {
            verdict: Verdict::Unknown,
            criterion_id: CriterionId::II_iv,
            margin: mu - threshold,
            details,
        });
    }
    let h = 1.0 - t2 / mu;
    let lhs = r2 / h.sqrt();
    details.insert("h".into(), h);
    details.insert("lhs".into(), lhs);
    Ok(CriterionResult {
        verdict: if lhs < TWO_SQRT_2 { Verdict::ProvenStable } else { Verdict::Unknown },
        criterion_id: CriterionId::II_iv,
        margin: TWO_SQRT_2 - lhs,
        details,
    })
}

/// Dispatches on the case.
pub fn check(config: &FlowConfig, convention: PoincareConvention) -> Result<CriterionResult> {
    match config.slip {
        SlipBoundary::CaseI { .. } => check_case1(config),
        SlipBoundary::CaseII { .. } => check_case2(config, convention),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delta0_root() {
        let d = delta0();
        assert!((2.0 * d.powi(3) + d - 1.0).abs() < 1e-12);
        assert!((d - 0.589755).abs() < 1e-6);
        let p = |x: f64| 2.0 * x.powi(3) + x - 1.0;
        assert!(p(0.5) < 0.0 && p(0.7) > 0.0);
    }

    #[test]
    fn bound_examples() {
        assert!((bound_min_f(1.0).unwrap() - 2.828427).abs() < 1e-6);
        assert!((bound_min_f(0.7).unwrap() - 2.366432).abs() < 1e-6);
        assert_eq!(bound_min_f(0.0), Err(Error::NonpositiveH(0.0)));
        assert!(bound_min_f(-1.0).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn poincare_values() {
        assert!((poincare_constant(PoincareConvention::NormForm).value - 0.3183099).abs() < 1e-7);
        assert!((poincare_constant(PoincareConvention::SquaredForm).value - 0.1013212).abs() < 1e-7);
    }

    #[test]
    fn case1_examples() {
        let r = check_case1(&FlowConfig::case_i(0.1, 1.0, 5.0, -3.0)).unwrap();
        assert_eq!((r.verdict, r.criterion_id), (Verdict::ProvenStable, CriterionId::I_i));
        assert_eq!(r.margin, f64::INFINITY);

        let r = check_case1(&FlowConfig::case_i(1.0, -0.1, 1.0, 0.0)).unwrap();
        assert_eq!((r.verdict, r.criterion_id), (Verdict::ProvenStable, CriterionId::I_ii));
        let lhs = r.details["lhs"];
        assert!((lhs - (1.0 / 9.0) / 0.7f64.sqrt()).abs() < 1e-14, "{lhs}");
        assert!((r.margin - (TWO_SQRT_2 - lhs)).abs() < 1e-15);

        let r = check_case1(&FlowConfig::case_i(1.0, -0.5, 1.0, 0.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Unknown);
        assert!(r.margin < 0.0);
    }

    #[test]
    fn case1_large_shear_unknown() {
        let r = check_case1(&FlowConfig::case_i(1.0, -0.1, 40.0, 0.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Unknown);
        assert!(r.margin < 0.0);
    }

    #[test]
    fn case2_examples() {
        let r = check_case2(&FlowConfig::case_ii(0.3, 0.0, 0.0, 0.0, 0.0), PoincareConvention::NormForm).unwrap();
        assert_eq!((r.verdict, r.criterion_id), (Verdict::ProvenStable, CriterionId::II_iii));

        let r = check_case2(&FlowConfig::case_ii(1.0, -0.05, 0.1, 1.0, 0.0), PoincareConvention::NormForm).unwrap();
        assert_eq!((r.verdict, r.criterion_id), (Verdict::ProvenStable, CriterionId::II_iv));
        assert!((r.details["threshold_poincare"] - 0.11592).abs() < 1e-5);
        assert!((r.details["threshold_h"] - 0.15).abs() < 1e-12);
        assert!((r.details["lhs"] - 0.12052).abs() < 1e-5);

        let r = check_case2(&FlowConfig::case_ii(1.0, -2.0, 0.0, 1.0, 0.0), PoincareConvention::NormForm).unwrap();
        assert_eq!(r.verdict, Verdict::Unknown);
        assert!((r.margin - (1.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn wrong_case_rejected() {
        assert!(check_case1(&FlowConfig::case_ii(1.0, 0.1, 0.1, 1.0, 0.0)).is_err());
        assert!(check_case2(&FlowConfig::case_i(1.0, 0.1, 1.0, 0.0), PoincareConvention::NormForm).is_err());
    }

    #[test]
    fn family_minimum_at_delta_one() {
        for h in [0.25, 0.5, 1.0] {
            let k = (h / 2.0f64).sqrt();
            assert!((f_family(k, h, 1.0) - bound_min_f(h).unwrap()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn branches_meet_at_breakpoint(delta in 0.59f64..0.999, h in 0.01f64..1.0) {
            let d = delta.max(delta0() + 1e-9);
            let k = f_breakpoint(d);
            let cubic = h + TWO_SQRT_2 * k.powi(3) * (1.0 - d).sqrt();
            let quad = h + 2.0 * k * k * d;
            prop_assert!((cubic - quad).abs() <= 1e-10 * quad);
        }

        #[test]
        fn case1_monotone_in_mu(alpha in -0.5f64..-0.01, jump in 0.0f64..5.0, mu in 0.01f64..3.0, dmu in 0.0f64..2.0) {
            let lo = check_case1(&FlowConfig::case_i(mu, alpha, jump, 0.0));
            let hi = check_case1(&FlowConfig::case_i(mu + dmu, alpha, jump, 0.0));
            if let (Ok(lo), Ok(hi)) = (lo, hi) {
                prop_assert!(!(lo.is_proven() && !hi.is_proven()));
            }
        }

        #[test]
        fn unknown_has_nonpositive_margin(alpha in -1.0f64..1.0, mu in 0.01f64..3.0, jump in -10.0f64..10.0) {
            if let Ok(r) = check_case1(&FlowConfig::case_i(mu, alpha, jump, 0.0)) {
                prop_assert_eq!(r.verdict == Verdict::Unknown, r.margin <= 0.0);
            }
        }
    }
}
