//! Parameter sweeps that combine the closed-form criteria with the
//! eigensolver into stability maps.
//!
//! The bottom wall is held at rest (`b = 0`, `a = a_minus_b`); only the wall
//! speed difference matters for stability.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::criteria::{check, CriterionResult, PoincareConvention};
use crate::eigen::{spectral_abscissa_with, AbscissaReport, Execution, SolverSettings, DEFAULT_FILTER_TOL};
use crate::error::{Error, Result};
use crate::operators::K0Projection;
use crate::params::{Case, FlowConfig};

pub const DEFAULT_BUDGET: usize = 100_000;
pub const MAX_AXES: usize = 3;
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Mu,
    Alpha,
    Alpha0,
    Alpha1,
    AMinusB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    /// `count` equispaced values, both endpoints included exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == last {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

/// Values of the parameters not swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedParams {
    pub mu: f64,
    pub alpha: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub a_minus_b: f64,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            mu: 1.0,
            alpha: 0.0,
            alpha0: 0.0,
            alpha1: 0.0,
            a_minus_b: 1.0,
        }
    }
}

fn default_kmax() -> i64 {
    crate::eigen::DEFAULT_KMAX
}

fn default_nodes() -> usize {
    crate::eigen::DEFAULT_NODES
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_filter_tol() -> f64 {
    DEFAULT_FILTER_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub case: Case,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: FixedParams,
    #[serde(default = "default_kmax")]
    pub kmax: i64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub poincare: PoincareConvention,
    #[serde(default = "default_filter_tol")]
    pub filter_tol: f64,
    #[serde(default)]
    pub k0_projection: K0Projection,
}

impl SweepGrid {
    pub fn new(case: Case, axes: Vec<Axis>) -> Self {
        Self {
            case,
            axes,
            fixed: FixedParams::default(),
            kmax: default_kmax(),
            nodes: default_nodes(),
            budget: DEFAULT_BUDGET,
            poincare: PoincareConvention::default(),
            filter_tol: DEFAULT_FILTER_TOL,
            k0_projection: K0Projection::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGrid(msg));
        if self.axes.is_empty() || self.axes.len() > MAX_AXES {
            return bad(format!("need 1 to {MAX_AXES} axes, got {}", self.axes.len()));
        }
        for (i, axis) in self.axes.iter().enumerate() {
            if axis.count < 2 {
                return bad(format!("axis {:?} needs at least 2 points", axis.name));
            }
            if !axis.start.is_finite() || !axis.stop.is_finite() {
                return bad(format!("axis {:?} has a non-finite range", axis.name));
            }
            if self.axes[..i].iter().any(|a| a.name == axis.name) {
                return bad(format!("axis {:?} appears twice", axis.name));
            }
            let misplaced = matches!(
                (self.case, axis.name),
                (Case::CaseI, AxisName::Alpha0 | AxisName::Alpha1) | (Case::CaseII, AxisName::Alpha)
            );
            if misplaced {
                return bad(format!("axis {:?} does not apply to case {:?}", axis.name, self.case));
            }
        }
        let total = self
            .axes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.count))
            .unwrap_or(usize::MAX);
        if total > self.budget {
            return bad(format!("{total} points exceed the budget of {}", self.budget));
        }
        if self.kmax < 1 {
            return bad(format!("kmax must be at least 1, got {}", self.kmax));
        }
        if self.nodes < crate::cheb::MIN_NODES {
            return bad(format!("nodes must be at least {}, got {}", crate::cheb::MIN_NODES, self.nodes));
        }
        if !(self.filter_tol > 0.0) {
            return bad(format!("filter_tol must be positive, got {}", self.filter_tol));
        }
        Ok(())
    }

    /// Grid points in row-major order: the first axis varies slowest.
    pub fn points(&self) -> Vec<SweepPoint> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let total = self.len();
        (0..total)
            .map(|index| {
                let mut p = SweepPoint::from_fixed(self.case, &self.fixed);
                let mut rem = index;
                for (axis, vals) in self.axes.iter().zip(&values).rev() {
                    p.set(axis.name, vals[rem % axis.count]);
                    rem /= axis.count;
                }
                p
            })
            .collect()
    }

    fn solver_settings(&self, execution: Execution) -> SolverSettings {
        SolverSettings {
            nodes: self.nodes,
            kmax: self.kmax,
            filter_tol: self.filter_tol,
            k0_projection: self.k0_projection,
            execution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub case: Case,
    pub mu: f64,
    /// `alpha` in Case I, `alpha0` in Case II.
    pub alpha0: f64,
    /// Unused in Case I.
    pub alpha1: f64,
    pub a_minus_b: f64,
}

impl SweepPoint {
    fn from_fixed(case: Case, f: &FixedParams) -> Self {
        let alpha0 = match case {
            Case::CaseI => f.alpha,
            Case::CaseII => f.alpha0,
        };
        Self {
            case,
            mu: f.mu,
            alpha0,
            alpha1: f.alpha1,
            a_minus_b: f.a_minus_b,
        }
    }

    fn set(&mut self, name: AxisName, v: f64) {
        match name {
            AxisName::Mu => self.mu = v,
            AxisName::Alpha | AxisName::Alpha0 => self.alpha0 = v,
            AxisName::Alpha1 => self.alpha1 = v,
            AxisName::AMinusB => self.a_minus_b = v,
        }
    }

    pub fn config(&self) -> FlowConfig {
        match self.case {
            Case::CaseI => FlowConfig::case_i(self.mu, self.alpha0, self.a_minus_b, 0.0),
            Case::CaseII => FlowConfig::case_ii(self.mu, self.alpha0, self.alpha1, self.a_minus_b, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    CriteriaOnly,
    Full,
    EigenOnUnknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    ProvenStable,
    NumericallyStable,
    NumericallyUnstable,
    /// Criteria inconclusive and no spectrum computed.
    Undetermined,
    Error,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::ProvenStable => "ProvenStable",
            Classification::NumericallyStable => "NumericallyStable",
            Classification::NumericallyUnstable => "NumericallyUnstable",
            Classification::Undetermined => "Undetermined",
            Classification::Error => "Error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: usize,
    pub point: SweepPoint,
    pub criterion: Option<CriterionResult>,
    pub abscissa: Option<AbscissaReport>,
    pub classification: Classification,
    /// A proven-stable point whose computed abscissa is not negative.
    pub soundness_violation: bool,
    pub error: Option<String>,
}

fn evaluate(index: usize, point: SweepPoint, grid: &SweepGrid, policy: Policy, settings: &SolverSettings) -> SweepRecord {
    let mut record = SweepRecord {
        index,
        point,
        criterion: None,
        abscissa: None,
        classification: Classification::Error,
        soundness_violation: false,
        error: None,
    };
    let config = point.config();
    let criterion = match check(&config, grid.poincare) {
        Ok(c) => c,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let proven = criterion.is_proven();
    record.criterion = Some(criterion);
    let want_eigen = match policy {
        Policy::CriteriaOnly => false,
        Policy::Full => true,
        Policy::EigenOnUnknown => !proven,
    };
    if want_eigen {
        match spectral_abscissa_with(&config, settings) {
            Ok(report) => {
                record.soundness_violation = proven && report.m >= 0.0;
                record.abscissa = Some(report);
            }
            Err(e) => {
                record.error = Some(e.to_string());
                return record;
            }
        }
    }
    record.classification = match (&record.abscissa, proven) {
        (_, true) => Classification::ProvenStable,
        (Some(r), false) if r.m < 0.0 => Classification::NumericallyStable,
        (Some(_), false) => Classification::NumericallyUnstable,
        (None, false) => Classification::Undetermined,
    };
    record
}

/// Evaluates every grid point. `workers = Some(1)` runs serially; other
/// values use a dedicated pool of that size, `None` the global pool.
/// Without the `parallel` feature every run is serial.
pub fn run_sweep(grid: &SweepGrid, policy: Policy, workers: Option<usize>) -> Result<Vec<SweepRecord>> {
    grid.validate()?;
    let points = grid.points();
    let serial = workers == Some(1) || !cfg!(feature = "parallel");
    let execution = if serial { Execution::Serial } else { Execution::Parallel };
    let settings = grid.solver_settings(execution);
    let eval = |(i, p): (usize, &SweepPoint)| evaluate(i, *p, grid, policy, &settings);

    if serial {
        return Ok(points.iter().enumerate().map(eval).collect());
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || points.par_iter().enumerate().map(eval).collect::<Vec<_>>();
        match workers {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Ok(pool.install(run))
            }
            None => Ok(run()),
        }
    }
    #[cfg(not(feature = "parallel"))]
    unreachable!()
}

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the stability map; reals carry 17 significant digits.
pub fn write_csv<W: Write>(records: &[SweepRecord], case: Case, out: W) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let header: &[&str] = match case {
        Case::CaseI => &["mu", "alpha", "a_minus_b", "classification", "abscissa", "margin", "criterion"],
        Case::CaseII => &["mu", "alpha0", "alpha1", "a_minus_b", "classification", "abscissa", "margin", "criterion"],
    };
    w.write_record(header).map_err(ser)?;
    for r in records {
        let p = &r.point;
        let mut row = vec![fmt_real(p.mu), fmt_real(p.alpha0)];
        if case == Case::CaseII {
            row.push(fmt_real(p.alpha1));
        }
        row.push(fmt_real(p.a_minus_b));
        row.push(r.classification.as_str().into());
        row.push(r.abscissa.as_ref().map_or(String::new(), |a| fmt_real(a.m)));
        row.push(r.criterion.as_ref().map_or(String::new(), |c| fmt_real(c.margin)));
        row.push(r.criterion.as_ref().map_or(String::new(), |c| c.criterion_id.as_str().into()));
        w.write_record(&row).map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    schema: u32,
    grid: &'a SweepGrid,
    policy: Policy,
    records: &'a [SweepRecord],
}

/// Schema-versioned JSON document of a sweep.
pub fn to_json(grid: &SweepGrid, policy: Policy, records: &[SweepRecord]) -> Result<String> {
    serde_json::to_string_pretty(&SweepDocument {
        schema: SCHEMA_VERSION,
        grid,
        policy,
        records,
    })
    .map_err(|e| Error::Serialization(e.to_string()))
}
