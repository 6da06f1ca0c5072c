//! Spectral stability analysis of plane Couette flow with Navier slip walls.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheb;
pub mod criteria;
pub mod eigen;
pub mod energy;
pub mod error;
pub mod evolve;
pub mod green;
pub mod linalg;
pub mod operators;
pub mod params;
pub mod sweep;

pub use cheb::{make_grid, ChebGrid};
pub use error::{Error, Result};
pub use operators::{assemble_k0, assemble_k0_with, assemble_os, K0Projection, ModeProblem};
pub use params::{build_profile, effective_reynolds, Case, CouetteProfile, FlowConfig, SlipBoundary};
pub use eigen::{
    filter_spurious, solve_mode, spectral_abscissa, spectral_abscissa_with, AbscissaReport, Execution,
    ModeSpectrum, SolverSettings,
};
pub use criteria::{check_case1, check_case2, CriterionId, CriterionResult, PoincareConvention, Verdict};
