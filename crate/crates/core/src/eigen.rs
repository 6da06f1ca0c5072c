//! Dense eigensolves per wavenumber, resolution-based filtering and the
//! spectral abscissa scan.

use ndarray::Axis;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::cheb::{make_grid, ChebGrid};
use crate::error::{Error, Result};
use crate::linalg::{eig, eigvals, CVector};
use crate::operators::{assemble_k0_with, assemble_os, K0Projection, ModeProblem};
use crate::params::FlowConfig;

/// Eigenvalues with modulus above this are treated as infinite.
pub const MAGNITUDE_CUTOFF: f64 = 1e8;
/// Absolute floor of the partner-matching tolerance.
pub const MATCH_FLOOR: f64 = 1e-8;
pub const DEFAULT_FILTER_TOL: f64 = 1e-6;
pub const DEFAULT_KMAX: i64 = 16;
pub const DEFAULT_NODES: usize = 96;

/// How independent wavenumbers are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Serial,
    /// Uses the rayon pool when the `parallel` feature is enabled, and runs
    /// serially otherwise.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub nodes: usize,
    pub kmax: i64,
    pub filter_tol: f64,
    pub k0_projection: K0Projection,
    pub execution: Execution,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            kmax: DEFAULT_KMAX,
            filter_tol: DEFAULT_FILTER_TOL,
            k0_projection: K0Projection::Auto,
            execution: Execution::Parallel,
        }
    }
}

impl SolverSettings {
    pub fn with_nodes(nodes: usize, kmax: i64) -> Self {
        Self {
            nodes,
            kmax,
            ..Self::default()
        }
    }

    /// Refined resolution used to confirm eigenvalues.
    pub fn refined_nodes(&self) -> usize {
        refined(self.nodes)
    }
}

pub fn refined(n: usize) -> usize {
    (3 * n).div_ceil(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub k: i64,
    pub eigenvalues: Vec<Complex64>,
    /// Nodal samples of each eigenfunction, in eigenvalue order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenfunctions: Option<Vec<CVector>>,
    pub resolution: usize,
    pub converged: Vec<bool>,
}

impl ModeSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest real part, if any eigenvalue is present.
    pub fn max_real(&self) -> Option<f64> {
        self.eigenvalues.first().map(|l| l.re)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbscissaReport {
    pub m: f64,
    pub argmax_k: i64,
    pub per_k: Vec<(i64, f64)>,
}

/// Descending real part, ties by ascending imaginary part.
fn spectral_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im))
}

/// Scales to `max|φ| = 1` with zero phase at the first non-negligible entry.
fn normalize(phi: &mut CVector) {
    let peak = phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    let first = phi
        .iter()
        .find(|v| v.norm() > 1e-8 * peak)
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let rot = first.conj() / first.norm();
    phi.mapv_inplace(|v| v * rot / peak);
}

/// All finite eigenvalues of one mode problem, sorted, with `converged`
/// set for entries below [`MAGNITUDE_CUTOFF`]. Convergence under refinement
/// is established separately by [`filter_spurious`].
pub fn solve_mode<P: ModeProblem + ?Sized>(op: &P, want_vectors: bool) -> Result<ModeSpectrum> {
    let k = op.wavenumber();
    let reduced = op.reduce()?;
    let failure = |reason: String| Error::SolverFailure { k, reason };

    let (values, vectors) = if want_vectors {
        let (vals, vecs) = eig(&reduced.matrix).map_err(failure)?;
        let lifted = reduced.lift.dot(&vecs);
        let cols: Vec<CVector> = lifted.axis_iter(Axis(1)).map(|c| c.to_owned()).collect();
        (vals, Some(cols))
    } else {
        (eigvals(&reduced.matrix).map_err(failure)?, None)
    };

    let mut order: Vec<usize> = (0..values.len())
        .filter(|&i| values[i].is_finite())
        .collect();
    if order.len() < values.len() {
        return Err(failure("non-finite eigenvalue".into()));
    }
    order.sort_by(|&i, &j| spectral_order(&values[i], &values[j]));

    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
    let converged = eigenvalues.iter().map(|l| l.norm() <= MAGNITUDE_CUTOFF).collect();
    let eigenfunctions = vectors.map(|cols| {
        order
            .iter()
            .map(|&i| {
                let mut phi = cols[i].clone();
                normalize(&mut phi);
                phi
            })
            .collect()
    });

    Ok(ModeSpectrum {
        k,
        eigenvalues,
        eigenfunctions,
        resolution: reduced.nodes(),
        converged,
    })
}

/// Keeps the eigenvalues of `spec_n` that have a partner in `spec_m` within
/// `max(tol·|λ|, 1e−8)` and are below the magnitude cutoff.
pub fn filter_spurious(spec_n: &ModeSpectrum, spec_m: &ModeSpectrum, tol: f64) -> ModeSpectrum {
    let keep: Vec<usize> = (0..spec_n.len())
        .filter(|&i| {
            let l = spec_n.eigenvalues[i];
            if l.norm() > MAGNITUDE_CUTOFF {
                return false;
            }
            let radius = (tol * l.norm()).max(MATCH_FLOOR);
            spec_m.eigenvalues.iter().any(|p| (p - l).norm() <= radius)
        })
        .collect();
    ModeSpectrum {
        k: spec_n.k,
        eigenvalues: keep.iter().map(|&i| spec_n.eigenvalues[i]).collect(),
        eigenfunctions: spec_n
            .eigenfunctions
            .as_ref()
            .map(|f| keep.iter().map(|&i| f[i].clone()).collect()),
        resolution: spec_n.resolution,
        converged: vec![true; keep.len()],
    }
}

/// Grids at `N` and the refined resolution, shared by every wavenumber.
#[derive(Debug, Clone)]
pub struct GridPair {
    pub coarse: ChebGrid,
    pub fine: ChebGrid,
}

impl GridPair {
    pub fn new(nodes: usize) -> Result<Self> {
        Ok(Self {
            coarse: make_grid(nodes)?,
            fine: make_grid(refined(nodes))?,
        })
    }
}

fn solve_on(
    config: &FlowConfig,
    k: i64,
    grid: &ChebGrid,
    projection: K0Projection,
    want_vectors: bool,
) -> Result<ModeSpectrum> {
    if k == 0 {
        solve_mode(&assemble_k0_with(config, grid, projection)?, want_vectors)
    } else {
        solve_mode(&assemble_os(config, k, grid)?, want_vectors)
    }
}

/// Resolution-confirmed spectrum of one wavenumber.
pub fn resolved_spectrum(
    config: &FlowConfig,
    k: i64,
    grids: &GridPair,
    settings: &SolverSettings,
    want_vectors: bool,
) -> Result<ModeSpectrum> {
    let coarse = solve_on(config, k, &grids.coarse, settings.k0_projection, want_vectors)?;
    let fine = solve_on(config, k, &grids.fine, settings.k0_projection, false)?;
    Ok(filter_spurious(&coarse, &fine, settings.filter_tol))
}

/// Runs `f` over `0..=kmax` in order, serially or on the rayon pool.
pub(crate) fn map_wavenumbers<T, F>(kmax: i64, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(i64) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..=kmax).into_par_iter().map(f).collect()
        }
        _ => (0..=kmax).map(f).collect(),
    }
}

pub fn spectral_abscissa(config: &FlowConfig, kmax: i64, nodes: usize) -> Result<AbscissaReport> {
    spectral_abscissa_with(config, &SolverSettings::with_nodes(nodes, kmax))
}

/// Scans `k = 0..=kmax`; negative wavenumbers mirror positive ones.
pub fn spectral_abscissa_with(config: &FlowConfig, settings: &SolverSettings) -> Result<AbscissaReport> {
    if settings.kmax < 1 {
        return Err(Error::InvalidParameter(format!(
            "kmax must be at least 1, got {}",
            settings.kmax
        )));
    }
    config.validate()?;
    let grids = GridPair::new(settings.nodes)?;
    let results = map_wavenumbers(settings.kmax, settings.execution, |k| {
        let spec = resolved_spectrum(config, k, &grids, settings, false)?;
        spec.max_real()
            .map(|m| (k, m))
            .ok_or(Error::NoResolvedModes { k })
    });
    let per_k = results.into_iter().collect::<Result<Vec<_>>>()?;
    let (argmax_k, m) = per_k
        .iter()
        .copied()
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(AbscissaReport { m, argmax_k, per_k })
}
