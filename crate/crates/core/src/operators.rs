//! Per-wavenumber discrete operators.
//!
//! For `k ≠ 0` the wall-normal velocity `φ` solves the generalized problem
//! `A φ = λ B φ` with
//!
//! ```text
//! A = μ(D² − k²)² − ik U(y)(D² − k²),    B = D² − k²,
//! ```
//!
//! where four rows of `A` are replaced by boundary conditions and the same
//! rows of `B` are zeroed. For `k = 0` the streamwise velocity solves
//! `λ u = μ u''` with two boundary rows.
//!
//! [`ModeProblem::reduce`] eliminates the boundary unknowns against the
//! interior ones, which turns either pencil into a standard eigenproblem
//! with no infinite eigenvalues.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cheb::ChebGrid;
use crate::error::{Error, Result};
use crate::linalg::{solve_matrix, CMatrix};
use crate::params::{build_profile, Case, CouetteProfile, FlowConfig, SlipBoundary};

/// Treatment of the constant (mean-flow) direction at `k = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum K0Projection {
    /// Project onto zero-mean functions only in Case II with
    /// `α₀ = α₁ = 0`, where constants are an exact neutral mode.
    #[default]
    Auto,
    /// Project every Case II `k = 0` operator onto zero-mean functions.
    Always,
    Never,
}

/// Orr–Sommerfeld pencil for one nonzero wavenumber.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub k: i64,
    pub case: Case,
    pub profile: CouetteProfile,
    pub a_mat: CMatrix,
    pub b_mat: CMatrix,
    pub bc_rows: [usize; 4],
}

/// `k = 0` operator `μ∂²_y` with two boundary rows.
#[derive(Debug, Clone)]
pub struct K0Operator {
    pub case: Case,
    pub m: CMatrix,
    pub bc_rows: [usize; 2],
    /// Whether the zero-mean projection is applied during reduction.
    pub zero_mean: bool,
    weights: Array1<f64>,
}

/// Standard-form operator on the interior unknowns.
///
/// `lift` maps reduced coordinates to nodal values satisfying the boundary
/// rows; `restrict` maps nodal values back (boundary values are discarded).
#[derive(Debug, Clone)]
pub struct ReducedOperator {
    pub matrix: CMatrix,
    pub lift: CMatrix,
    pub restrict: CMatrix,
}

impl ReducedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn nodes(&self) -> usize {
        self.lift.nrows()
    }
}

/// Anything that reduces to a standard eigenproblem for one wavenumber.
pub trait ModeProblem {
    fn wavenumber(&self) -> i64;
    fn nodes(&self) -> usize;
    fn reduce(&self) -> Result<ReducedOperator>;
}

pub fn assemble_os(config: &FlowConfig, k: i64, grid: &ChebGrid) -> Result<ModeOperator> {
    if k == 0 {
        return Err(Error::ZeroWavenumber);
    }
    let profile = build_profile(config)?;
    let n = grid.len();
    let kf = k as f64;
    let k2 = kf * kf;
    let (d1, d2, d4) = (grid.diff(1), grid.diff(2), grid.diff(4));
    let y = grid.nodes();
    let mu = config.mu;
    let ik = Complex64::new(0.0, kf);

    let mut a = CMatrix::zeros((n, n));
    let mut b = CMatrix::zeros((n, n));
    for i in 0..n {
        let u = profile.velocity(y[i]);
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let lap = d2[[i, j]] - k2 * delta;
            let bih = d4[[i, j]] - 2.0 * k2 * d2[[i, j]] + k2 * k2 * delta;
            a[[i, j]] = Complex64::new(mu * bih, 0.0) - ik * u * lap;
            b[[i, j]] = Complex64::new(lap, 0.0);
        }
    }

    let last = n - 1;
    let bc_rows = [0, 1, n - 2, last];
    let unit = |idx: usize| Array1::from_shape_fn(n, |j| if j == idx { 1.0 } else { 0.0 });
    let (ratio0, ratio1) = config.slip_ratios();
    let row_wall0 = unit(0);
    let row_wall1 = unit(last);
    // φ''(0) = (α/μ) φ'(0) in both cases
    let row_slip0 = &d2.row(0) - &(&d1.row(0) * ratio0);
    let row_top = match ratio1 {
        // no-slip top wall: φ'(1) = 0
        None => d1.row(last).to_owned(),
        // φ''(1) = −(α₁/μ) φ'(1)
        Some(r1) => &d2.row(last) + &(&d1.row(last) * r1),
    };
    for (row, values) in bc_rows.iter().zip([row_wall0, row_slip0, row_top, row_wall1]) {
        a.row_mut(*row).assign(&values.mapv(|v| Complex64::new(v, 0.0)));
        b.row_mut(*row).fill(Complex64::new(0.0, 0.0));
    }

    Ok(ModeOperator {
        k,
        case: config.case(),
        profile,
        a_mat: a,
        b_mat: b,
        bc_rows,
    })
}

pub fn assemble_k0(config: &FlowConfig, grid: &ChebGrid) -> Result<K0Operator> {
    assemble_k0_with(config, grid, K0Projection::Auto)
}

pub fn assemble_k0_with(
    config: &FlowConfig,
    grid: &ChebGrid,
    projection: K0Projection,
) -> Result<K0Operator> {
    config.validate()?;
    let n = grid.len();
    let last = n - 1;
    let mu = config.mu;
    let d1 = grid.diff(1);
    let mut m = grid.diff(2).mapv(|v| Complex64::new(mu * v, 0.0));

    // μu'(0) − α₀u(0) = 0 at the bottom wall in both cases
    let alpha_bottom = match config.slip {
        SlipBoundary::CaseI { alpha } => alpha,
        SlipBoundary::CaseII { alpha0, .. } => alpha0,
    };
    let mut bottom = d1.row(0).mapv(|v| mu * v);
    bottom[0] -= alpha_bottom;
    let top = match config.slip {
        SlipBoundary::CaseI { .. } => Array1::from_shape_fn(n, |j| if j == last { 1.0 } else { 0.0 }),
        SlipBoundary::CaseII { alpha1, .. } => {
            let mut r = d1.row(last).mapv(|v| mu * v);
            r[last] += alpha1;
            r
        }
    };
    m.row_mut(0).assign(&bottom.mapv(|v| Complex64::new(v, 0.0)));
    m.row_mut(last).assign(&top.mapv(|v| Complex64::new(v, 0.0)));

    let zero_mean = match (config.slip, projection) {
        (SlipBoundary::CaseI { .. }, _) | (_, K0Projection::Never) => false,
        (SlipBoundary::CaseII { .. }, K0Projection::Always) => true,
        (SlipBoundary::CaseII { alpha0, alpha1 }, K0Projection::Auto) => alpha0 == 0.0 && alpha1 == 0.0,
    };

    Ok(K0Operator {
        case: config.case(),
        m,
        bc_rows: [0, last],
        zero_mean,
        weights: grid.weights().clone(),
    })
}

impl ModeProblem for ModeOperator {
    fn wavenumber(&self) -> i64 {
        self.k
    }

    fn nodes(&self) -> usize {
        self.a_mat.nrows()
    }

    fn reduce(&self) -> Result<ReducedOperator> {
        let parts = eliminate_boundary(&self.a_mat, &self.bc_rows)?;
        let b_hat = parts.apply(&self.b_mat);
        let matrix = solve_matrix(&b_hat, &parts.a_hat)?;
        Ok(ReducedOperator {
            matrix,
            lift: parts.lift,
            restrict: parts.restrict,
        })
    }
}

impl ModeProblem for K0Operator {
    fn wavenumber(&self) -> i64 {
        0
    }

    fn nodes(&self) -> usize {
        self.m.nrows()
    }

    fn reduce(&self) -> Result<ReducedOperator> {
        let parts = eliminate_boundary(&self.m, &self.bc_rows)?;
        let reduced = ReducedOperator {
            matrix: parts.a_hat,
            lift: parts.lift,
            restrict: parts.restrict,
        };
        if self.zero_mean {
            project_zero_mean(reduced, &self.weights)
        } else {
            Ok(reduced)
        }
    }
}

struct Elimination {
    interior: Vec<usize>,
    boundary: Vec<usize>,
    /// Boundary unknowns as a function of interior unknowns.
    extension: CMatrix,
    a_hat: CMatrix,
    lift: CMatrix,
    restrict: CMatrix,
}

impl Elimination {
    /// Interior rows of `mat` acting on lifted interior unknowns.
    fn apply(&self, mat: &CMatrix) -> CMatrix {
        let ii = select(mat, &self.interior, &self.interior);
        let ib = select(mat, &self.interior, &self.boundary);
        ii + ib.dot(&self.extension)
    }
}

/// Boundary rows double as the boundary unknowns: their columns are solved
/// for in terms of the interior columns.
fn eliminate_boundary(a: &CMatrix, bc_rows: &[usize]) -> Result<Elimination> {
    let n = a.nrows();
    let boundary: Vec<usize> = bc_rows.to_vec();
    let interior: Vec<usize> = (0..n).filter(|i| !boundary.contains(i)).collect();
    let c_b = select(a, &boundary, &boundary);
    let c_i = select(a, &boundary, &interior);
    let extension = -solve_matrix(&c_b, &c_i)?;

    let r = interior.len();
    let mut lift = CMatrix::zeros((n, r));
    let mut restrict = CMatrix::zeros((r, n));
    for (col, &i) in interior.iter().enumerate() {
        lift[[i, col]] = Complex64::new(1.0, 0.0);
        restrict[[col, i]] = Complex64::new(1.0, 0.0);
    }
    for (row, &bidx) in boundary.iter().enumerate() {
        lift.row_mut(bidx).assign(&extension.row(row));
    }

    let mut elim = Elimination {
        interior,
        boundary,
        extension,
        a_hat: CMatrix::zeros((0, 0)),
        lift,
        restrict,
    };
    elim.a_hat = elim.apply(a);
    Ok(elim)
}

fn select(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| m[[rows[i], cols[j]]])
}

/// Restricts the reduced operator to functions with zero mean, projecting
/// along the constant function. When constants are in the kernel, the
/// spectrum of the result is the original spectrum with that zero removed.
fn project_zero_mean(op: ReducedOperator, weights: &Array1<f64>) -> Result<ReducedOperator> {
    let r = op.dim();
    let cw = weights.mapv(|w| Complex64::new(w, 0.0));
    // mean functional in reduced coordinates
    let g: Array1<Complex64> = cw.dot(&op.lift);
    let ones = Array1::from_elem(r, Complex64::new(1.0, 0.0));
    let g_ones: Complex64 = g.sum();
    if g_ones.norm() == 0.0 {
        return Err(Error::SingularMatrix("mean functional vanishes on constants".into()));
    }
    let mut proj = CMatrix::eye(r);
    for i in 0..r {
        for j in 0..r {
            proj[[i, j]] -= ones[i] * g[j] / g_ones;
        }
    }
    // basis of ker g: drop the coordinate with the largest weight
    let pivot = (0..r)
        .max_by(|&i, &j| g[i].norm().total_cmp(&g[j].norm()))
        .unwrap_or(0);
    let keep: Vec<usize> = (0..r).filter(|&i| i != pivot).collect();
    let mut basis = CMatrix::zeros((r, r - 1));
    for (col, &i) in keep.iter().enumerate() {
        basis[[i, col]] = Complex64::new(1.0, 0.0);
        basis[[pivot, col]] = -g[i] / g[pivot];
    }
    let full = proj.dot(&op.matrix).dot(&basis);
    let all: Vec<usize> = (0..full.ncols()).collect();
    let matrix = select(&full, &keep, &all);
    let restrict_full = proj.dot(&op.restrict);
    let nodes: Vec<usize> = (0..restrict_full.ncols()).collect();
    let restrict = select(&restrict_full, &keep, &nodes);
    Ok(ReducedOperator {
        matrix,
        lift: op.lift.dot(&basis),
        restrict,
    })
}

/// Interior block `(D² − k²)` with Dirichlet ends, used for sanity checks.
pub fn dirichlet_laplacian_block(grid: &ChebGrid, k: i64) -> Array2<f64> {
    let n = grid.len();
    let k2 = (k * k) as f64;
    let mut block = grid.diff(2).slice(s![1..n - 1, 1..n - 1]).to_owned();
    for i in 0..n - 2 {
        block[[i, i]] -= k2;
    }
    block
}
