//! Thin wrappers over LAPACK (via `ndarray-linalg`) for dense complex
//! matrices.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, EigVals, Factorize, Solve};
use num_complex::Complex64;
use std::sync::Once;

use crate::error::{Error, Result};

pub type CMatrix = Array2<Complex64>;
pub type CVector = Array1<Complex64>;

extern "C" {
    fn openblas_set_num_threads(num_threads: std::os::raw::c_int);
}

static BLAS_INIT: Once = Once::new();

/// Keeps OpenBLAS single-threaded: parallelism lives in the sweep layer, and
/// a fixed BLAS thread count keeps results bitwise reproducible.
pub fn init_blas() {
    BLAS_INIT.call_once(|| unsafe { openblas_set_num_threads(1) });
}

pub fn to_complex(m: &Array2<f64>) -> CMatrix {
    m.mapv(|v| Complex64::new(v, 0.0))
}

/// Solves `A X = B` for a matrix right-hand side.
pub fn solve_matrix(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    init_blas();
    let lu = a
        .factorize()
        .map_err(|e| Error::SingularMatrix(e.to_string()))?;
    let mut out = CMatrix::zeros((a.nrows(), b.ncols()));
    for (j, col) in b.axis_iter(Axis(1)).enumerate() {
        let x = lu
            .solve(&col.to_owned())
            .map_err(|e| Error::SingularMatrix(e.to_string()))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix("non-finite solution".into()));
        }
        out.column_mut(j).assign(&x);
    }
    Ok(out)
}

pub fn solve_vector(a: &CMatrix, b: &CVector) -> Result<CVector> {
    init_blas();
    let x = a.solve(b).map_err(|e| Error::SingularMatrix(e.to_string()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix("non-finite solution".into()));
    }
    Ok(x)
}

/// Eigenvalues and right eigenvectors (columns) of a square complex matrix.
pub fn eig(a: &CMatrix) -> std::result::Result<(CVector, CMatrix), String> {
    init_blas();
    a.eig().map_err(|e| e.to_string())
}

pub fn eigvals(a: &CMatrix) -> std::result::Result<CVector, String> {
    init_blas();
    a.eigvals().map_err(|e| e.to_string())
}
