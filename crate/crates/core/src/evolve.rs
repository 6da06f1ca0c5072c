//! Linear time integration of a single mode and decay-rate fitting.
//!
//! The boundary-reduced system `v' = X v` is advanced with the two-stage
//! L-stable SDIRK scheme (`γ = 1 − √2/2`). Because `X` is constant, the
//! step is a fixed matrix `S` computed once.

use ndarray::ArrayView1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cheb::ChebGrid;
use crate::error::{Error, Result};
use crate::linalg::{solve_matrix, CMatrix, CVector};
use crate::operators::ModeProblem;

/// Minimum number of samples inside the fit window.
pub const MIN_FIT_SAMPLES: usize = 50;
/// Leading fraction of the horizon excluded from the fit.
pub const TRANSIENT_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyHistory {
    pub times: Vec<f64>,
    /// `∫|φ|²`, a squared norm.
    pub energy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Minus the least-squares slope of `ln E(t)`; positive for decay.
    pub rate: f64,
    pub r2: f64,
    pub history: EnergyHistory,
}

fn step_matrix(x: &CMatrix, dt: f64) -> Result<CMatrix> {
    let n = x.nrows();
    let gamma = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let eye = CMatrix::from_diag_elem(n, Complex64::new(1.0, 0.0));
    let implicit = &eye - &(x * Complex64::new(gamma * dt, 0.0));
    let solve = |rhs: &CMatrix| {
        solve_matrix(&implicit, rhs).map_err(|_| Error::SingularStep)
    };
    // stage slopes as linear maps of v
    let k1 = solve(x)?;
    let k2 = solve(&x.dot(&(&eye + &(&k1 * Complex64::new((1.0 - gamma) * dt, 0.0)))))?;
    let update = &k1 * Complex64::new((1.0 - gamma) * dt, 0.0) + &k2 * Complex64::new(gamma * dt, 0.0);
    Ok(eye + update)
}

/// Integrates from `φ0` up to `T`, recording `∫|φ|²` after every step.
/// Boundary values of `φ0` are discarded and rebuilt from the interior.
pub fn evolve_mode<P: ModeProblem + ?Sized>(
    op: &P,
    grid: &ChebGrid,
    phi0: ArrayView1<Complex64>,
    dt: f64,
    t_end: f64,
) -> Result<EnergyHistory> {
    if !(dt > 0.0) || !(t_end >= 100.0 * dt) {
        return Err(Error::InvalidParameter(format!(
            "need dt > 0 and T >= 100 dt, got dt = {dt}, T = {t_end}"
        )));
    }
    if phi0.len() != grid.len() || op.nodes() != grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            got: phi0.len(),
        });
    }
    let reduced = op.reduce()?;
    let s = step_matrix(&reduced.matrix, dt)?;
    let weights = grid.weights();
    let energy_of = |v: &CVector| -> f64 {
        let phi = reduced.lift.dot(v);
        phi.iter().zip(weights.iter()).map(|(z, w)| z.norm_sqr() * w).sum()
    };

    let steps = (t_end / dt).round() as usize;
    let mut v = reduced.restrict.dot(&phi0);
    let mut times = Vec::with_capacity(steps + 1);
    let mut energy = Vec::with_capacity(steps + 1);
    times.push(0.0);
    energy.push(energy_of(&v));
    for i in 1..=steps {
        v = s.dot(&v);
        times.push(i as f64 * dt);
        energy.push(energy_of(&v));
    }
    Ok(EnergyHistory { times, energy })
}

/// Least-squares fit of `ln E` against `t` over `[0.2T, T]`.
pub fn fit_decay(history: &EnergyHistory) -> Result<DecayFit> {
    let t_end = history.times.last().copied().unwrap_or(0.0);
    let start = TRANSIENT_FRACTION * t_end;
    let window: Vec<(f64, f64)> = history
        .times
        .iter()
        .zip(&history.energy)
        .filter(|(&t, _)| t >= start)
        .map(|(&t, &e)| (t, e))
        .collect();
    if window.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            min: MIN_FIT_SAMPLES,
            got: window.len(),
        });
    }
    if let Some(&(t, _)) = window.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(Error::NonPositiveEnergy(t));
    }

    let n = window.len() as f64;
    let xs: Vec<f64> = window.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { slope * sxy / syy };
    Ok(DecayFit {
        rate: -slope,
        r2,
        history: history.clone(),
    })
}
