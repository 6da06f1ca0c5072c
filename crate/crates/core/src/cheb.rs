//! Chebyshev–Gauss–Lobatto collocation on `[0, 1]`.
//!
//! Nodes are ascending, `y[0] = 0` and `y[N-1] = 1`, so boundary rows sit at
//! the first and last indices.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 8;

/// Nodes, differentiation matrices and quadrature weights.
#[derive(Debug, Clone)]
pub struct ChebGrid {
    n: usize,
    y: Array1<f64>,
    d1: Array2<f64>,
    d2: Array2<f64>,
    d3: Array2<f64>,
    d4: Array2<f64>,
    weights: Array1<f64>,
    bary: Array1<f64>,
    /// Clenshaw–Curtis weights and interpolation matrix on a grid fine
    /// enough to integrate products of two interpolants exactly.
    fine_weights: Array1<f64>,
    fine_nodes: Array1<f64>,
    upsample: Array2<f64>,
}

impl ChebGrid {
    pub fn new(n: usize) -> Result<Self> {
        make_grid(n)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn nodes(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    /// Differentiation matrix of order 1..=4.
    pub fn diff(&self, order: usize) -> &Array2<f64> {
        match order {
            1 => &self.d1,
            2 => &self.d2,
            3 => &self.d3,
            4 => &self.d4,
            _ => panic!("differentiation order {order} not available"),
        }
    }

    /// Applies `D^order` to complex samples.
    pub fn differentiate(&self, f: ArrayView1<Complex64>, order: usize) -> Result<Array1<Complex64>> {
        self.check_len(f.len())?;
        let d = self.diff(order);
        Ok(Array1::from_shape_fn(self.n, |i| {
            d.row(i)
                .iter()
                .zip(f.iter())
                .map(|(&dij, &fj)| fj * dij)
                .sum()
        }))
    }

    /// Clenshaw–Curtis quadrature of sampled values over `[0, 1]`.
    pub fn integrate(&self, f: ArrayView1<Complex64>) -> Result<Complex64> {
        self.check_len(f.len())?;
        Ok(self.weights.iter().zip(f.iter()).map(|(&w, &v)| v * w).sum())
    }

    pub fn integrate_real(&self, f: ArrayView1<f64>) -> Result<f64> {
        self.check_len(f.len())?;
        Ok(self.weights.dot(&f))
    }

    /// `∫ f·conj(g)·(w₀ + w₁y) dy`, exact when `f` and `g` are the grid
    /// interpolants.
    pub fn integrate_product(
        &self,
        f: ArrayView1<Complex64>,
        g: ArrayView1<Complex64>,
        weight: [Complex64; 2],
    ) -> Result<Complex64> {
        self.check_len(f.len())?;
        self.check_len(g.len())?;
        let up = |v: ArrayView1<Complex64>| -> Array1<Complex64> {
            Array1::from_shape_fn(self.fine_nodes.len(), |i| {
                self.upsample.row(i).iter().zip(v.iter()).map(|(&a, &b)| b * a).sum()
            })
        };
        let (uf, ug) = (up(f), up(g));
        Ok((0..uf.len())
            .map(|i| uf[i] * ug[i].conj() * (weight[0] + weight[1] * self.fine_nodes[i]) * self.fine_weights[i])
            .sum())
    }

    /// Barycentric interpolation of the samples at `y`.
    pub fn interpolate(&self, f: ArrayView1<Complex64>, y: f64) -> Result<Complex64> {
        self.check_len(f.len())?;
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::OutOfDomain(y));
        }
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..self.n {
            let diff = y - self.y[j];
            if diff == 0.0 {
                return Ok(f[j]);
            }
            let t = self.bary[j] / diff;
            num += f[j] * t;
            den += t;
        }
        Ok(num / den)
    }

    /// Chebyshev coefficients `a_j` of the interpolant, `f = Σ a_j T_j(1 − 2y)`.
    pub fn coefficients(&self, f: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
        self.check_len(f.len())?;
        let m = self.n - 1;
        let mf = m as f64;
        Ok(Array1::from_shape_fn(self.n, |j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &v) in f.iter().enumerate() {
                let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                acc += v * (w * (PI * (i * j) as f64 / mf).cos());
            }
            let scale = if j == 0 || j == m { 1.0 / mf } else { 2.0 / mf };
            acc * scale
        }))
    }

    /// Largest modulus among the top eighth of Chebyshev coefficients,
    /// relative to the largest coefficient. Small values mean `f` is resolved.
    pub fn tail_ratio(&self, f: ArrayView1<Complex64>) -> Result<f64> {
        let a = self.coefficients(f)?;
        let peak = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(0.0);
        }
        let start = self.n - (self.n / 8).max(2);
        Ok(a.iter().skip(start).map(|z| z.norm()).fold(0.0, f64::max) / peak)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }
}

pub fn make_grid(n: usize) -> Result<ChebGrid> {
    if n < MIN_NODES {
        return Err(Error::TooFewNodes {
            min: MIN_NODES,
            got: n,
        });
    }
    let m = (n - 1) as f64;
    // y_j = sin^2(πj/2m) keeps both endpoints clustered symmetrically
    let theta = |j: usize| PI * j as f64 / (2.0 * m);
    let y = Array1::from_shape_fn(n, |j| theta(j).sin().powi(2));

    let c = |j: usize| if j == 0 || j == n - 1 { 2.0 } else { 1.0 };
    let sign = |j: usize| if j.is_multiple_of(2) { 1.0 } else { -1.0 };

    let mut d1 = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                // y_i - y_j = sin(θi+θj) sin(θi-θj), free of cancellation
                let dy = (theta(i) + theta(j)).sin() * (theta(i) - theta(j)).sin();
                d1[[i, j]] = c(i) / c(j) * sign(i + j) / dy;
            }
        }
    }
    fix_diagonal(&mut d1);
    let d2 = power_with_fixed_diagonal(&d1, &d1);
    let d3 = power_with_fixed_diagonal(&d1, &d2);
    let d4 = power_with_fixed_diagonal(&d1, &d3);

    let weights = clenshaw_curtis(n);
    let bary = Array1::from_shape_fn(n, |j| {
        let w = sign(j);
        if j == 0 || j == n - 1 {
            0.5 * w
        } else {
            w
        }
    });

    let fine_n = 2 * n + 2;
    let fine_nodes = Array1::from_shape_fn(fine_n, |j| {
        (PI * j as f64 / (2.0 * (fine_n - 1) as f64)).sin().powi(2)
    });
    let fine_weights = clenshaw_curtis(fine_n);
    let upsample = interpolation_matrix(&y, &bary, &fine_nodes);

    Ok(ChebGrid {
        n,
        y,
        d1,
        d2,
        d3,
        d4,
        weights,
        bary,
        fine_weights,
        fine_nodes,
        upsample,
    })
}

/// Rows evaluate the barycentric interpolant at each target point.
fn interpolation_matrix(y: &Array1<f64>, bary: &Array1<f64>, targets: &Array1<f64>) -> Array2<f64> {
    let n = y.len();
    let mut m = Array2::<f64>::zeros((targets.len(), n));
    for (i, &x) in targets.iter().enumerate() {
        if let Some(j) = (0..n).find(|&j| (x - y[j]).abs() < 1e-15) {
            m[[i, j]] = 1.0;
            continue;
        }
        let t: Vec<f64> = (0..n).map(|j| bary[j] / (x - y[j])).collect();
        let den: f64 = t.iter().sum();
        for j in 0..n {
            m[[i, j]] = t[j] / den;
        }
    }
    m
}

/// Derivatives of constants vanish: diagonal = minus off-diagonal row sum.
fn fix_diagonal(d: &mut Array2<f64>) {
    let n = d.nrows();
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| d[[i, j]]).sum();
        d[[i, i]] = -off;
    }
}

fn power_with_fixed_diagonal(d1: &Array2<f64>, prev: &Array2<f64>) -> Array2<f64> {
    let mut out = d1.dot(prev);
    fix_diagonal(&mut out);
    out
}

/// Clenshaw–Curtis weights for the Lobatto nodes, scaled to `[0, 1]`.
fn clenshaw_curtis(n: usize) -> Array1<f64> {
    let m = n - 1;
    let mf = m as f64;
    let mut w = Array1::<f64>::zeros(n);
    let theta = |j: usize| PI * j as f64 / mf;
    if m.is_multiple_of(2) {
        w[0] = 1.0 / (mf * mf - 1.0);
        w[m] = w[0];
        for j in 1..m {
            let mut v = 1.0;
            for k in 1..m / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta(j)).cos() / (4.0 * kf * kf - 1.0);
            }
            v -= (mf * theta(j)).cos() / (mf * mf - 1.0);
            w[j] = 2.0 * v / mf;
        }
    } else {
        w[0] = 1.0 / (mf * mf);
        w[m] = w[0];
        for j in 1..m {
            let mut v = 1.0;
            for k in 1..=(m - 1) / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta(j)).cos() / (4.0 * kf * kf - 1.0);
            }
            w[j] = 2.0 * v / mf;
        }
    }
    // weights above are for [-1, 1]; the node order is symmetric
    w.mapv_inplace(|x| 0.5 * x);
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample<F: Fn(f64) -> f64>(g: &ChebGrid, f: F) -> Array1<Complex64> {
        g.nodes().mapv(|y| Complex64::new(f(y), 0.0))
    }

    fn max_err(a: &Array1<Complex64>, b: &Array1<Complex64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn endpoints_and_ordering() {
        let g = make_grid(8).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[7], 1.0);
        assert!(g.nodes().windows(2).into_iter().all(|w| w[0] < w[1]));
        assert!(matches!(make_grid(7), Err(Error::TooFewNodes { .. })));
    }

    #[test]
    fn differentiates_cubic() {
        let g = make_grid(32).unwrap();
        let f = sample(&g, |y| y.powi(3));
        let df = g.differentiate(f.view(), 1).unwrap();
        assert!(max_err(&df, &sample(&g, |y| 3.0 * y * y)) < 1e-11);
    }

    #[test]
    fn monomials_exact_up_to_degree() {
        let n = 16;
        let g = make_grid(n).unwrap();
        for m in 1..=(n - 2) as i32 {
            let f = sample(&g, |y| y.powi(m));
            let exact = sample(&g, |y| m as f64 * y.powi(m - 1));
            let df = g.differentiate(f.view(), 1).unwrap();
            let scale = m as f64;
            assert!(max_err(&df, &exact) / scale < 1e-12, "degree {m}");
        }
    }

    #[test]
    fn second_derivative_consistency() {
        let g = make_grid(24).unwrap();
        let d11 = g.diff(1).dot(g.diff(1));
        for m in 0..=21i32 {
            let f = g.nodes().mapv(|y| y.powi(m));
            let a = g.diff(2).dot(&f);
            let b = d11.dot(&f);
            let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            let err = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err / scale < 1e-10, "degree {m}: {err}");
        }
    }

    #[test]
    fn row_sums_vanish() {
        let g = make_grid(48).unwrap();
        for order in 1..=4 {
            let d = g.diff(order);
            let scale = d.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            for row in d.rows() {
                assert!(row.sum().abs() <= 1e-12 * scale.max(1.0));
            }
        }
        assert!(g.diff(1).rows().into_iter().all(|r| r.sum().abs() < 1e-12));
    }

    #[test]
    fn quadrature_examples() {
        let g = make_grid(32).unwrap();
        let one = sample(&g, |_| 1.0);
        assert!((g.integrate(one.view()).unwrap().re - 1.0).abs() < 1e-13);
        assert!((g.weights().sum() - 1.0).abs() < 1e-13);

        let beta = sample(&g, |y| y.powi(4) * (1.0 - y).powi(4));
        assert!((g.integrate(beta.view()).unwrap().re - 1.0 / 630.0).abs() < 1e-12);

        let s = sample(&g, |y| (PI * y).sin());
        assert!((g.integrate(s.view()).unwrap().re - 2.0 / PI).abs() < 1e-12);

        let zero = sample(&g, |_| 0.0);
        assert_eq!(g.integrate(zero.view()).unwrap(), Complex64::new(0.0, 0.0));

        let short = Array1::<Complex64>::zeros(5);
        assert!(matches!(g.integrate(short.view()), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn odd_and_even_node_counts_integrate_alike() {
        for n in [9, 10, 33, 64] {
            let g = make_grid(n).unwrap();
            let e = sample(&g, f64::exp);
            let exact = std::f64::consts::E - 1.0;
            assert!((g.integrate(e.view()).unwrap().re - exact).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn interpolation_examples() {
        let g = make_grid(16).unwrap();
        let sq = sample(&g, |y| y * y);
        assert!((g.interpolate(sq.view(), 0.5).unwrap().re - 0.25).abs() < 1e-13);
        let j = 5;
        assert_eq!(g.interpolate(sq.view(), g.nodes()[j]).unwrap(), sq[j]);
        assert!(matches!(g.interpolate(sq.view(), 1.5), Err(Error::OutOfDomain(_))));

        let g = make_grid(32).unwrap();
        let e = sample(&g, f64::exp);
        assert!((g.interpolate(e.view(), 0.3).unwrap().re - 0.3f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn chebyshev_coefficients() {
        let g = make_grid(16).unwrap();
        // T_2(x) = 2x² − 1 with x = 1 − 2y
        let f = sample(&g, |y| 2.0 * (1.0 - 2.0 * y).powi(2) - 1.0);
        let a = g.coefficients(f.view()).unwrap();
        for (j, v) in a.iter().enumerate() {
            let want = if j == 2 { 1.0 } else { 0.0 };
            assert!((v.re - want).abs() < 1e-13 && v.im.abs() < 1e-15, "j = {j}");
        }
        assert!(g.tail_ratio(f.view()).unwrap() < 1e-13);
        let wiggle = sample(&g, |y| (40.0 * y).sin());
        assert!(g.tail_ratio(wiggle.view()).unwrap() > 1e-3);
    }

    #[test]
    fn exact_product_integrals() {
        let n = 12;
        let g = make_grid(n).unwrap();
        // degree 11 times degree 11 with a linear weight: degree 23
        let f = sample(&g, |y| y.powi(11));
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let got = g.integrate_product(f.view(), f.view(), [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((got.re - 1.0 / 23.0).abs() < 1e-14);
        let got = g.integrate_product(f.view(), f.view(), [c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!((got.re - (1.0 / 23.0 - 1.0 / 24.0)).abs() < 1e-14);
        let h = sample(&g, |y| y.powi(10));
        let got = g.integrate_product(f.view(), h.view(), [c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
        let want = Complex64::new(1.0 / 22.0, 2.0 / 23.0);
        assert!((got - want).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn fundamental_theorem(a in -2.0f64..2.0, b in 0.5f64..4.0, c in -1.0f64..1.0) {
            let g = make_grid(40).unwrap();
            let f = |y: f64| a * (b * y).sin() + c * (y * y).exp();
            let s = sample(&g, f);
            let df = g.differentiate(s.view(), 1).unwrap();
            let integral = g.integrate(df.view()).unwrap().re;
            prop_assert!((integral - (f(1.0) - f(0.0))).abs() < 1e-10);
        }
    }
}
