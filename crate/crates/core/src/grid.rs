//! Uniform one-dimensional lattice, complex sample fields, finite-difference
//! stencils and quadrature.
//!
//! A [`Boundary::Dirichlet`] grid includes both end points `q_min` and
//! `q_max`; samples outside the lattice are taken to be zero (hard walls).
//! A [`Boundary::Periodic`] grid covers `[q_min, q_max)` and wraps around.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    q_min: f64,
    q_max: f64,
    n: usize,
    boundary: Boundary,
}

impl Grid {
    pub fn new(q_min: f64, q_max: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGrid("at least 3 samples are required"));
        }
        if !q_min.is_finite() || !q_max.is_finite() {
            return Err(Error::InvalidGrid("bounds must be finite"));
        }
        if q_max <= q_min {
            return Err(Error::InvalidGrid("q_max must exceed q_min"));
        }
        let grid = Grid {
            q_min,
            q_max,
            n,
            boundary,
        };
        if grid.spacing() <= 0.0 {
            return Err(Error::InvalidGrid("spacing underflows"));
        }
        Ok(grid)
    }

    pub fn dirichlet(q_min: f64, q_max: f64, n: usize) -> Result<Self> {
        Self::new(q_min, q_max, n, Boundary::Dirichlet)
    }

    pub fn periodic(q_min: f64, q_max: f64, n: usize) -> Result<Self> {
        Self::new(q_min, q_max, n, Boundary::Periodic)
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    /// Lattice spacing `h`.
    pub fn spacing(&self) -> f64 {
        let cells = match self.boundary {
            Boundary::Dirichlet => self.n - 1,
            Boundary::Periodic => self.n,
        };
        (self.q_max - self.q_min) / cells as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Number of independent discrete eigenstates: the end points of a
    /// Dirichlet grid are pinned to zero.
    pub fn max_states(&self) -> usize {
        match self.boundary {
            Boundary::Dirichlet => self.n - 2,
            Boundary::Periodic => self.n,
        }
    }

    /// Quadrature weight of sample `i` (trapezoid or rectangle rule).
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        match self.boundary {
            Boundary::Dirichlet if i == 0 || i == self.n - 1 => 0.5 * h,
            _ => h,
        }
    }
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |q| Complex64::new(f(q), 0.0))
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: alloc::vec![Complex64::zero(); grid.len()],
        }
    }

    /// Internal constructor for values produced by finite arithmetic on
    /// already-validated fields.
    pub(crate) fn from_parts(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|&v| c * v).collect())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &ScalarField, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(Self::from_parts(self.grid, values))
    }

    /// `∫ |f|² dq`.
    pub fn norm_sq(&self) -> f64 {
        weighted_norm_sq(&self.grid, &self.values)
    }

    pub fn norm(&self) -> f64 {
        num_traits::Float::sqrt(self.norm_sq())
    }

    /// Copy rescaled to unit norm; a zero field is rejected.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter {
                name: "field",
                reason: "cannot normalize a zero field",
            });
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn weighted_norm_sq(grid: &Grid, values: &[Complex64]) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| grid.weight(i) * v.norm_sqr())
        .sum()
}

pub(crate) fn weighted_dot(grid: &Grid, f: &[Complex64], g: &[Complex64]) -> Complex64 {
    f.iter()
        .zip(g)
        .enumerate()
        .map(|(i, (a, b))| a.conj() * b * grid.weight(i))
        .sum()
}

/// First derivative by second-order differences: central in the interior,
/// one-sided three-point at Dirichlet edges, wraparound on periodic grids.
pub fn derivative(f: &ScalarField) -> ScalarField {
    let values = derivative_values(&f.grid, &f.values, Complex64::zero());
    ScalarField::from_parts(f.grid, values)
}

/// Derivative kernel. On periodic grids the samples are treated as
/// quasi-periodic, `f(q + L) = f(q) + wrap_offset`.
pub(crate) fn derivative_values(
    grid: &Grid,
    f: &[Complex64],
    wrap_offset: Complex64,
) -> Vec<Complex64> {
    let n = f.len();
    let inv_2h = 1.0 / (2.0 * grid.spacing());
    let mut out = Vec::with_capacity(n);
    match grid.boundary() {
        Boundary::Dirichlet => {
            out.push((-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv_2h);
            for i in 1..n - 1 {
                out.push((f[i + 1] - f[i - 1]) * inv_2h);
            }
            out.push((3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv_2h);
        }
        Boundary::Periodic => {
            for i in 0..n {
                let next = if i + 1 == n {
                    f[0] + wrap_offset
                } else {
                    f[i + 1]
                };
                let prev = if i == 0 {
                    f[n - 1] - wrap_offset
                } else {
                    f[i - 1]
                };
                out.push((next - prev) * inv_2h);
            }
        }
    }
    out
}

/// Three-point second difference `(f[i-1] - 2f[i] + f[i+1]) / h²`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    ScalarField::from_parts(f.grid, laplacian_values(&f.grid, &f.values))
}

pub(crate) fn laplacian_values(grid: &Grid, f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let periodic = grid.is_periodic();
    (0..n)
        .map(|i| {
            let prev = match i {
                0 if periodic => f[n - 1],
                0 => Complex64::zero(),
                _ => f[i - 1],
            };
            let next = if i + 1 < n {
                f[i + 1]
            } else if periodic {
                f[0]
            } else {
                Complex64::zero()
            };
            (prev - 2.0 * f[i] + next) * inv_h2
        })
        .collect()
}

/// Trapezoid rule on Dirichlet grids, rectangle rule on periodic grids.
pub fn integrate(f: &ScalarField) -> Complex64 {
    f.values
        .iter()
        .enumerate()
        .map(|(i, &v)| v * f.grid.weight(i))
        .sum()
}

/// `∫ conj(f)·g dq`.
pub fn inner_product(f: &ScalarField, g: &ScalarField) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    Ok(weighted_dot(&f.grid, &f.values, &g.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn max_err(f: &ScalarField, exact: impl Fn(f64) -> f64, skip_edges: bool) -> f64 {
        let grid = f.grid();
        let range = if skip_edges {
            1..grid.len() - 1
        } else {
            0..grid.len()
        };
        range
            .map(|i| (f.values()[i] - c(exact(grid.point(i)))).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::dirichlet(0.0, 1.0, 2).is_err());
        assert!(Grid::dirichlet(1.0, 1.0, 10).is_err());
        assert!(Grid::periodic(1.0, 0.0, 10).is_err());
        assert!(Grid::dirichlet(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn spacing_depends_on_boundary() {
        let d = Grid::dirichlet(0.0, 1.0, 11).unwrap();
        let p = Grid::periodic(0.0, 1.0, 10).unwrap();
        assert!((d.spacing() - 0.1).abs() < 1e-15);
        assert!((p.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(d.max_states(), 9);
        assert_eq!(p.max_states(), 10);
    }

    #[test]
    fn field_validation() {
        let g = Grid::dirichlet(0.0, 1.0, 5).unwrap();
        assert!(matches!(
            ScalarField::from_real(g, &[1.0; 4]),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(
            ScalarField::from_real(g, &[0.0, 1.0, f64::INFINITY, 0.0, 0.0]),
            Err(Error::NonFinite(2))
        );
    }

    #[test]
    fn derivative_of_constant_and_linear() {
        for grid in [
            Grid::dirichlet(-1.0, 2.0, 17).unwrap(),
            Grid::periodic(0.0, 1.0, 16).unwrap(),
        ] {
            let one = ScalarField::from_real_fn(grid, |_| 1.0).unwrap();
            assert!(derivative(&one).values().iter().all(|v| v.norm() < 1e-12));
        }
        let grid = Grid::dirichlet(-1.0, 2.0, 17).unwrap();
        let lin = ScalarField::from_real_fn(grid, |q| q).unwrap();
        assert!(max_err(&derivative(&lin), |_| 1.0, false) < 1e-12);
    }

    #[test]
    fn derivative_of_sine_is_second_order() {
        // Central-difference remainder: |f'''| h² / 6 with |f'''| ≤ 1.
        let grid = Grid::periodic(0.0, 2.0 * PI, 1000).unwrap();
        let h = grid.spacing();
        let s = ScalarField::from_real_fn(grid, f64::sin).unwrap();
        let err = max_err(&derivative(&s), f64::cos, false);
        assert!(err <= h * h / 6.0 * 1.01, "err {err}");
    }

    #[test]
    fn laplacian_stencil_exactness() {
        let grid = Grid::dirichlet(-1.0, 1.0, 21).unwrap();
        let lin = ScalarField::from_real_fn(grid, |q| q).unwrap();
        let quad = ScalarField::from_real_fn(grid, |q| q * q).unwrap();
        assert!(max_err(&laplacian(&lin), |_| 0.0, true) < 1e-9);
        assert!(max_err(&laplacian(&quad), |_| 2.0, true) < 1e-9);
    }

    #[test]
    fn laplacian_of_sine() {
        // Remainder |f''''| h² / 12.
        let grid = Grid::periodic(0.0, 2.0 * PI, 500).unwrap();
        let h = grid.spacing();
        let s = ScalarField::from_real_fn(grid, f64::sin).unwrap();
        let err = max_err(&laplacian(&s), |q| -q.sin(), false);
        assert!(err <= h * h / 12.0 * 1.01, "err {err}");
    }

    #[test]
    fn second_order_convergence() {
        let errs: Vec<(f64, f64)> = [101, 201, 401]
            .iter()
            .map(|&n| {
                let grid = Grid::dirichlet(0.0, 1.0, n).unwrap();
                let f = ScalarField::from_real_fn(grid, |q| (3.0 * q).exp()).unwrap();
                (
                    max_err(&derivative(&f), |q| 3.0 * (3.0 * q).exp(), false),
                    max_err(&laplacian(&f), |q| 9.0 * (3.0 * q).exp(), true),
                )
            })
            .collect();
        for w in errs.windows(2) {
            let (d0, l0) = w[0];
            let (d1, l1) = w[1];
            assert!(
                (3.6..4.4).contains(&(d0 / d1)),
                "derivative ratio {}",
                d0 / d1
            );
            assert!(
                (3.6..4.4).contains(&(l0 / l1)),
                "laplacian ratio {}",
                l0 / l1
            );
        }
    }

    #[test]
    fn quadrature() {
        let unit = Grid::dirichlet(0.0, 1.0, 11).unwrap();
        let one = ScalarField::from_real_fn(unit, |_| 1.0).unwrap();
        assert!((integrate(&one) - c(1.0)).norm() < 1e-14);

        let grid = Grid::dirichlet(0.0, PI, 401).unwrap();
        let h = grid.spacing();
        let s2 = ScalarField::from_real_fn(grid, |q| q.sin().powi(2)).unwrap();
        // Trapezoid remainder (b - a) h² max|f''| / 12, |f''| ≤ 2.
        let err = (integrate(&s2) - c(PI / 2.0)).norm();
        assert!(err <= PI * h * h * 2.0 / 12.0, "err {err}");
    }

    #[test]
    fn integral_splits_additively() {
        let whole = Grid::dirichlet(0.0, 2.0, 21).unwrap();
        let left = Grid::dirichlet(0.0, 1.0, 11).unwrap();
        let right = Grid::dirichlet(1.0, 2.0, 11).unwrap();
        let f = |q: f64| (q * 1.7).cos() + q * q;
        let total = integrate(&ScalarField::from_real_fn(whole, f).unwrap());
        let parts = integrate(&ScalarField::from_real_fn(left, f).unwrap())
            + integrate(&ScalarField::from_real_fn(right, f).unwrap());
        assert!((total - parts).norm() < 1e-13);
    }

    #[test]
    fn sine_modes_are_orthogonal() {
        let grid = Grid::dirichlet(0.0, PI, 2001).unwrap();
        let s1 = ScalarField::from_real_fn(grid, f64::sin).unwrap();
        let s2 = ScalarField::from_real_fn(grid, |q| (2.0 * q).sin()).unwrap();
        assert!(inner_product(&s1, &s2).unwrap().norm() <= 1e-8);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = ScalarField::zeros(Grid::dirichlet(0.0, 1.0, 5).unwrap());
        let b = ScalarField::zeros(Grid::dirichlet(0.0, 1.0, 6).unwrap());
        assert_eq!(inner_product(&a, &b), Err(Error::GridMismatch));
    }
}
