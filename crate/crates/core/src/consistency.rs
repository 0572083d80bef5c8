//! Influence functions `g = k ln ψ` and the Hamilton-Jacobi consistency
//! tests built on them.
//!
//! In natural units `k = ħ/i = -i`. For a separated conservative state the
//! consistency condition reduces to `k²(ψ'/ψ)² + V - E = 0` pointwise, and an
//! influence counts as observable when it is dispersion-free in energy and
//! solves `Hψ = E_a ψ` for its assigned energy.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::{derivative, derivative_values, Grid, ScalarField};
use crate::hamiltonian::{DiscreteHamiltonian, Potential};
use crate::variational::NORMALIZATION_TOL;
use crate::{Error, Result};

/// `k = ħ/i` with `ħ = 1`.
pub const K: Complex64 = Complex64 { re: 0.0, im: -1.0 };

/// Dispersion values in `[-VARIANCE_FLOOR, 0)` are rounding noise.
pub const VARIANCE_FLOOR: f64 = 1e-10;

/// Samples of `g(q) = k ln ψ(q)` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceFunction {
    grid: Grid,
    values: Vec<Complex64>,
    winding: Option<i64>,
}

impl InfluenceFunction {
    /// Wraps tabulated influence samples. Periodic grids get winding zero.
    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        let field = ScalarField::new(grid, values)?;
        Ok(InfluenceFunction {
            grid,
            values: field.into_values(),
            winding: grid.is_periodic().then_some(0),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn k_constant(&self) -> Complex64 {
        K
    }

    /// Net number of phase turns of `ψ` around a periodic grid; `None` on
    /// Dirichlet grids.
    pub fn winding(&self) -> Option<i64> {
        self.winding
    }

    /// `exp(g / k)`, the wavefield this influence was taken from.
    pub fn to_wavefield(&self) -> ScalarField {
        ScalarField::from_parts(
            self.grid,
            self.values.iter().map(|g| (g / K).exp()).collect(),
        )
    }

    /// Jump of `g` across the periodic seam: `g(q + L) = g(q) + offset`.
    fn seam_offset(&self) -> Complex64 {
        let turns = self.winding.unwrap_or(0) as f64;
        K * Complex64::new(0.0, 2.0 * PI * turns)
    }
}

/// Energy mean and dispersion of a normalized state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMoments {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub assigned_energy: f64,
    pub mean_energy: f64,
    pub energy_variance: f64,
    /// `‖Hψ - E_a ψ‖`.
    pub el_residual: f64,
    pub observable: bool,
    pub tolerance: f64,
}

fn node_indices(psi: &ScalarField, node_eps: f64) -> Result<()> {
    if node_eps.is_nan() || node_eps <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "node_eps",
            reason: "must be positive",
        });
    }
    let indices: Vec<usize> = psi
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() < node_eps)
        .map(|(i, _)| i)
        .collect();
    if indices.is_empty() {
        Ok(())
    } else {
        Err(Error::Nodes { indices })
    }
}

/// Phase step from `a` to `b`, in `(-π, π]`.
fn phase_step(a: Complex64, b: Complex64) -> f64 {
    let d = (b * a.conj()).arg();
    if d <= -PI {
        d + 2.0 * PI
    } else {
        d
    }
}

/// `g = k (ln|ψ| + iθ)` with the phase `θ` unwrapped from index 0.
pub fn influence_from_wavefield(psi: &ScalarField, node_eps: f64) -> Result<InfluenceFunction> {
    node_indices(psi, node_eps)?;
    let vals = psi.values();
    let mut theta = vals[0].arg();
    let mut values = Vec::with_capacity(vals.len());
    values.push(K * Complex64::new(vals[0].norm().ln(), theta));
    for w in vals.windows(2) {
        theta += phase_step(w[0], w[1]);
        values.push(K * Complex64::new(w[1].norm().ln(), theta));
    }
    let winding = psi.grid().is_periodic().then(|| {
        let n = vals.len();
        let total = theta + phase_step(vals[n - 1], vals[0]) - vals[0].arg();
        (total / (2.0 * PI)).round() as i64
    });
    Ok(InfluenceFunction {
        grid: *psi.grid(),
        values,
        winding,
    })
}

/// `p = ∂g/∂q`. Periodic grids account for the phase winding at the seam.
pub fn momentum_field(g: &InfluenceFunction) -> ScalarField {
    ScalarField::from_parts(
        g.grid,
        derivative_values(&g.grid, &g.values, g.seam_offset()),
    )
}

/// `R(q) = k²(ψ'/ψ)² + V(q) - E = -(ψ'/ψ)² + V(q) - E`.
pub fn pointwise_hj_residual(
    psi: &ScalarField,
    energy: f64,
    potential: &Potential,
    node_eps: f64,
) -> Result<ScalarField> {
    node_indices(psi, node_eps)?;
    let v = potential.samples(psi.grid())?;
    let dpsi = derivative(psi);
    let values = psi
        .values()
        .iter()
        .zip(dpsi.values())
        .zip(&v)
        .map(|((&p, &dp), &vi)| {
            let log_slope = dp / p;
            K * K * log_slope * log_slope + vi - energy
        })
        .collect();
    ScalarField::new(*psi.grid(), values)
}

fn check_normalized(psi: &ScalarField) -> Result<()> {
    let norm_sq = psi.norm_sq();
    if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// `‖Hψ - Eψ‖` over the free samples.
fn shifted_residual(
    op: &DiscreteHamiltonian,
    psi: &ScalarField,
    hpsi: &[Complex64],
    e: f64,
) -> f64 {
    let mut r: Vec<Complex64> = hpsi
        .iter()
        .zip(psi.values())
        .map(|(h, p)| h - p * e)
        .collect();
    op.pin(&mut r);
    ScalarField::from_parts(*psi.grid(), r).norm()
}

/// Mean `⟨ψ, Hψ⟩` and dispersion `⟨H²⟩ - ⟨H⟩²` of a normalized state. The
/// dispersion is evaluated as `‖Hψ - ⟨H⟩ψ‖²`, which is the same quantity
/// for unit `ψ` without the cancellation.
pub fn energy_moments(psi: &ScalarField, potential: &Potential) -> Result<EnergyMoments> {
    check_normalized(psi)?;
    let op = DiscreteHamiltonian::new(potential, psi.grid())?;
    Ok(moments_with(&op, psi).0)
}

fn moments_with(op: &DiscreteHamiltonian, psi: &ScalarField) -> (EnergyMoments, Vec<Complex64>) {
    let hpsi = op.apply(psi.values());
    let mean = crate::grid::weighted_dot(psi.grid(), psi.values(), &hpsi).re;
    let spread = shifted_residual(op, psi, &hpsi, mean);
    let mut variance = spread * spread;
    if (-VARIANCE_FLOOR..0.0).contains(&variance) {
        variance = 0.0;
    }
    (EnergyMoments { mean, variance }, hpsi)
}

/// Observable iff the energy dispersion and the eigen-residual for the
/// assigned energy are both within `tol`.
pub fn observability_verdict(
    psi: &ScalarField,
    assigned_energy: f64,
    potential: &Potential,
    tol: f64,
) -> Result<ConsistencyReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: "must be positive",
        });
    }
    check_normalized(psi)?;
    let op = DiscreteHamiltonian::new(potential, psi.grid())?;
    let (moments, hpsi) = moments_with(&op, psi);
    let el_residual = shifted_residual(&op, psi, &hpsi, assigned_energy);
    Ok(ConsistencyReport {
        assigned_energy,
        mean_energy: moments.mean,
        energy_variance: moments.variance,
        el_residual,
        observable: moments.variance <= tol && el_residual <= tol,
        tolerance: tol,
    })
}

/// `e^{-iEt} ψ`, the solution of the separated time equation `k ∂ψ/∂t = Eψ`.
pub fn time_evolve_phase(psi: &ScalarField, energy: f64, t: f64) -> ScalarField {
    psi.scaled(Complex64::new(0.0, -energy * t).exp())
}
