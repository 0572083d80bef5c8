//! Constrained minimization of the field functional
//!
//! ```text
//! F[ψ] = ∫ |∂ψ/∂q|² + V |ψ|² dq      subject to   ∫ |ψ|² dq = 1
//! ```
//!
//! by projected gradient descent on the unit sphere. The energy is the
//! Lagrange multiplier of the normalization constraint, recovered as the
//! Rayleigh quotient of the converged state. Excited states are found one at
//! a time, each kept orthogonal to the states already converged.
//!
//! The kinetic term is discretized with forward differences between
//! neighbouring samples, which makes `F[ψ]` equal to `⟨ψ, Hψ⟩` for the
//! three-point `H` exactly (summation by parts) whenever `ψ` vanishes at
//! Dirichlet end points. The minimizer therefore targets the same discrete
//! eigenpairs as [`crate::eigensolver::solve_spectrum`].

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::eigensolver::{check_state_count, unit_uniform, EigenPair, Spectrum};
use crate::grid::{weighted_dot, weighted_norm_sq, Grid, ScalarField};
use crate::hamiltonian::{DiscreteHamiltonian, Potential};
use crate::{Error, Result};

pub(crate) const NORMALIZATION_TOL: f64 = 1e-8;

/// Halvings allowed before a step is declared stalled.
const MAX_HALVINGS: u32 = 60;

/// Metric applied to the gradient before stepping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    /// Plain gradient. Needs `step ≲ 1 / (2 λ_max(H))` and many iterations
    /// on fine grids.
    None,
    /// `(H + s)⁻¹` with `s = 1 - min V`, solved in `O(n)`. A step of `0.5`
    /// then coincides with shifted inverse iteration.
    ShiftedHamiltonian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalOptions {
    pub step: f64,
    pub max_iters: usize,
    /// Stopping threshold on `‖∇F‖` of the constrained gradient.
    pub tol: f64,
    pub seed: u64,
    pub preconditioner: Preconditioner,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        VariationalOptions {
            step: 0.5,
            max_iters: 10_000,
            tol: 1e-7,
            seed: 0,
            preconditioner: Preconditioner::ShiftedHamiltonian,
        }
    }
}

impl VariationalOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidParameter {
                name: "step",
                reason: "must be positive",
            });
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: "must be positive",
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

/// Result of a minimization with per-state diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalOutcome {
    pub spectrum: Spectrum,
    /// Accepted gradient steps per state.
    pub iterations: Vec<usize>,
    /// Final constrained-gradient norm per state.
    pub gradient_norms: Vec<f64>,
    /// Functional value before the first and after every accepted step,
    /// accumulated from the exact per-step decrease.
    pub history: Vec<Vec<f64>>,
}

/// `∫ |∂ψ/∂q|² + V|ψ|² dq` for a normalized field.
pub fn functional_value(psi: &ScalarField, potential: &Potential) -> Result<f64> {
    check_normalized(psi)?;
    let v = potential.samples(psi.grid())?;
    Ok(functional(psi.grid(), &v, psi.values()))
}

/// The Lagrange multiplier of the normalization constraint. At a stationary
/// point this is the energy eigenvalue.
pub fn lagrange_multiplier(psi: &ScalarField, potential: &Potential) -> Result<f64> {
    functional_value(psi, potential)
}

/// `F[ψ] / ∫|ψ|²` for any nonzero field.
pub fn rayleigh_quotient(psi: &ScalarField, potential: &Potential) -> Result<f64> {
    let v = potential.samples(psi.grid())?;
    let norm_sq = psi.norm_sq();
    if norm_sq == 0.0 {
        return Err(Error::InvalidParameter {
            name: "psi",
            reason: "zero field has no Rayleigh quotient",
        });
    }
    Ok(functional(psi.grid(), &v, psi.values()) / norm_sq)
}

/// Riesz representer of the derivative of the Rayleigh quotient at a
/// normalized `ψ`: `2(Hψ - Eψ)` on the free samples, so that the directional
/// derivative along `d` is `Re⟨∇, d⟩` for `d` vanishing at pinned points.
pub fn constrained_gradient(psi: &ScalarField, potential: &Potential) -> Result<ScalarField> {
    check_normalized(psi)?;
    let op = DiscreteHamiltonian::new(potential, psi.grid())?;
    let energy = functional(psi.grid(), op.potential(), psi.values());
    Ok(ScalarField::from_parts(
        *psi.grid(),
        gradient(&op, psi.values(), energy),
    ))
}

pub fn minimize_functional(
    potential: &Potential,
    grid: &Grid,
    m: usize,
    opts: &VariationalOptions,
) -> Result<Spectrum> {
    minimize_functional_detailed(potential, grid, m, opts).map(|o| o.spectrum)
}

/// [`minimize_functional`] with iteration counts and functional histories.
pub fn minimize_functional_detailed(
    potential: &Potential,
    grid: &Grid,
    m: usize,
    opts: &VariationalOptions,
) -> Result<VariationalOutcome> {
    opts.validate()?;
    check_state_count(grid, m)?;
    let op = DiscreteHamiltonian::new(potential, grid)?;
    let initial = (0..m).map(|j| random_field(grid, opts.seed, j)).collect();
    run(&op, initial, opts)
}

/// Minimization started from caller-supplied fields (one per state).
pub fn minimize_from(
    potential: &Potential,
    initial: &[ScalarField],
    opts: &VariationalOptions,
) -> Result<VariationalOutcome> {
    opts.validate()?;
    let grid = match initial.first() {
        Some(f) => *f.grid(),
        None => {
            return Err(Error::InvalidParameter {
                name: "initial",
                reason: "at least one starting field is required",
            })
        }
    };
    if initial.iter().any(|f| *f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    check_state_count(&grid, initial.len())?;
    let op = DiscreteHamiltonian::new(potential, &grid)?;
    run(
        &op,
        initial.iter().map(|f| f.values().to_vec()).collect(),
        opts,
    )
}

fn run(
    op: &DiscreteHamiltonian,
    initial: Vec<Vec<Complex64>>,
    opts: &VariationalOptions,
) -> Result<VariationalOutcome> {
    let grid = *op.grid();
    let shift = 1.0 - op.potential().iter().copied().fold(f64::INFINITY, f64::min);
    let precond = match opts.preconditioner {
        Preconditioner::None => None,
        Preconditioner::ShiftedHamiltonian => Some(op.matrix().factor(-shift)),
    };

    let mut states: Vec<Vec<Complex64>> = Vec::with_capacity(initial.len());
    let mut energies = Vec::with_capacity(initial.len());
    let mut iterations = Vec::with_capacity(initial.len());
    let mut gradient_norms = Vec::with_capacity(initial.len());
    let mut history = Vec::with_capacity(initial.len());

    for (j, mut x) in initial.into_iter().enumerate() {
        retract(op, &mut x, &states)?;
        let mut value = functional(&grid, op.potential(), &x);
        let mut level = value;
        let mut trace = alloc::vec![value];
        let mut step = opts.step;
        let mut accepted = 0;
        let grad_norm = loop {
            let g = gradient(op, &x, value);
            let g_norm = weighted_norm_sq(&grid, &g).sqrt();
            if g_norm <= opts.tol {
                break g_norm;
            }
            if accepted >= opts.max_iters {
                return Err(Error::VariationalNoConvergence {
                    state: j,
                    iterations: accepted,
                    gradient_norm: g_norm,
                });
            }
            let mut direction = match &precond {
                None => g.clone(),
                Some(factor) => {
                    let mut free = op.restrict(&g).to_vec();
                    factor.solve(&mut free);
                    op.embed(&free)
                }
            };
            project(op, &mut direction, &states);
            // Exact change of F along the retracted step, free of the
            // cancellation in F(y) - F(x) near convergence.
            let d_g = weighted_dot(&grid, &direction, &g).re;
            let d_x = weighted_dot(&grid, &direction, &x).re;
            let d_sq = weighted_norm_sq(&grid, &direction);
            let curvature = functional(&grid, op.potential(), &direction) - value * d_sq;
            let mut halvings = 0;
            let delta = loop {
                let norm_sq = 1.0 - 2.0 * step * d_x + step * step * d_sq;
                let delta = (-step * d_g + step * step * curvature) / norm_sq;
                if delta <= 0.0 {
                    break delta;
                }
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(Error::VariationalNoConvergence {
                        state: j,
                        iterations: accepted,
                        gradient_norm: g_norm,
                    });
                }
                step *= 0.5;
            };
            for (xi, di) in x.iter_mut().zip(&direction) {
                *xi -= di * step;
            }
            retract(op, &mut x, &states)?;
            level += delta;
            value = functional(&grid, op.potential(), &x);
            accepted += 1;
            trace.push(level);
        };

        energies.push(value);
        iterations.push(accepted);
        gradient_norms.push(grad_norm);
        history.push(trace);
        states.push(x);
    }

    // Deflation yields ascending energies up to round-off; order explicitly.
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    let mut slots: Vec<Option<Vec<Complex64>>> = states.into_iter().map(Some).collect();
    let pairs = order
        .iter()
        .map(|&i| EigenPair {
            energy: energies[i],
            state: ScalarField::from_parts(grid, slots[i].take().expect("each index once")),
        })
        .collect();
    Ok(VariationalOutcome {
        spectrum: Spectrum::from_sorted(pairs),
        iterations: order.iter().map(|&i| iterations[i]).collect(),
        gradient_norms: order.iter().map(|&i| gradient_norms[i]).collect(),
        history: order.iter().map(|&i| history[i].clone()).collect(),
    })
}

fn check_normalized(psi: &ScalarField) -> Result<()> {
    let norm_sq = psi.norm_sq();
    if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// Unnormalized functional: forward-difference kinetic energy over lattice
/// edges plus the quadrature of `V|ψ|²`.
fn functional(grid: &Grid, v: &[f64], psi: &[Complex64]) -> f64 {
    let h = grid.spacing();
    let n = psi.len();
    let mut kinetic: f64 = psi.windows(2).map(|w| (w[1] - w[0]).norm_sqr()).sum();
    if grid.is_periodic() {
        kinetic += (psi[0] - psi[n - 1]).norm_sqr();
    }
    let potential: f64 = psi
        .iter()
        .zip(v)
        .enumerate()
        .map(|(i, (p, vi))| grid.weight(i) * vi * p.norm_sqr())
        .sum();
    kinetic / h + potential
}

fn gradient(op: &DiscreteHamiltonian, psi: &[Complex64], energy: f64) -> Vec<Complex64> {
    let mut g = op.apply(psi);
    for (gi, &p) in g.iter_mut().zip(psi) {
        *gi = 2.0 * (*gi - p * energy);
    }
    op.pin(&mut g);
    g
}

/// Pins the end points and projects out converged states.
fn project(op: &DiscreteHamiltonian, x: &mut [Complex64], basis: &[Vec<Complex64>]) {
    let grid = op.grid();
    op.pin(x);
    for _ in 0..2 {
        for b in basis {
            let c = weighted_dot(grid, b, x);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= bi * c;
            }
        }
    }
}

/// [`project`] followed by rescaling to the unit sphere.
fn retract(op: &DiscreteHamiltonian, x: &mut [Complex64], basis: &[Vec<Complex64>]) -> Result<()> {
    let grid = op.grid();
    project(op, x, basis);
    let norm = weighted_norm_sq(grid, x).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "initial",
            reason: "starting field vanishes after projection",
        });
    }
    for xi in x.iter_mut() {
        *xi /= norm;
    }
    Ok(())
}

fn random_field(grid: &Grid, seed: u64, state: usize) -> Vec<Complex64> {
    let stream = seed ^ (state as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    (0..grid.len())
        .map(|_| {
            let re = unit_uniform(&mut rng) - 0.5;
            let im = if grid.is_periodic() {
                unit_uniform(&mut rng) - 0.5
            } else {
                0.0
            };
            Complex64::new(re, im)
        })
        .collect()
}
