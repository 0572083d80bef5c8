//! Direct solution of `Hψ = Eψ` on a grid.
//!
//! Eigenvalues come from bisection on Sylvester inertia counts of the
//! tridiagonal matrix; eigenvectors from inverse iteration at the bisected
//! shift. Periodic grids give a cyclic matrix, which is first reduced to
//! open tridiagonal form by dense Householder reflections (`O(n³)`, meant
//! for rings of up to a few thousand samples). Vectors whose eigenvalues fall in the same cluster are
//! Gram-Schmidt orthogonalized in index order, so degenerate subspaces get a
//! reproducible basis. Every state is normalized to `∫|ψ|² dq = 1` and its
//! first significant sample is made positive.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::grid::{inner_product, Grid, ScalarField};
use crate::hamiltonian::{DiscreteHamiltonian, Potential};
use crate::linalg::tridiagonalize;
use crate::{Error, Result};

const MAX_INVERSE_ITERATIONS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub energy: f64,
    pub state: ScalarField,
}

/// Eigenpairs in ascending energy order with orthonormal states.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pairs: Vec<EigenPair>,
}

impl Spectrum {
    pub(crate) fn from_sorted(pairs: Vec<EigenPair>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0].energy <= w[1].energy));
        Spectrum { pairs }
    }

    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<EigenPair> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.energy).collect()
    }

    pub fn state(&self, i: usize) -> &ScalarField {
        &self.pairs[i].state
    }

    /// Matrix of inner products `⟨ψᵢ, ψⱼ⟩`.
    pub fn gram_matrix(&self) -> Vec<Vec<Complex64>> {
        self.pairs
            .iter()
            .map(|a| {
                self.pairs
                    .iter()
                    .map(|b| inner_product(&a.state, &b.state).expect("states share a grid"))
                    .collect()
            })
            .collect()
    }

    /// Largest entrywise deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        self.gram_matrix()
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter().enumerate().map(move |(j, g)| {
                    let target = if i == j { 1.0 } else { 0.0 };
                    (g - Complex64::new(target, 0.0)).norm()
                })
            })
            .fold(0.0, f64::max)
    }
}

/// Lowest `m` eigenpairs of the discrete Hamiltonian.
pub fn solve_spectrum(potential: &Potential, grid: &Grid, m: usize) -> Result<Spectrum> {
    check_state_count(grid, m)?;
    let op = DiscreteHamiltonian::new(potential, grid)?;
    let (reduced, reflectors) = if grid.is_periodic() {
        let (t, q) = tridiagonalize(op.matrix());
        (Some(t), Some(q))
    } else {
        (None, None)
    };
    let a = reduced.as_ref().unwrap_or(op.matrix());
    let n = a.len();
    let (lo, hi) = a.bounds();
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let cluster_tol = 1e-9 * scale;
    let converged = 16.0 * f64::EPSILON * scale;
    let acceptable = (1e-8f64).max(128.0 * f64::EPSILON * scale);

    let mut values: Vec<f64> = Vec::with_capacity(m);
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for k in 0..m {
        let lambda = a.eigenvalue(k);
        let cluster: Vec<usize> = (0..k)
            .filter(|&j| (values[j] - lambda).abs() <= cluster_tol)
            .collect();
        let factor = a.factor(lambda);

        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let mut x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(unit_uniform(&mut rng) - 0.5, 0.0))
            .collect();
        orthonormalize(&mut x, cluster.iter().map(|&j| vectors[j].as_slice()));

        let mut best = f64::INFINITY;
        let mut rho = lambda;
        for it in 0..MAX_INVERSE_ITERATIONS {
            factor.solve(&mut x);
            orthonormalize(&mut x, cluster.iter().map(|&j| vectors[j].as_slice()));
            let ax = a.apply(&x);
            rho = dot(&x, &ax).re;
            let r = ax
                .iter()
                .zip(&x)
                .map(|(y, v)| (y - v * rho).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if r <= converged || (it >= 2 && r >= 0.5 * best) {
                best = best.min(r);
                break;
            }
            best = best.min(r);
        }
        if best > acceptable {
            return Err(Error::EigenNoConvergence { residual: best });
        }
        fix_sign(&mut x);
        let rho = values.last().map_or(rho, |&prev| rho.max(prev));
        values.push(rho);
        vectors.push(x);
    }

    let pairs = values
        .into_iter()
        .zip(vectors)
        .map(|(energy, mut v)| {
            if let Some(q) = &reflectors {
                q.apply(&mut v);
                fix_sign(&mut v);
            }
            let full = ScalarField::from_parts(*grid, op.embed(&v));
            let norm = full.norm();
            EigenPair {
                energy,
                state: full.scaled(Complex64::new(1.0 / norm, 0.0)),
            }
        })
        .collect();
    Ok(Spectrum::from_sorted(pairs))
}

/// `‖Hψ - Eψ‖`, taken over the free (non-pinned) samples.
pub fn residual_norm(pair: &EigenPair, potential: &Potential) -> Result<f64> {
    let op = DiscreteHamiltonian::new(potential, pair.state.grid())?;
    let mut r = op.apply(pair.state.values());
    for (ri, &p) in r.iter_mut().zip(pair.state.values()) {
        *ri -= p * pair.energy;
    }
    op.pin(&mut r);
    Ok(ScalarField::from_parts(*pair.state.grid(), r).norm())
}

pub(crate) fn check_state_count(grid: &Grid, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "at least one state must be requested",
        });
    }
    if m > grid.max_states() {
        return Err(Error::TooManyStates {
            requested: m,
            max: grid.max_states(),
        });
    }
    Ok(())
}

pub(crate) fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean Gram-Schmidt (applied twice) against `basis`, then unit scaling.
fn orthonormalize<'a>(x: &mut [Complex64], basis: impl Iterator<Item = &'a [Complex64]> + Clone) {
    for _ in 0..2 {
        for b in basis.clone() {
            let c = dot(b, x);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= bi * c;
            }
        }
    }
    let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for xi in x.iter_mut() {
            *xi /= norm;
        }
    }
}

/// Makes the first significant component real and positive.
fn fix_sign(x: &mut [Complex64]) {
    let max = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if let Some(first) = x.iter().find(|v| v.norm() > 1e-8 * max).copied() {
        let phase = first.conj() / first.norm();
        for xi in x.iter_mut() {
            *xi *= phase;
        }
    }
}
