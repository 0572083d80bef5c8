//! Potentials and the discrete operator `H = -∂²/∂q² + V(q)`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::grid::{laplacian_values, Grid, ScalarField};
use crate::linalg::BandedSym;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Free,
    /// `V(q) = ω² q² / 4`, which gives `E_n = ω (n + ½)` for `H = -∂² + V`.
    Harmonic {
        omega: f64,
    },
    /// `height` on the closed interval `[q_lo, q_hi]`, zero elsewhere.
    Barrier {
        height: f64,
        q_lo: f64,
        q_hi: f64,
    },
    /// One sample per grid point.
    Tabulated(Vec<f64>),
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Free => Ok(()),
            Potential::Harmonic { omega } => {
                if omega.is_finite() && omega > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "omega",
                        reason: "must be positive and finite",
                    })
                }
            }
            Potential::Barrier { height, q_lo, q_hi } => {
                if !(height.is_finite() && q_lo.is_finite() && q_hi.is_finite()) {
                    Err(Error::InvalidParameter {
                        name: "barrier",
                        reason: "parameters must be finite",
                    })
                } else if q_lo >= q_hi {
                    Err(Error::InvalidParameter {
                        name: "barrier",
                        reason: "q_lo must be below q_hi",
                    })
                } else {
                    Ok(())
                }
            }
            Potential::Tabulated(ref values) => match values.iter().position(|v| !v.is_finite()) {
                Some(i) => Err(Error::NonFinite(i)),
                None => Ok(()),
            },
        }
    }

    /// Real samples of `V` on `grid`.
    pub fn samples(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match *self {
            Potential::Free => alloc::vec![0.0; grid.len()],
            Potential::Harmonic { omega } => grid
                .points()
                .map(|q| 0.25 * omega * omega * q * q)
                .collect(),
            Potential::Barrier { height, q_lo, q_hi } => grid
                .points()
                .map(|q| if q >= q_lo && q <= q_hi { height } else { 0.0 })
                .collect(),
            Potential::Tabulated(ref values) => {
                if values.len() != grid.len() {
                    return Err(Error::LengthMismatch {
                        expected: grid.len(),
                        found: values.len(),
                    });
                }
                values.clone()
            }
        })
    }
}

pub fn evaluate_potential(potential: &Potential, grid: &Grid) -> Result<ScalarField> {
    ScalarField::from_real(*grid, &potential.samples(grid)?)
}

/// `-laplacian(ψ) + V·ψ` with the grid's ghost-value convention.
pub fn apply_hamiltonian(potential: &Potential, psi: &ScalarField) -> Result<ScalarField> {
    let v = potential.samples(psi.grid())?;
    Ok(ScalarField::from_parts(
        *psi.grid(),
        raw_apply(psi.grid(), &v, psi.values()),
    ))
}

fn raw_apply(grid: &Grid, v: &[f64], psi: &[Complex64]) -> Vec<Complex64> {
    laplacian_values(grid, psi)
        .into_iter()
        .zip(v.iter().zip(psi))
        .map(|(lap, (&vi, &p))| -lap + p * vi)
        .collect()
}

/// The Hamiltonian restricted to the free samples of a grid. On Dirichlet
/// grids the two end points are pinned to zero, so the operator acts on the
/// `n - 2` interior samples only and its output vanishes at the end points.
#[derive(Debug, Clone)]
pub(crate) struct DiscreteHamiltonian {
    grid: Grid,
    potential: Vec<f64>,
    matrix: BandedSym,
}

impl DiscreteHamiltonian {
    pub fn new(potential: &Potential, grid: &Grid) -> Result<Self> {
        let v = potential.samples(grid)?;
        let h = grid.spacing();
        let inv_h2 = 1.0 / (h * h);
        let (diag, off, corner) = if grid.is_periodic() {
            let n = grid.len();
            (
                v.iter().map(|vi| 2.0 * inv_h2 + vi).collect(),
                alloc::vec![-inv_h2; n - 1],
                -inv_h2,
            )
        } else {
            let interior = &v[1..v.len() - 1];
            (
                interior.iter().map(|vi| 2.0 * inv_h2 + vi).collect(),
                alloc::vec![-inv_h2; interior.len() - 1],
                0.0,
            )
        };
        Ok(DiscreteHamiltonian {
            grid: *grid,
            potential: v,
            matrix: BandedSym { diag, off, corner },
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn matrix(&self) -> &BandedSym {
        &self.matrix
    }

    /// Offset of the free samples inside a full-length field.
    pub fn free_offset(&self) -> usize {
        if self.grid.is_periodic() {
            0
        } else {
            1
        }
    }

    /// Applies `H` to a full-length field; pinned end points map to zero.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = raw_apply(&self.grid, &self.potential, psi);
        self.pin(&mut out);
        out
    }

    /// Zeroes the pinned end points of a full-length field.
    pub fn pin(&self, values: &mut [Complex64]) {
        if !self.grid.is_periodic() {
            let n = values.len();
            values[0] = Complex64::new(0.0, 0.0);
            values[n - 1] = Complex64::new(0.0, 0.0);
        }
    }

    /// Embeds free-sample values into a full-length field.
    pub fn embed(&self, free: &[Complex64]) -> Vec<Complex64> {
        let mut full = alloc::vec![Complex64::new(0.0, 0.0); self.grid.len()];
        let off = self.free_offset();
        full[off..off + free.len()].copy_from_slice(free);
        full
    }

    pub fn restrict<'a>(&self, full: &'a [Complex64]) -> &'a [Complex64] {
        let off = self.free_offset();
        &full[off..off + self.matrix.len()]
    }
}
