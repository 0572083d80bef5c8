//! Finite-difference numerics for the stationary Schrödinger problem, posed
//! two ways: as a symmetric eigenproblem and as a constrained minimization of
//! the field functional `∫ |∂ψ/∂q|² + V|ψ|² dq` on the unit sphere.
//!
//! On top of the solvers sit the influence-function tools (`g = k ln ψ`,
//! momentum fields, pointwise Hamilton-Jacobi residuals and the
//! energy-dispersion observability test) and an analytic double-slit model
//! whose particle and wave patterns differ only by a choice of basis in the
//! degenerate slit eigenspace.
//!
//! Units are natural throughout: `ħ = 1` and the mass is absorbed, so the
//! Hamiltonian is `H = -∂²/∂q² + V(q)` and a plane wave `e^{iκq}` has `E = κ²`.
//!
//! The crate is `no_std` and only needs `alloc`. Float math goes through
//! `num_traits::Float` (backed by `libm`); that import reads as unused
//! whenever `std` is linked into the build, hence the local `allow`s.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod linalg;

pub mod consistency;
pub mod doubleslit;
pub mod eigensolver;
pub mod grid;
pub mod hamiltonian;
pub mod variational;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use consistency::{ConsistencyReport, InfluenceFunction};
pub use doubleslit::{DetectorPattern, FringeMetrics, SlitConfig, VisibilityMode};
pub use eigensolver::{EigenPair, Spectrum};
pub use grid::{Boundary, Grid, ScalarField};
pub use hamiltonian::Potential;
pub use variational::{Preconditioner, VariationalOptions, VariationalOutcome};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
