use std::f64::consts::PI;

use num_complex::Complex64;
use qinfluence_core::eigensolver::{residual_norm, solve_spectrum};
use qinfluence_core::grid::inner_product;
use qinfluence_core::variational::{
    constrained_gradient, minimize_functional, minimize_functional_detailed, rayleigh_quotient,
};
use qinfluence_core::{Error, Grid, Potential, Preconditioner, ScalarField, VariationalOptions};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

#[test]
fn oscillator_levels_from_both_solvers() {
    let grid = Grid::dirichlet(-8.0, 8.0, 801).unwrap();
    let v = Potential::Harmonic { omega: 2.0 };
    let eig = solve_spectrum(&v, &grid, 3).unwrap();
    let var = minimize_functional(&v, &grid, 3, &VariationalOptions::default()).unwrap();
    for (k, exact) in [1.0, 3.0, 5.0].iter().enumerate() {
        assert!((eig.energies()[k] - exact).abs() <= 5e-3 * exact);
        assert!((var.energies()[k] - eig.energies()[k]).abs() <= 1e-6 * exact);
        assert!(residual_norm(&eig.pairs()[k], &v).unwrap() <= 1e-6);
    }
    assert!(eig.orthonormality_error() <= 1e-10);
    assert!(var.orthonormality_error() <= 1e-8);
}

#[test]
fn states_match_up_to_sign() {
    let grid = Grid::dirichlet(0.0, PI, 301).unwrap();
    let eig = solve_spectrum(&Potential::Free, &grid, 3).unwrap();
    let var =
        minimize_functional(&Potential::Free, &grid, 3, &VariationalOptions::default()).unwrap();
    for k in 0..3 {
        let overlap = inner_product(eig.state(k), var.state(k)).unwrap();
        assert!((overlap.norm() - 1.0).abs() <= 1e-6, "k={k} {overlap}");
    }
}

#[test]
fn barrier_splits_the_lowest_pair() {
    let grid = Grid::dirichlet(-4.0, 4.0, 801).unwrap();
    let v = Potential::Barrier {
        height: 40.0,
        q_lo: -0.25,
        q_hi: 0.25,
    };
    let e = solve_spectrum(&v, &grid, 3).unwrap().energies();
    // Two wells of width 3.75: a near-degenerate doublet below the next level.
    let well = (PI / 3.75).powi(2);
    assert!(e[0] < well && (e[1] - e[0]) < 0.1 * well && e[2] > 3.0 * well);
}

#[test]
fn gradient_matches_finite_differences() {
    let grid = Grid::dirichlet(-3.0, 3.0, 121).unwrap();
    let n = grid.len();
    let v = Potential::Harmonic { omega: 1.5 };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let psi = ScalarField::from_fn(grid, |q| {
        Complex64::new(
            (-(q * q)).exp() * (1.0 + 0.3 * q),
            0.2 * q * (-(q * q)).exp(),
        )
    })
    .unwrap()
    .normalized()
    .unwrap();
    let g = constrained_gradient(&psi, &v).unwrap();
    for _ in 0..10 {
        let mut d: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(uniform(&mut rng), uniform(&mut rng)))
            .collect();
        d[0] = Complex64::new(0.0, 0.0);
        d[n - 1] = Complex64::new(0.0, 0.0);
        let d = ScalarField::new(grid, d).unwrap();
        let analytic = inner_product(&g, &d).unwrap().re;
        let eps = 1e-5;
        let at = |s: f64| {
            let shifted = psi.combine(Complex64::new(1.0, 0.0), &d, Complex64::new(s, 0.0));
            rayleigh_quotient(&shifted.unwrap(), &v).unwrap()
        };
        let numeric = (at(eps) - at(-eps)) / (2.0 * eps);
        let rel = (numeric - analytic).abs() / analytic.abs().max(1e-12);
        assert!(rel <= 1e-5, "analytic {analytic} numeric {numeric}");
    }
}

#[test]
fn functional_history_never_increases() {
    let grid = Grid::dirichlet(0.0, PI, 81).unwrap();
    let h = grid.spacing();
    for opts in [
        VariationalOptions::default(),
        VariationalOptions {
            step: 0.2 * h * h,
            max_iters: 100_000,
            tol: 1e-6,
            seed: 5,
            preconditioner: Preconditioner::None,
        },
    ] {
        let out = minimize_functional_detailed(&Potential::Free, &grid, 2, &opts).unwrap();
        for trace in &out.history {
            assert!(trace.len() >= 2);
            assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}

#[test]
fn seeds_are_reproducible() {
    let grid = Grid::dirichlet(-3.0, 3.0, 151).unwrap();
    let v = Potential::Harmonic { omega: 1.0 };
    let opts = VariationalOptions {
        seed: 42,
        ..Default::default()
    };
    let a = minimize_functional_detailed(&v, &grid, 2, &opts).unwrap();
    let b = minimize_functional_detailed(&v, &grid, 2, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn requests_beyond_the_grid_fail() {
    let grid = Grid::dirichlet(0.0, 1.0, 20).unwrap();
    assert!(matches!(
        solve_spectrum(&Potential::Free, &grid, 19),
        Err(Error::TooManyStates {
            requested: 19,
            max: 18
        })
    ));
    assert_eq!(
        solve_spectrum(&Potential::Free, &grid, 18).unwrap().len(),
        18
    );
}
