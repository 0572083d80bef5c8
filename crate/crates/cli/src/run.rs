//! Executes a resolved experiment and renders its output files in memory.

use num_complex::Complex64;
use qinfluence_core::consistency::{observability_verdict, pointwise_hj_residual};
use qinfluence_core::doubleslit::{fourier_ratio, fringe_metrics, pattern, sample_hits};
use qinfluence_core::eigensolver::{residual_norm, solve_spectrum};
use qinfluence_core::variational::minimize_functional_detailed;
use qinfluence_core::{Error, Grid, ScalarField, Spectrum};
use serde::Serialize;

use crate::config::{Command, ExperimentConfig, ModeKind};
use crate::output::{json, num, pattern_csv};

/// Output file name and contents.
pub type Artifact = (&'static str, String);

pub fn execute(config: &ExperimentConfig) -> Result<Vec<Artifact>, Error> {
    match config.command {
        Command::Eigensolve => eigensolve(config),
        Command::Variational => variational(config),
        Command::Consistency => consistency(config),
        Command::Doubleslit => doubleslit(config),
        Command::Sample => sample(config),
    }
}

fn states_csv(grid: &Grid, spectrum: &Spectrum) -> String {
    let mut out = String::from("x");
    for k in 0..spectrum.len() {
        out.push_str(&format!(",re_{k},im_{k}"));
    }
    out.push('\n');
    for (i, x) in grid.points().enumerate() {
        out.push_str(&num(x));
        for pair in spectrum.pairs() {
            let v = pair.state.values()[i];
            out.push_str(&format!(",{},{}", num(v.re), num(v.im)));
        }
        out.push('\n');
    }
    out
}

fn eigensolve(config: &ExperimentConfig) -> Result<Vec<Artifact>, Error> {
    let grid = config.core_grid();
    let potential = config.core_potential();
    let m = config.solver.as_ref().expect("resolved").states;
    let spectrum = solve_spectrum(&potential, &grid, m)?;
    let mut table = String::from("index,energy,residual\n");
    for (k, pair) in spectrum.pairs().iter().enumerate() {
        let r = residual_norm(pair, &potential)?;
        table.push_str(&format!("{k},{},{}\n", num(pair.energy), num(r)));
    }
    Ok(vec![
        ("spectrum.csv", table),
        ("states.csv", states_csv(&grid, &spectrum)),
    ])
}

fn variational(config: &ExperimentConfig) -> Result<Vec<Artifact>, Error> {
    let grid = config.core_grid();
    let potential = config.core_potential();
    let m = config.solver.as_ref().expect("resolved").states;
    let opts = config
        .variational
        .as_ref()
        .expect("resolved")
        .to_core(config.seed);
    let out = minimize_functional_detailed(&potential, &grid, m, &opts)?;
    let mut table = String::from("index,energy,residual,iterations,gradient_norm\n");
    for (k, pair) in out.spectrum.pairs().iter().enumerate() {
        let r = residual_norm(pair, &potential)?;
        table.push_str(&format!(
            "{k},{},{},{},{}\n",
            num(pair.energy),
            num(r),
            out.iterations[k],
            num(out.gradient_norms[k])
        ));
    }
    let mut history = String::from("index,iteration,functional\n");
    for (k, trace) in out.history.iter().enumerate() {
        for (it, f) in trace.iter().enumerate() {
            history.push_str(&format!("{k},{it},{}\n", num(*f)));
        }
    }
    Ok(vec![
        ("spectrum.csv", table),
        ("states.csv", states_csv(&grid, &out.spectrum)),
        ("history.csv", history),
    ])
}

#[derive(Serialize)]
struct ConsistencyDocument {
    indices: Vec<usize>,
    coefficients: Vec<[f64; 2]>,
    basis_energies: Vec<f64>,
    /// `Σ|c|²E² - (Σ|c|²E)²` from the basis energies.
    predicted_variance: f64,
    assigned_energy: f64,
    mean_energy: f64,
    energy_variance: f64,
    el_residual: f64,
    tolerance: f64,
    observable: bool,
    /// `max |R(q)|` of the Hamilton-Jacobi residual; absent when the state
    /// has nodes.
    hj_residual_max: Option<f64>,
    node_count: usize,
}

fn consistency(config: &ExperimentConfig) -> Result<Vec<Artifact>, Error> {
    let grid = config.core_grid();
    let potential = config.core_potential();
    let section = config.consistency.as_ref().expect("resolved");
    let m = section.indices.iter().max().expect("non-empty") + 1;
    let spectrum = solve_spectrum(&potential, &grid, m)?;
    let coefficients = section.coefficients();

    let mut psi = ScalarField::zeros(grid);
    for (&i, &c) in section.indices.iter().zip(&coefficients) {
        psi = psi.combine(Complex64::new(1.0, 0.0), spectrum.state(i), c)?;
    }
    let energies: Vec<f64> = section
        .indices
        .iter()
        .map(|&i| spectrum.pairs()[i].energy)
        .collect();
    let weights: Vec<f64> = coefficients.iter().map(|c| c.norm_sqr()).collect();
    let mean: f64 = weights.iter().zip(&energies).map(|(w, e)| w * e).sum();
    let predicted: f64 = weights
        .iter()
        .zip(&energies)
        .map(|(w, e)| w * (e - mean) * (e - mean))
        .sum();

    let assigned = match section.assigned_energy {
        Some(e) => e,
        None => qinfluence_core::consistency::energy_moments(&psi, &potential)?.mean,
    };
    let report = observability_verdict(&psi, assigned, &potential, section.tolerance)?;
    let (hj_residual_max, node_count) =
        match pointwise_hj_residual(&psi, assigned, &potential, section.node_eps) {
            Ok(r) => (
                Some(r.values().iter().map(|v| v.norm()).fold(0.0, f64::max)),
                0,
            ),
            Err(Error::Nodes { indices }) => (None, indices.len()),
            Err(e) => return Err(e),
        };
    let doc = ConsistencyDocument {
        indices: section.indices.clone(),
        coefficients: coefficients.iter().map(|c| [c.re, c.im]).collect(),
        basis_energies: energies,
        predicted_variance: predicted,
        assigned_energy: report.assigned_energy,
        mean_energy: report.mean_energy,
        energy_variance: report.energy_variance,
        el_residual: report.el_residual,
        tolerance: report.tolerance,
        observable: report.observable,
        hj_residual_max,
        node_count,
    };
    Ok(vec![("report.json", json(&doc))])
}

#[derive(Serialize)]
struct FringeDocument {
    mode: ModeKind,
    eta: Option<f64>,
    /// Far-field prediction `λL/d`.
    expected_spacing: f64,
    spacing: Option<f64>,
    visibility: f64,
    maxima: Vec<f64>,
    /// Fourier component at `d/(λL)` relative to the total intensity.
    fourier_ratio: f64,
}

fn doubleslit(config: &ExperimentConfig) -> Result<Vec<Artifact>, Error> {
    let section = config.slits.as_ref().expect("resolved");
    let slits = section.to_core();
    let p = pattern(&slits)?;
    let metrics = fringe_metrics(&p);
    let expected = slits.fraunhofer_spacing();
    let doc = FringeDocument {
        mode: section.mode,
        eta: section.eta,
        expected_spacing: expected,
        spacing: metrics.spacing,
        visibility: metrics.visibility,
        maxima: metrics.maxima,
        fourier_ratio: fourier_ratio(&p, 1.0 / expected),
    };
    Ok(vec![
        ("pattern.csv", pattern_csv(&p)),
        ("fringe_metrics.json", json(&doc)),
    ])
}

fn sample(config: &ExperimentConfig) -> Result<Vec<Artifact>, Error> {
    let slits = config.slits.as_ref().expect("resolved").to_core();
    let hits = config.sample.as_ref().expect("resolved").hits;
    let p = pattern(&slits)?;
    let counts = sample_hits(&p, hits, config.seed)?;
    let mut table = String::from("x,count\n");
    for (x, c) in p.bin_centers().iter().zip(&counts) {
        table.push_str(&format!("{},{c}\n", num(*x)));
    }
    Ok(vec![("hits.csv", table)])
}

/// Stable snake-case name for a core error, used in the run summary.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidGrid(_) => "invalid_grid",
        Error::LengthMismatch { .. } => "length_mismatch",
        Error::NonFinite(_) => "non_finite",
        Error::GridMismatch => "grid_mismatch",
        Error::InvalidParameter { .. } => "invalid_parameter",
        Error::TooManyStates { .. } => "too_many_states",
        Error::EigenNoConvergence { .. } => "eigen_no_convergence",
        Error::VariationalNoConvergence { .. } => "variational_no_convergence",
        Error::NotNormalized { .. } => "not_normalized",
        Error::Nodes { .. } => "nodes",
        Error::WrongMode { .. } => "wrong_mode",
    }
}
