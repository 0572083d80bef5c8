//! TOML experiment descriptions.
//!
//! Parsing happens in two stages: serde reads the raw document (rejecting
//! unknown keys), then [`resolve`] checks the sections the command needs,
//! fills documented defaults and validates against the core types. The
//! resolved [`ExperimentConfig`] is what gets echoed into the run summary.

use num_complex::Complex64;
use qinfluence_core::doubleslit::MIN_BINS;
use qinfluence_core::{
    Boundary, Error as CoreError, Grid, Potential, Preconditioner, SlitConfig, VariationalOptions,
    VisibilityMode,
};
use serde::{Deserialize, Serialize};

/// Coefficient vectors within this distance of unit norm are used as is.
pub const NORM_EXACT: f64 = 1e-10;
/// Beyond [`NORM_EXACT`] and up to this distance they are rescaled with a
/// warning; further away they are rejected.
pub const NORM_LIMIT: f64 = 1e-6;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_OUT_DIR: &str = "out";
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_NODE_EPS: f64 = 1e-12;
pub const DEFAULT_HITS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eigensolve,
    Variational,
    Consistency,
    Doubleslit,
    Sample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigensolve => "eigensolve",
            Command::Variational => "variational",
            Command::Consistency => "consistency",
            Command::Doubleslit => "doubleslit",
            Command::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    /// Malformed document or a key/type the schema does not know.
    #[error("{}", .0.trim_end())]
    Syntax(String),
    /// Well-formed but invalid; `path` is the dotted field path.
    #[error("`{path}`: {message}")]
    Semantic { path: String, message: String },
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Semantic {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax(_) => None,
            ConfigError::Semantic { path, .. } => Some(path),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub grid: Option<GridSection>,
    pub potential: Option<PotentialSection>,
    pub solver: Option<SolverSection>,
    pub variational: Option<RawVariational>,
    pub consistency: Option<RawConsistency>,
    pub slits: Option<RawSlits>,
    pub sample: Option<RawSample>,
    pub output: Option<RawOutput>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub q_min: f64,
    pub q_max: f64,
    pub n: usize,
    pub boundary: BoundaryKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSection {
    Free {},
    Harmonic { omega: f64 },
    Barrier { height: f64, q_lo: f64, q_hi: f64 },
    Tabulated { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub states: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreconditionerKind {
    None,
    ShiftedHamiltonian,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVariational {
    pub step: Option<f64>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub preconditioner: Option<PreconditionerKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalSection {
    pub step: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub preconditioner: PreconditionerKind,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConsistency {
    pub indices: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub coefficients_im: Option<Vec<f64>>,
    pub assigned_energy: Option<f64>,
    pub tolerance: Option<f64>,
    pub node_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencySection {
    pub indices: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub coefficients_im: Vec<f64>,
    /// `None` means the mean energy of the state.
    pub assigned_energy: Option<f64>,
    pub tolerance: f64,
    pub node_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Individual,
    Full,
    Partial,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSlits {
    pub separation: f64,
    pub screen_distance: f64,
    pub wavenumber: f64,
    pub screen_halfwidth: f64,
    pub bins: usize,
    pub alpha1: Option<[f64; 2]>,
    pub alpha2: Option<[f64; 2]>,
    pub mode: Option<ModeKind>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlitSection {
    pub separation: f64,
    pub screen_distance: f64,
    pub wavenumber: f64,
    pub screen_halfwidth: f64,
    pub bins: usize,
    pub alpha1: [f64; 2],
    pub alpha2: [f64; 2],
    pub mode: ModeKind,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSample {
    pub hits: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSection {
    pub hits: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSection {
    pub dir: String,
}

/// A validated experiment with every default made explicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variational: Option<VariationalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slits: Option<SlitSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSection>,
    pub output: OutputSection,
}

pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
}

/// Parses and validates `text` for `command`. Returns the resolved config
/// and any warnings (ignored sections, renormalized coefficients).
pub fn parse_config(
    text: &str,
    command: Command,
) -> Result<(ExperimentConfig, Vec<String>), ConfigError> {
    resolve(parse_raw(text)?, command)
}

pub fn resolve(
    raw: RawConfig,
    command: Command,
) -> Result<(ExperimentConfig, Vec<String>), ConfigError> {
    let mut warnings = Vec::new();
    if let Some(declared) = raw.command {
        if declared != command {
            return Err(ConfigError::at(
                "command",
                format!(
                    "config declares `{}` but `{}` was invoked",
                    declared.name(),
                    command.name()
                ),
            ));
        }
    }

    use Command::*;
    let needs_grid = matches!(command, Eigensolve | Variational | Consistency);
    let needs_slits = matches!(command, Doubleslit | Sample);
    let present = [
        ("grid", raw.grid.is_some(), needs_grid),
        ("potential", raw.potential.is_some(), needs_grid),
        (
            "solver",
            raw.solver.is_some(),
            matches!(command, Eigensolve | Variational),
        ),
        (
            "variational",
            raw.variational.is_some(),
            command == Variational,
        ),
        (
            "consistency",
            raw.consistency.is_some(),
            command == Consistency,
        ),
        ("slits", raw.slits.is_some(), needs_slits),
        ("sample", raw.sample.is_some(), command == Sample),
    ];
    for (name, is_present, used) in present {
        if is_present && !used {
            warnings.push(format!(
                "section `{name}` is ignored by `{}`",
                command.name()
            ));
        }
    }

    let mut config = ExperimentConfig {
        command,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        grid: None,
        potential: None,
        solver: None,
        variational: None,
        consistency: None,
        slits: None,
        sample: None,
        output: OutputSection {
            dir: raw
                .output
                .and_then(|o| o.dir)
                .unwrap_or_else(|| DEFAULT_OUT_DIR.to_string()),
        },
    };
    if config.output.dir.is_empty() {
        return Err(ConfigError::at("output.dir", "must not be empty"));
    }

    if needs_grid {
        let grid = raw.grid.ok_or_else(|| missing("grid"))?;
        let potential = raw.potential.ok_or_else(|| missing("potential"))?;
        let core_grid = build_grid(&grid)?;
        build_potential(&potential, &core_grid)?;
        config.grid = Some(grid);
        config.potential = Some(potential);
    }

    match command {
        Eigensolve | Variational => {
            let solver = raw.solver.ok_or_else(|| missing("solver"))?;
            let max = config.core_grid().max_states();
            if solver.states == 0 {
                return Err(ConfigError::at("solver.states", "must be at least 1"));
            }
            if solver.states > max {
                return Err(ConfigError::at(
                    "solver.states",
                    format!("at most {max} states exist on this grid"),
                ));
            }
            config.solver = Some(solver);
            if command == Variational {
                config.variational = Some(resolve_variational(
                    raw.variational.unwrap_or_default(),
                    config.seed,
                )?);
            }
        }
        Consistency => {
            let raw_c = raw.consistency.ok_or_else(|| missing("consistency"))?;
            let max = config.core_grid().max_states();
            config.consistency = Some(resolve_consistency(raw_c, max, &mut warnings)?);
        }
        Doubleslit | Sample => {
            let slits = raw.slits.ok_or_else(|| missing("slits"))?;
            config.slits = Some(resolve_slits(slits, &mut warnings)?);
            if command == Sample {
                let hits = raw.sample.and_then(|s| s.hits).unwrap_or(DEFAULT_HITS);
                if hits == 0 {
                    return Err(ConfigError::at("sample.hits", "must be at least 1"));
                }
                config.sample = Some(SampleSection { hits });
            }
        }
    }
    Ok((config, warnings))
}

fn missing(section: &str) -> ConfigError {
    ConfigError::at(section, "required section is missing")
}

fn core_error(section: &str, e: CoreError) -> ConfigError {
    match e {
        CoreError::InvalidParameter { name, reason } => {
            ConfigError::at(format!("{section}.{name}"), reason)
        }
        other => ConfigError::at(section, other.to_string()),
    }
}

fn build_grid(g: &GridSection) -> Result<Grid, ConfigError> {
    let boundary = match g.boundary {
        BoundaryKind::Dirichlet => Boundary::Dirichlet,
        BoundaryKind::Periodic => Boundary::Periodic,
    };
    Grid::new(g.q_min, g.q_max, g.n, boundary).map_err(|e| core_error("grid", e))
}

fn build_potential(p: &PotentialSection, grid: &Grid) -> Result<Potential, ConfigError> {
    let potential = p.to_core();
    potential.samples(grid).map_err(|e| match e {
        CoreError::LengthMismatch { expected, found } => ConfigError::at(
            "potential.values",
            format!("{found} samples given but the grid has {expected}"),
        ),
        CoreError::NonFinite(i) => {
            ConfigError::at(format!("potential.values[{i}]"), "must be finite")
        }
        CoreError::InvalidParameter {
            name: "omega",
            reason,
        } => ConfigError::at("potential.omega", reason),
        other => core_error("potential", other),
    })?;
    Ok(potential)
}

fn resolve_variational(raw: RawVariational, seed: u64) -> Result<VariationalSection, ConfigError> {
    let d = VariationalOptions::default();
    let section = VariationalSection {
        step: raw.step.unwrap_or(d.step),
        max_iters: raw.max_iters.unwrap_or(d.max_iters),
        tol: raw.tol.unwrap_or(d.tol),
        preconditioner: raw.preconditioner.unwrap_or(match d.preconditioner {
            Preconditioner::None => PreconditionerKind::None,
            Preconditioner::ShiftedHamiltonian => PreconditionerKind::ShiftedHamiltonian,
        }),
    };
    section
        .to_core(seed)
        .validate()
        .map_err(|e| core_error("variational", e))?;
    Ok(section)
}

/// Checks `Σ|c|² = 1`, rescaling inside the warning band.
fn normalize_weights(
    path: &str,
    parts: &mut [&mut f64],
    warnings: &mut Vec<String>,
) -> Result<(), ConfigError> {
    let norm_sq: f64 = parts.iter().map(|v| **v * **v).sum();
    let dev = (norm_sq - 1.0).abs();
    if !dev.is_finite() || dev > NORM_LIMIT {
        return Err(ConfigError::at(
            path,
            format!("squared norm {norm_sq} differs from 1 by more than {NORM_LIMIT:e}"),
        ));
    }
    if dev > NORM_EXACT {
        let norm = norm_sq.sqrt();
        for v in parts.iter_mut() {
            **v /= norm;
        }
        warnings.push(format!(
            "`{path}`: squared norm {norm_sq} renormalized to 1"
        ));
    }
    Ok(())
}

fn resolve_consistency(
    raw: RawConsistency,
    max_states: usize,
    warnings: &mut Vec<String>,
) -> Result<ConsistencySection, ConfigError> {
    if raw.indices.is_empty() {
        return Err(ConfigError::at("consistency.indices", "must not be empty"));
    }
    for (pos, &i) in raw.indices.iter().enumerate() {
        if i >= max_states {
            return Err(ConfigError::at(
                format!("consistency.indices[{pos}]"),
                format!("index {i} exceeds the {max_states} states of this grid"),
            ));
        }
        if raw.indices[..pos].contains(&i) {
            return Err(ConfigError::at(
                format!("consistency.indices[{pos}]"),
                format!("index {i} is repeated"),
            ));
        }
    }
    let n = raw.indices.len();
    if raw.coefficients.len() != n {
        return Err(ConfigError::at(
            "consistency.coefficients",
            format!("expected {n} entries, one per index"),
        ));
    }
    let mut re = raw.coefficients;
    let mut im = raw.coefficients_im.unwrap_or_else(|| vec![0.0; n]);
    if im.len() != n {
        return Err(ConfigError::at(
            "consistency.coefficients_im",
            format!("expected {n} entries, one per index"),
        ));
    }
    {
        let mut parts: Vec<&mut f64> = re.iter_mut().chain(im.iter_mut()).collect();
        normalize_weights("consistency.coefficients", &mut parts, warnings)?;
    }
    if let Some(e) = raw.assigned_energy {
        if !e.is_finite() {
            return Err(ConfigError::at(
                "consistency.assigned_energy",
                "must be finite",
            ));
        }
    }
    let tolerance = raw.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(ConfigError::at("consistency.tolerance", "must be positive"));
    }
    let node_eps = raw.node_eps.unwrap_or(DEFAULT_NODE_EPS);
    if !(node_eps.is_finite() && node_eps > 0.0) {
        return Err(ConfigError::at("consistency.node_eps", "must be positive"));
    }
    Ok(ConsistencySection {
        indices: raw.indices,
        coefficients: re,
        coefficients_im: im,
        assigned_energy: raw.assigned_energy,
        tolerance,
        node_eps,
    })
}

fn resolve_slits(raw: RawSlits, warnings: &mut Vec<String>) -> Result<SlitSection, ConfigError> {
    let half = 0.5f64.sqrt();
    let mut alpha1 = raw.alpha1.unwrap_or([half, 0.0]);
    let mut alpha2 = raw.alpha2.unwrap_or([half, 0.0]);
    {
        let [a, b] = &mut alpha1;
        let [c, d] = &mut alpha2;
        normalize_weights("slits.alpha", &mut [a, b, c, d], warnings)?;
    }
    let mode = raw.mode.unwrap_or(ModeKind::Full);
    match (mode, raw.eta) {
        (ModeKind::Partial, None) => {
            return Err(ConfigError::at("slits.eta", "required for mode `partial`"))
        }
        (ModeKind::Partial, Some(_)) | (_, None) => {}
        (_, Some(_)) => {
            return Err(ConfigError::at(
                "slits.eta",
                "only meaningful for mode `partial`",
            ))
        }
    }
    if raw.bins < MIN_BINS {
        return Err(ConfigError::at(
            "slits.bins",
            format!("at least {MIN_BINS} bins are required"),
        ));
    }
    let section = SlitSection {
        separation: raw.separation,
        screen_distance: raw.screen_distance,
        wavenumber: raw.wavenumber,
        screen_halfwidth: raw.screen_halfwidth,
        bins: raw.bins,
        alpha1,
        alpha2,
        mode,
        eta: raw.eta,
    };
    section.to_core().validate().map_err(|e| match e {
        CoreError::InvalidParameter {
            name: "alpha",
            reason,
        } => ConfigError::at("slits.alpha", reason),
        other => core_error("slits", other),
    })?;
    Ok(section)
}

impl ExperimentConfig {
    /// The validated grid. Panics for commands without one.
    pub fn core_grid(&self) -> Grid {
        build_grid(self.grid.as_ref().expect("command has a grid")).expect("validated grid")
    }

    pub fn core_potential(&self) -> Potential {
        self.potential
            .as_ref()
            .expect("command has a potential")
            .to_core()
    }
}

impl PotentialSection {
    pub fn to_core(&self) -> Potential {
        match self {
            PotentialSection::Free {} => Potential::Free,
            PotentialSection::Harmonic { omega } => Potential::Harmonic { omega: *omega },
            PotentialSection::Barrier { height, q_lo, q_hi } => Potential::Barrier {
                height: *height,
                q_lo: *q_lo,
                q_hi: *q_hi,
            },
            PotentialSection::Tabulated { values } => Potential::Tabulated(values.clone()),
        }
    }
}

impl VariationalSection {
    pub fn to_core(&self, seed: u64) -> VariationalOptions {
        VariationalOptions {
            step: self.step,
            max_iters: self.max_iters,
            tol: self.tol,
            seed,
            preconditioner: match self.preconditioner {
                PreconditionerKind::None => Preconditioner::None,
                PreconditionerKind::ShiftedHamiltonian => Preconditioner::ShiftedHamiltonian,
            },
        }
    }
}

impl ConsistencySection {
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .zip(&self.coefficients_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect()
    }
}

impl SlitSection {
    pub fn to_core(&self) -> SlitConfig {
        SlitConfig {
            separation: self.separation,
            screen_distance: self.screen_distance,
            wavenumber: self.wavenumber,
            screen_halfwidth: self.screen_halfwidth,
            bins: self.bins,
            alpha1: Complex64::new(self.alpha1[0], self.alpha1[1]),
            alpha2: Complex64::new(self.alpha2[0], self.alpha2[1]),
            mode: match self.mode {
                ModeKind::Individual => VisibilityMode::Individual,
                ModeKind::Full => VisibilityMode::Full,
                ModeKind::Partial => VisibilityMode::Partial {
                    eta: self.eta.unwrap_or(0.0),
                },
            },
        }
    }
}
