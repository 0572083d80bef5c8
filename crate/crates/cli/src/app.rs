//! Command-line entry: argument parsing, orchestration and the run summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_raw, resolve, Command, ConfigError, ExperimentConfig, DEFAULT_OUT_DIR};
use crate::output::{json, write_atomic};
use crate::run::{error_kind, execute};

pub const EXIT_OK: u8 = 0;
pub const EXIT_COMPUTE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(
    name = "qinfluence",
    version,
    about = "Finite-difference spectra, variational minimization, consistency checks and double-slit patterns"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Lowest eigenpairs by bisection and inverse iteration.
    Eigensolve(RunArgs),
    /// Lowest eigenpairs by constrained minimization of the functional.
    Variational(RunArgs),
    /// Energy dispersion and observability verdict for a superposition.
    Consistency(RunArgs),
    /// Detector pattern and fringe metrics.
    Doubleslit(RunArgs),
    /// Seeded detector hits drawn from the pattern.
    Sample(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML experiment description.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random seed; overrides the top-level `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CliCommand {
    fn split(&self) -> (Command, &RunArgs) {
        match self {
            CliCommand::Eigensolve(a) => (Command::Eigensolve, a),
            CliCommand::Variational(a) => (Command::Variational, a),
            CliCommand::Consistency(a) => (Command::Consistency, a),
            CliCommand::Doubleslit(a) => (Command::Doubleslit, a),
            CliCommand::Sample(a) => (Command::Sample, a),
        }
    }
}

#[derive(Debug, Serialize)]
struct Overrides {
    out: Option<String>,
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Diagnostic {
    kind: String,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
}

#[derive(Debug, Serialize)]
struct Summary {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: Command,
    status: &'static str,
    exit_code: u8,
    config_path: String,
    config_text: Option<String>,
    config: Option<ExperimentConfig>,
    overrides: Overrides,
    warnings: Vec<String>,
    outputs: Vec<String>,
    error: Option<Diagnostic>,
    wall_time_seconds: f64,
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let start = Instant::now();
    let (command, args) = cli.command.split();
    let mut summary = Summary {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        core_version: qinfluence_core::VERSION,
        command,
        status: "ok",
        exit_code: EXIT_OK,
        config_path: args.config.display().to_string(),
        config_text: None,
        config: None,
        overrides: Overrides {
            out: args.out.as_ref().map(|p| p.display().to_string()),
            seed: args.seed,
        },
        warnings: Vec::new(),
        outputs: Vec::new(),
        error: None,
        wall_time_seconds: 0.0,
    };
    let mut out_dir = args.out.clone();

    let outcome = stage(args, command, &mut summary, &mut out_dir);
    if let Err((status, code, diag)) = outcome {
        eprintln!("error: {}", diag.message);
        summary.status = status;
        summary.exit_code = code;
        summary.error = Some(diag);
    }
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }

    let dir = out_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    summary.wall_time_seconds = start.elapsed().as_secs_f64();
    if let Err(e) = write_atomic(&dir.join(SUMMARY_FILE), json(&summary).as_bytes()) {
        eprintln!(
            "error: cannot write {}: {e}",
            dir.join(SUMMARY_FILE).display()
        );
        if summary.exit_code == EXIT_OK {
            return EXIT_COMPUTE;
        }
    }
    summary.exit_code
}

type Failure = (&'static str, u8, Diagnostic);

fn config_failure(e: ConfigError) -> Failure {
    let kind = match e {
        ConfigError::Syntax(_) => "syntax",
        ConfigError::Semantic { .. } => "semantic",
    };
    (
        "config_error",
        EXIT_CONFIG,
        Diagnostic {
            kind: kind.to_string(),
            message: e.to_string(),
            path: e.path().map(str::to_string),
        },
    )
}

fn stage(
    args: &RunArgs,
    command: Command,
    summary: &mut Summary,
    out_dir: &mut Option<PathBuf>,
) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        config_failure(ConfigError::Semantic {
            path: "--config".into(),
            message: format!("cannot read {}: {e}", args.config.display()),
        })
    })?;
    summary.config_text = Some(text.clone());

    let mut raw = parse_raw(&text).map_err(config_failure)?;
    if let Some(seed) = args.seed {
        raw.seed = Some(seed);
    }
    if out_dir.is_none() {
        *out_dir = raw
            .output
            .as_ref()
            .and_then(|o| o.dir.as_ref())
            .map(PathBuf::from);
    }
    let (mut config, warnings) = resolve(raw, command).map_err(config_failure)?;
    summary.warnings.extend(warnings);
    if let Some(out) = &args.out {
        config.output.dir = out.display().to_string();
    }
    *out_dir = Some(PathBuf::from(&config.output.dir));
    summary.config = Some(config.clone());

    let artifacts = execute(&config).map_err(|e| {
        (
            "computational_error",
            EXIT_COMPUTE,
            Diagnostic {
                kind: error_kind(&e).to_string(),
                message: e.to_string(),
                path: None,
            },
        )
    })?;
    let dir = Path::new(&config.output.dir);
    for (name, contents) in artifacts {
        write_atomic(&dir.join(name), contents.as_bytes()).map_err(|e| {
            (
                "io_error",
                EXIT_COMPUTE,
                Diagnostic {
                    kind: "io".to_string(),
                    message: format!("cannot write {}: {e}", dir.join(name).display()),
                    path: None,
                },
            )
        })?;
        summary.outputs.push(name.to_string());
    }
    Ok(())
}
