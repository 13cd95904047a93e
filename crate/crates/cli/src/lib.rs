//! Command-line front end: reads a JSON configuration or a built-in preset,
//! runs one analysis and writes CSV/JSON results plus a `manifest.json`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ptwalk::Frame;

use crate::commands::Options;
use crate::config::{parse_config, parse_value, preset_document, ParsedConfig};
use crate::error::CliError;
use crate::output::{json_text, OutDir, MANIFEST_FILE};

pub const TOOL: &str = "ptwalk";

#[derive(Debug, Parser)]
#[command(name = "ptwalk", version, about = "Non-unitary quantum walk analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration file
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in configuration: experiment, four-region or homogeneous
    #[arg(long, global = true)]
    pub preset: Option<String>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Number of momenta
    #[arg(long, global = true)]
    pub grid: Option<usize>,

    /// Number of walk steps
    #[arg(long, global = true)]
    pub steps: Option<usize>,

    /// Frame of the one-step operator
    #[arg(long, global = true, value_enum, default_value_t = FrameArg::Original)]
    pub frame: FrameArg,

    /// Tolerance for spectrum and symmetry verdicts
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Complex band structure of a homogeneous walk
    Dispersion,
    /// Propagate a localized walker and classify the norm growth
    Evolve,
    /// Eigenvalues of the dense one-step operator on the ring
    Spectrum,
    /// Symmetry conditions and dense residuals
    CheckSymmetry,
    /// Gain strength at which the PT symmetry breaks
    ExceptionalPoint,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dispersion => "dispersion",
            Command::Evolve => "evolve",
            Command::Spectrum => "spectrum",
            Command::CheckSymmetry => "check-symmetry",
            Command::ExceptionalPoint => "exceptional-point",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Original,
    Symmetry,
}

impl From<FrameArg> for Frame {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Original => Frame::Original,
            FrameArg::Symmetry => Frame::Symmetry,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_path: Option<String>,
    pub preset: Option<String>,
    /// Resolved configuration and effective flags.
    pub parameters: Value,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
    pub summary: Value,
}

fn load(cli: &Cli) -> Result<ParsedConfig, CliError> {
    match (&cli.config, &cli.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_config(&text)
        }
        (None, Some(name)) => parse_value(&preset_document(name)),
        (None, None) => Err(CliError::Usage("one of --config or --preset is required".into())),
    }
}

/// Runs one subcommand and writes its outputs and manifest under `cli.out`.
pub fn execute(cli: &Cli) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let cfg = load(cli)?;
    let opts = Options {
        grid: cli.grid,
        steps: cli.steps,
        frame: cli.frame.into(),
        tol: cli.tol,
    };
    let mut out = OutDir::create(&cli.out)?;
    if out.root().join(MANIFEST_FILE).exists() {
        fs::remove_file(out.root().join(MANIFEST_FILE)).map_err(|e| CliError::io(out.root(), e))?;
    }
    let summary = match cli.command {
        Command::Dispersion => commands::dispersion(&cfg, &opts, &mut out)?,
        Command::Evolve => commands::evolve(&cfg, &opts, &mut out)?,
        Command::Spectrum => commands::spectrum(&cfg, &opts, &mut out)?,
        Command::CheckSymmetry => commands::check_symmetry(&cfg, &opts, &mut out)?,
        Command::ExceptionalPoint => commands::exceptional_point(&cfg, &opts, &mut out)?,
    };
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cli.command.name().into(),
        config_path: cli.config.as_ref().map(|p| p.display().to_string()),
        preset: cfg.preset.clone(),
        parameters: json!({
            "config": cfg.resolved,
            "grid": cli.grid,
            "steps": cli.steps,
            "frame": format!("{:?}", cli.frame).to_lowercase(),
            "tol": cli.tol,
        }),
        outputs: out.written().to_vec(),
        duration_seconds: start.elapsed().as_secs_f64(),
        summary,
    };
    let text = json_text(&serde_json::to_value(&manifest).map_err(|e| CliError::Usage(e.to_string()))?);
    out.write_text(MANIFEST_FILE, &text)?;
    Ok(manifest)
}
