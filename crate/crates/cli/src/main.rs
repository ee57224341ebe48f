mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::Run;
use config::Config;
use manifest::Manifest;

#[derive(Parser)]
#[command(name = "dbar", version, about = "D-bar inverse scattering at negative energy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat TOML file of run keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Use the published grid and mesh sizes instead of the desk defaults.
    #[arg(long)]
    paper_scale: bool,
    #[command(flatten)]
    keys: Config,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate g_λ(z) on a square of z values.
    GreenEval(Common),
    /// D-bar residual of LS-computed CGO solutions over a |λ| sweep.
    ValidateGreen(Common),
    /// FEM DN matrices Λ_q and Λ_{−E} for a test case.
    SimulateDn(Common),
    /// Scattering transform from DN data, before and after truncation.
    Scatter(Common),
    /// Potential reconstruction.
    ReconstructQ(Common),
    /// Conductivity reconstruction.
    ReconstructSigma(Common),
    /// Map of t over (α, |λ|) flagging LS blow-ups.
    ScanExceptional(Common),
    /// Diffusion coefficient reconstruction for a DOT scene.
    Dot(Common),
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    type Handler = fn(&Run, &mut Manifest) -> Result<()>;
    let (name, common, handler): (&'static str, Common, Handler) = match cli.command {
        Command::GreenEval(c) => ("green-eval", c, commands::green_eval),
        Command::ValidateGreen(c) => ("validate-green", c, commands::validate_green_cmd),
        Command::SimulateDn(c) => ("simulate-dn", c, commands::simulate_dn),
        Command::Scatter(c) => ("scatter", c, commands::scatter),
        Command::ReconstructQ(c) => ("reconstruct-q", c, commands::reconstruct_q),
        Command::ReconstructSigma(c) => ("reconstruct-sigma", c, commands::reconstruct_sigma),
        Command::ScanExceptional(c) => ("scan-exceptional", c, commands::scan),
        Command::Dot(c) => ("dot", c, commands::dot),
    };
    let file = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let cfg = file.overlay(&common.keys)?;
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let mut manifest = Manifest::new(name, &cfg, common.paper_scale);
    if let Some(p) = &common.config {
        manifest.param("config_file", p)?;
    }
    let run = Run {
        cfg: &cfg,
        out: &common.out,
        paper_scale: common.paper_scale,
    };
    handler(&run, &mut manifest)?;
    let path = manifest.write(&common.out)?;
    println!("{}", path.display());
    Ok(())
}
