use std::path::PathBuf;
use std::process::ExitCode;

use ballinterp_cli::config::RunConfig;
use ballinterp_cli::input::read_points_file;
use ballinterp_cli::{run, CliError, Command};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ballinterp", version, about = "Numerical checks for interpolation in weighted spaces on the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration (schema 1); defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed; overrides the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV point sequence (re1,im1,…[,mass]); overrides the configured sequence.
    #[arg(long, global = true)]
    points: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Automorphism identities.
    Geom,
    /// Quadrature moments, slice integration, reproducing kernels, isometries.
    Quad,
    /// Decomposition f = G·φ_a.
    Gleason,
    /// Kernel interpolation and the Gram matrix.
    Interp,
    /// Dual basis from roots of unity.
    Drury,
    /// Interpolating vector function and its matrix.
    Amar,
    /// Window constant of the sequence measure.
    Carleson,
    /// Smooth extension and its ∂̄ identities.
    SmoothCheck,
    /// Every subcommand in one report.
    All,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Geom => Command::Geom,
            Cmd::Quad => Command::Quad,
            Cmd::Gleason => Command::Gleason,
            Cmd::Interp => Command::Interp,
            Cmd::Drury => Command::Drury,
            Cmd::Amar => Command::Amar,
            Cmd::Carleson => Command::Carleson,
            Cmd::SmoothCheck => Command::SmoothCheck,
            Cmd::All => Command::All,
        }
    }
}

fn main_inner(cli: Cli) -> Result<bool, CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.seed);
    let points = cli.points.as_deref().map(read_points_file).transpose()?;
    let report = run(cli.command.into(), &cfg, seed, points)?;
    if let Some(out) = &cli.out {
        std::fs::write(out, report.to_json() + "\n")?;
    }
    if cli.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.summary());
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
