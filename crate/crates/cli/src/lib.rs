//! Batch front-end: configuration, point sequences, orchestration and reports.

pub mod config;
pub mod input;
pub mod report;
pub mod sections;

use std::collections::BTreeMap;
use std::time::Instant;

use config::RunConfig;
use input::PointInput;
use report::{Report, Section};
use sections::Context;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("{context}: {source}")]
    Module {
        context: String,
        #[source]
        source: ballinterp::Error,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Every error is a configuration or input problem as far as the exit code goes.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Geom,
    Quad,
    Gleason,
    Interp,
    Drury,
    Amar,
    Carleson,
    SmoothCheck,
    All,
}

impl Command {
    pub const SECTIONS: [Command; 8] = [
        Command::Geom,
        Command::Quad,
        Command::Gleason,
        Command::Interp,
        Command::Drury,
        Command::Amar,
        Command::Carleson,
        Command::SmoothCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Geom => "geom",
            Command::Quad => "quad",
            Command::Gleason => "gleason",
            Command::Interp => "interp",
            Command::Drury => "drury",
            Command::Amar => "amar",
            Command::Carleson => "carleson",
            Command::SmoothCheck => "smooth-check",
            Command::All => "all",
        }
    }

    fn needs_points(self) -> bool {
        !matches!(self, Command::Geom | Command::Quad | Command::Gleason)
    }

    fn run_section(self, ctx: &Context) -> Result<Section, CliError> {
        match self {
            Command::Geom => sections::geom::run(ctx),
            Command::Quad => sections::quad::run(ctx),
            Command::Gleason => sections::gleason::run(ctx),
            Command::Interp => sections::interp::interp(ctx),
            Command::Drury => sections::interp::drury(ctx),
            Command::Amar => sections::amar::run(ctx),
            Command::Carleson => sections::carleson::run(ctx),
            Command::SmoothCheck => sections::smooth::run(ctx),
            Command::All => unreachable!("expanded by run"),
        }
    }
}

/// Run one subcommand (or all of them). `points` overrides the configured sequence.
pub fn run(cmd: Command, cfg: &RunConfig, seed: u64, points: Option<PointInput>) -> Result<Report, CliError> {
    cfg.validate()?;
    let list: Vec<Command> = if cmd == Command::All { Command::SECTIONS.to_vec() } else { vec![cmd] };
    let input = if list.iter().any(|c| c.needs_points()) {
        let input = match points {
            Some(p) => p,
            None => input::generate_sequence(&cfg.sequence, cfg.n, seed)?,
        };
        if input.seq.dim() != cfg.n {
            return Err(CliError::Input(format!("points live in C^{} but n = {}", input.seq.dim(), cfg.n)));
        }
        Some(input)
    } else {
        None
    };
    let ctx = Context {
        cfg,
        seed,
        input: input.as_ref(),
    };
    let mut sections = BTreeMap::new();
    let mut timing = BTreeMap::new();
    for c in list {
        let start = Instant::now();
        let section = c.run_section(&ctx)?;
        timing.insert(c.name().to_string(), start.elapsed().as_secs_f64() * 1e3);
        sections.insert(c.name().to_string(), section);
    }
    let pass = sections.values().all(Section::pass);
    let mut config = cfg.clone();
    config.seed = seed;
    Ok(Report {
        subcommand: cmd.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        config,
        sections,
        pass,
        timing,
    })
}
