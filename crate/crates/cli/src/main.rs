//! `cmph`: exact and numerical levels of `V = ar² + br − c/r − d/r²`.

mod commands;
mod config;
mod failure;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cmph::{Branch, Quantity, SweepVariable, UnitLabel};

use crate::config::{Command, Format, RunConfig, Span};
use crate::failure::Failure;

#[derive(Parser)]
#[command(
    name = "cmph",
    version,
    about = "Bound states of the Cornell-modified plus harmonic potential"
)]
#[command(
    after_help = "Exit status: 0 ok, 2 bad input, 3 no convergence, 4 oracle bracket failure, 5 validation failure, 10 I/O."
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Constrained c, energy, nodes and matching residual for each level.
    Spectrum(Flags),
    /// The c that makes each level exact for the given b, or b for a given c (n ≤ 1).
    Constrain(Flags),
    /// Normalized ψ on a uniform grid from the origin.
    Wavefunction(Flags),
    /// Compares each exact level with the Numerov oracle.
    Verify(Flags),
    /// Quantum-dot energies or ψ over a range of ω or c.
    Sweep(Flags),
    /// The three ground states of V = r²/32 + r − c/r.
    Table1(Flags),
    /// Runs the command named in the config file.
    Run(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// INI or JSON file; flags override its values. JSON output documents are accepted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// natural, ev-nm or ev-fm.
    #[arg(long, value_parser = parse_serde::<UnitLabel>)]
    units: Option<UnitLabel>,
    /// In electron masses for the eV systems (default 0.05), 1 in natural units.
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Sets a = mω²/2.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    d: Option<f64>,
    /// Radial quantum number or inclusive range, e.g. 0..2.
    #[arg(long)]
    n: Option<Span>,
    /// Angular momentum or inclusive range.
    #[arg(long)]
    l: Option<Span>,
    /// Root of b(c) for n = 1: positive-node or negative-node.
    #[arg(long, value_parser = parse_serde::<Branch>)]
    branch: Option<Branch>,
    /// Numerov steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Sweep variable: omega or c.
    #[arg(long)]
    variable: Option<SweepVariable>,
    #[arg(long, allow_negative_numbers = true)]
    lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hi: Option<f64>,
    /// Sweep or grid points.
    #[arg(long)]
    points: Option<usize>,
    /// E0, E1 or psi0.
    #[arg(long)]
    quantity: Option<Quantity>,
    /// Radius at which psi0 is sampled; defaults to the oscillator length.
    #[arg(long)]
    probe_radius: Option<f64>,
    /// Outer end of the wave-function grid.
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Flags {
    fn into_parts(self) -> (Option<PathBuf>, RunConfig) {
        let cfg = RunConfig {
            command: None,
            units: self.units,
            mass: self.mass,
            a: self.a,
            omega: self.omega,
            b: self.b,
            c: self.c,
            d: self.d,
            n: self.n,
            l: self.l,
            branch: self.branch,
            steps: self.steps,
            variable: self.variable,
            lo: self.lo,
            hi: self.hi,
            points: self.points,
            quantity: self.quantity,
            probe_radius: self.probe_radius,
            r_max: self.r_max,
            format: self.format,
            output: self.output,
        };
        (self.config, cfg)
    }
}

fn parse_serde<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn run(command: Option<Command>, flags: Flags) -> Result<(), Failure> {
    let (path, overrides) = flags.into_parts();
    let file = match path {
        Some(p) => RunConfig::from_file(&p)?,
        None => RunConfig::default(),
    };
    let mut cfg = file.overlay(overrides);
    if command.is_some() {
        cfg.command = command;
    }
    let command = cfg.command.ok_or_else(|| {
        Failure::Usage("no command: name one or set `command` in the config file".into())
    })?;
    let outcome = commands::execute(command, &cfg)?;
    match &cfg.output {
        Some(path) => fs::write(path, &outcome.body)
            .map_err(|e| Failure::io(e, format!("writing {}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&outcome.body)
                .and_then(|_| out.flush())
                .map_err(|e| Failure::io(e, "writing to stdout".into()))?;
        }
    }
    outcome.status
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Spectrum(f) => (Some(Command::Spectrum), f),
        Sub::Constrain(f) => (Some(Command::Constrain), f),
        Sub::Wavefunction(f) => (Some(Command::Wavefunction), f),
        Sub::Verify(f) => (Some(Command::Verify), f),
        Sub::Sweep(f) => (Some(Command::Sweep), f),
        Sub::Table1(f) => (Some(Command::Table1), f),
        Sub::Run(f) => (None, f),
    };
    match run(command, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
