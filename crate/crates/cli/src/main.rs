//! `abel-lab`: reproducible driver for builds, probes, lifts and geometry checks.
//!
//! Exit codes: 0 ok, 1 config, 2 invariant violated, 3 stage failure,
//! 4 reciprocal certificate failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod build;
mod geometry;
mod lift;
mod output;
mod probe;

use std::path::PathBuf;
use std::process::ExitCode;

use abel_core::{Complex64, Error};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "abel-lab", version, about = "Numerical lab for Abel universal functions")]
struct Cli {
    /// Seed for randomized suites; recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Möbius identity, image-circle and radial-threshold checks.
    Geometry(geometry::GeometryArgs),
    /// Staged constructions.
    Build {
        #[command(subcommand)]
        kind: build::BuildKind,
    },
    /// Universality scans and budget sweeps of a built series.
    Probe(probe::ProbeArgs),
    /// Lift a polyline through `exp` or a polynomial.
    Lift(lift::LiftArgs),
}

pub enum Failure {
    Config(String),
    Invariant(String),
    Stage(String),
    Certificate(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Invariant(_) => 2,
            Failure::Stage(_) => 3,
            Failure::Certificate(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Invariant(m) | Failure::Stage(m) | Failure::Certificate(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::ReciprocalCertificate { .. } => Failure::Certificate(msg),
            Error::ConditionIiiViolated { .. } | Error::InterleavingViolated(_) => Failure::Invariant(msg),
            Error::ToleranceUnreachable { .. }
            | Error::EtaNotFound { .. }
            | Error::BasisBreakdown { .. }
            | Error::NodeSearchFailure(_)
            | Error::LiftFailed(_) => Failure::Stage(msg),
            _ => Failure::Config(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

pub type Outcome = Result<(), Failure>;

/// `"x,y"` or a bare real `"x"`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    match s.split_once(',') {
        Some(_) => abel_core::probe::parse_point(s).map_err(|e| e.to_string()),
        None => s
            .trim()
            .parse::<f64>()
            .map(|x| Complex64::new(x, 0.0))
            .map_err(|_| format!("expected a number or x,y but got {s:?}")),
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = output::RunInfo::start(cli.seed);
    let outcome = match cli.command {
        Command::Geometry(args) => geometry::run(&args, &run),
        Command::Build { kind } => build::run(&kind, &run),
        Command::Probe(args) => probe::run(&args, &run),
        Command::Lift(args) => lift::run(&args, &run),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("abel-lab: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
