use std::path::PathBuf;

use abel_core::poly::ComplexPolynomial;
use abel_core::probe::{lift_path, parse_point, parse_polyline, LiftMap, LiftStatus};
use abel_core::Complex64;
use clap::Args;
use serde::Serialize;

use crate::output::{write_json, write_payload, RunInfo};
use crate::{read_json, Failure, Outcome};

#[derive(Args)]
pub struct LiftArgs {
    /// `square`, `exp`, or a JSON coefficient list for a polynomial.
    #[arg(long)]
    pub g: String,
    /// Polyline `x,y:x,y:...` in the image plane.
    #[arg(long)]
    pub path: String,
    /// Preimage of the first vertex.
    #[arg(long)]
    pub start: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct LiftConfig {
    g: LiftMap,
    path: Vec<Complex64>,
    start: Complex64,
    tol: f64,
}

/// Samples go to the CSV; the JSON keeps everything else.
#[derive(Serialize)]
struct LiftReport {
    config: LiftConfig,
    status: LiftStatus,
    path_length: f64,
    samples: usize,
    endpoint: Complex64,
    vertex_values: Vec<Complex64>,
    max_defect: f64,
}

fn lift_map(spec: &str) -> Result<LiftMap, Failure> {
    match spec {
        "square" => Ok(LiftMap::square()),
        "exp" => Ok(LiftMap::Exp),
        path => {
            let p: ComplexPolynomial = read_json(&PathBuf::from(path))?;
            Ok(LiftMap::Poly { p })
        }
    }
}

pub fn run(args: &LiftArgs, run: &RunInfo) -> Outcome {
    let g = lift_map(&args.g)?;
    let path = parse_polyline(&args.path)?;
    let start = parse_point(&args.start)?;
    let result = lift_path(&g, &path, start, args.tol)?;
    let end = result.endpoint();
    println!(
        "status {:?}  endpoint ({}, {})  max defect {:.3e}  samples {}",
        result.status,
        end.re,
        end.im,
        result.max_defect,
        result.samples.len()
    );
    let config = LiftConfig {
        g,
        path,
        start,
        tol: args.tol,
    };
    let report = LiftReport {
        config,
        status: result.status,
        path_length: result.path_length,
        samples: result.samples.len(),
        endpoint: end,
        vertex_values: result.vertex_values.clone(),
        max_defect: result.max_defect,
    };
    write_json(run, &args.out.join("lift.json"), &report)?;
    write_payload(run, &args.out.join("lift.csv"), &result.to_csv())?;
    match result.status {
        LiftStatus::Complete => Ok(()),
        LiftStatus::CriticalPointHit { index } => Err(Failure::Invariant(format!(
            "lift stalled at a critical value after sample {index}"
        ))),
        LiftStatus::Diverged { index } => Err(Failure::Stage(format!("lift diverged after sample {index}"))),
    }
}
