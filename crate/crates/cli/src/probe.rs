use std::path::PathBuf;

use abel_core::builder::{min_modulus_sweep, telescoping_check, SweepSummary, TelescopeEntry, UniversalSeries};
use abel_core::geometry::DiscAutomorphism;
use abel_core::poly::ComplexPolynomial;
use abel_core::probe::{
    compose_left, compose_right, dilated_arc_points, exp_transfer, probe_grid, universality_scan, ExpTransfer,
    FunctionExpr, LeftOp, ScanOptions,
};
use clap::Args;
use serde::Serialize;

use crate::output::{write_json, write_payload, RunInfo};
use crate::{read_json, Failure, Outcome};

#[derive(Args)]
pub struct ProbeArgs {
    /// Series JSON written by `build`.
    #[arg(long)]
    pub series: PathBuf,
    /// Scan every (target, arc) pair over the series radii.
    #[arg(long)]
    pub scan: bool,
    /// Compose `exp` on the output side.
    #[arg(long)]
    pub exp: bool,
    /// Compose `1/·` on the output side, under a min-modulus certificate.
    #[arg(long)]
    pub reciprocal: bool,
    /// Compose a polynomial (JSON coefficient list) on the output side.
    #[arg(long)]
    pub poly: Option<PathBuf>,
    /// Pre-compose with `Φ`, given as `re,im,theta`.
    #[arg(long)]
    pub pre_automorphism: Option<String>,
    /// Largest scanned stage; defaults to the number of built stages.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = 256)]
    pub density: usize,
    /// Radius sweep of the counterexample minimum modulus against the budget.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ProbeConfig {
    series: String,
    scan: bool,
    left: Vec<LeftOp>,
    pre_automorphism: Option<DiscAutomorphism>,
    n_max: usize,
    options: ScanOptions,
    sweep: bool,
}

#[derive(Serialize)]
struct StageTransfer {
    n: usize,
    target: usize,
    arc: usize,
    transfer: ExpTransfer,
}

#[derive(Serialize)]
struct SweepCheck {
    budget: f64,
    sweep: SweepSummary,
    holds: bool,
}

#[derive(Serialize)]
struct ProbeReport {
    config: ProbeConfig,
    function: FunctionExpr,
    telescoping: Option<Vec<TelescopeEntry>>,
    exp_transfer: Option<Vec<StageTransfer>>,
    sweep: Option<SweepCheck>,
    pass: bool,
}

fn parse_automorphism(s: &str) -> Result<DiscAutomorphism, Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Config(format!("--pre-automorphism expects re,im,theta, got {s:?}")))?;
    match parts.as_slice() {
        [re, im, theta] => Ok(DiscAutomorphism::new(abel_core::Complex64::new(*re, *im), *theta)?),
        [re, im] => Ok(DiscAutomorphism::new(abel_core::Complex64::new(*re, *im), 0.0)?),
        _ => Err(Failure::Config(format!(
            "--pre-automorphism expects re,im,theta, got {s:?}"
        ))),
    }
}

pub fn run(args: &ProbeArgs, run: &RunInfo) -> Outcome {
    let text = std::fs::read_to_string(&args.series)
        .map_err(|e| Failure::Config(format!("{}: {e}", args.series.display())))?;
    let series = UniversalSeries::from_json(&text)?;
    if args.density == 0 {
        return Err(Failure::Config("density must be positive".into()));
    }
    let cfg = &series.config;
    let n_max = args.n_max.unwrap_or(series.stages.len());
    if cfg.rho.len() <= n_max {
        return Err(Failure::Config(format!(
            "series radii cover stages up to {}",
            cfg.rho.len() - 1
        )));
    }
    let options = ScanOptions {
        density: args.density,
        origin: series.origin(),
    };
    let grid = probe_grid(&cfg.enumeration.arcs, &cfg.rho, n_max, &options);
    let target_grid: Vec<_> = cfg
        .enumeration
        .arcs
        .iter()
        .flat_map(|a| dilated_arc_points(a, 1.0, options.origin, args.density))
        .collect();

    let mut left = Vec::new();
    if let Some(p) = &args.poly {
        let p: ComplexPolynomial = read_json(p)?;
        left.push(LeftOp::Poly { p });
    }
    if args.exp {
        left.push(LeftOp::Exp);
    }
    if args.reciprocal {
        left.push(LeftOp::Reciprocal);
    }
    let phi = args.pre_automorphism.as_deref().map(parse_automorphism).transpose()?;

    let base = FunctionExpr::poly(series.total());
    let mut f = match phi {
        Some(phi) => compose_right(base.clone(), phi),
        None => base.clone(),
    };
    let mut targets: Vec<FunctionExpr> = cfg
        .enumeration
        .targets
        .iter()
        .cloned()
        .map(FunctionExpr::poly)
        .collect();
    for op in &left {
        f = compose_left(op.clone(), f, &grid)?;
        targets = targets
            .into_iter()
            .map(|t| compose_left(op.clone(), t, &target_grid))
            .collect::<Result<_, _>>()?;
    }

    let config = ProbeConfig {
        series: args.series.display().to_string(),
        scan: args.scan,
        left: left.clone(),
        pre_automorphism: phi,
        n_max,
        options,
        sweep: args.sweep,
    };
    let mut pass = true;

    if args.scan {
        let report = universality_scan(&f, &targets, &cfg.enumeration.arcs, &cfg.rho, n_max, &options)?;
        write_payload(run, &args.out.join("scan.csv"), &report.to_csv())?;
        for s in &report.summaries {
            println!(
                "target {} arc {}  best n {:>2}  error {:.3e}",
                s.target_id, s.arc_id, s.best_n, s.best_error
            );
        }
        println!("({})", report.note);
        #[derive(Serialize)]
        struct ScanFile<'a> {
            config: &'a ProbeConfig,
            report: &'a abel_core::probe::DilateReport,
        }
        write_json(
            run,
            &args.out.join("scan.json"),
            &ScanFile {
                config: &config,
                report: &report,
            },
        )?;
    }

    let plain = left.is_empty() && phi.is_none();
    let telescoping = plain.then(|| telescoping_check(&series));
    if let Some(entries) = &telescoping {
        let bad = entries.iter().filter(|e| !e.holds).count();
        println!(
            "telescoping: {} of {} stages within bound",
            entries.len() - bad,
            entries.len()
        );
        pass &= bad == 0;
    }

    let only_exp = matches!(left.as_slice(), [LeftOp::Exp]) && phi.is_none() && options.origin.norm() == 0.0;
    let transfers = if only_exp {
        let mut out = Vec::new();
        for s in &series.stages {
            let target = &cfg.enumeration.targets[s.target];
            let h0 = |z| target.eval(z);
            let transfer = exp_transfer(&base, &cfg.enumeration.arcs[s.arc], &h0, s.r_n, args.density)?;
            println!(
                "stage {:>2}  exp error {:.3e} <= e^B delta {:.3e}  {}",
                s.n,
                transfer.exp_error,
                transfer.bound,
                if transfer.holds { "ok" } else { "VIOLATED" }
            );
            pass &= transfer.holds;
            out.push(StageTransfer {
                n: s.n,
                target: s.target,
                arc: s.arc,
                transfer,
            });
        }
        Some(out)
    } else {
        None
    };

    let sweep = if args.sweep {
        let rec = series
            .counterexample
            .as_ref()
            .ok_or_else(|| Failure::Config("--sweep needs a counterexample series".into()))?;
        let prev = &rec.sweep;
        let sweep = min_modulus_sweep(
            &series.total(),
            &rec.phi,
            &rec.witness,
            prev.r_from,
            prev.r_to,
            prev.samples,
        )?;
        let holds = sweep.max_min_modulus <= rec.budget;
        println!(
            "sweep max min-modulus {:.6e} at r = {:.6}  budget {:.6e}  {}",
            sweep.max_min_modulus,
            sweep.at_r,
            rec.budget,
            if holds { "ok" } else { "EXCEEDED" }
        );
        pass &= holds;
        Some(SweepCheck {
            budget: rec.budget,
            sweep,
            holds,
        })
    } else {
        None
    };

    let report = ProbeReport {
        config,
        function: f,
        telescoping,
        exp_transfer: transfers,
        sweep,
        pass,
    };
    write_json(run, &args.out.join("probe.json"), &report)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Invariant("probe invariant violated".into()))
    }
}
