use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use abel_core::builder::{
    build_counterexample_series, build_membership_series, build_shifted_membership_series, compute_witness,
    BuildConfig, CounterexampleWitness, RadiiSchedule, StageCase, UniversalSeries,
};
use abel_core::geometry::{DiscAutomorphism, UnitCircleArc};
use abel_core::invariant::{build_invariant_stage, choose_delta, InvariantConfig};
use abel_core::poly::ComplexPolynomial;
use abel_core::report::fmt_f64;
use abel_core::Complex64;
use clap::{Args, Subcommand};
use serde::Serialize;

use crate::output::{write_json, write_payload, RunInfo};
use crate::{parse_complex, read_json, Failure, Outcome};

#[derive(Subcommand)]
pub enum BuildKind {
    /// Series universal for plain radial dilates.
    Membership(ScheduleArgs),
    /// Series universal for dilates centred at `w`.
    Shifted {
        #[arg(long, value_parser = parse_complex)]
        w: Complex64,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
    /// Series whose pre-composition with a non-rotation is not universal.
    Counterexample(CounterexampleArgs),
    /// One stage invariant under the automorphisms `Φ_τ`, `|τ − w| ≤ δ`.
    Invariant(InvariantArgs),
}

#[derive(Args)]
pub struct ScheduleArgs {
    /// JSON list of target polynomials, each a list of `[re, im]` coefficients.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// JSON list of arcs `[alpha, beta]`.
    #[arg(long)]
    pub arcs: Option<PathBuf>,
    #[arg(long)]
    pub stages: Option<usize>,
    /// Full build config; flags given alongside override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tol_factor: Option<f64>,
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long)]
    pub arc_density: Option<usize>,
    #[arg(long)]
    pub disc_density: Option<usize>,
    #[arg(long)]
    pub curve_density: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CounterexampleArgs {
    #[arg(long, value_parser = parse_complex)]
    pub a: Complex64,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Angle of ζ₁.
    #[arg(long)]
    pub zeta1: f64,
    /// Angle of ζ₂.
    #[arg(long)]
    pub zeta2: f64,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Args)]
pub struct InvariantArgs {
    #[arg(long, value_parser = parse_complex)]
    pub w: Complex64,
    #[arg(long)]
    pub r_k: f64,
    /// `alpha,beta`.
    #[arg(long, default_value = "0,0.7853981633974483")]
    pub arc: String,
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Skip the halving search and use this radius.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long)]
    pub param_density: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(kind: &BuildKind, run: &RunInfo) -> Outcome {
    match kind {
        BuildKind::Membership(s) => {
            let cfg = resolve(s, None)?;
            finish(run, &s.out, build_membership_series(&cfg)?, None)
        }
        BuildKind::Shifted { w, schedule } => {
            let cfg = resolve(schedule, None)?;
            finish(run, &schedule.out, build_shifted_membership_series(*w, &cfg)?, None)
        }
        BuildKind::Counterexample(args) => counterexample(args, run),
        BuildKind::Invariant(args) => invariant(args, run),
    }
}

/// Counterexample defaults: the constant 10 on a short arc around `π`,
/// each stage fitted to the full `eps[n]`.
fn counterexample_defaults() -> (Vec<ComplexPolynomial>, Vec<UnitCircleArc>, f64) {
    let ten = ComplexPolynomial::constant(Complex64::new(10.0, 0.0));
    let arc = UnitCircleArc::around(PI, 0.01).expect("valid arc");
    (vec![ten], vec![arc], 1.0)
}

fn resolve(
    s: &ScheduleArgs,
    defaults: Option<(Vec<ComplexPolynomial>, Vec<UnitCircleArc>, f64)>,
) -> Result<BuildConfig, Failure> {
    let mut cfg = match &s.config {
        Some(path) => {
            let mut cfg: BuildConfig = read_json(path)?;
            if s.targets.is_some() || s.arcs.is_some() || s.stages.is_some() {
                let targets = match &s.targets {
                    Some(p) => read_json(p)?,
                    None => cfg.enumeration.targets.clone(),
                };
                let arcs = match &s.arcs {
                    Some(p) => read_json(p)?,
                    None => cfg.enumeration.arcs.clone(),
                };
                let n = s.stages.unwrap_or(cfg.n_stages);
                let fresh = BuildConfig::new(targets, arcs, n)?;
                cfg.enumeration = fresh.enumeration;
                cfg.n_stages = n;
                if cfg.rho.len() < n + 2 {
                    cfg.rho = fresh.rho;
                }
                if cfg.eps.len() < n + 2 {
                    cfg.eps = fresh.eps;
                }
            }
            cfg
        }
        None => {
            let (dt, da, dtol) = match defaults {
                Some((t, a, tol)) => (Some(t), Some(a), Some(tol)),
                None => (None, None, None),
            };
            let targets: Vec<ComplexPolynomial> = match (&s.targets, dt) {
                (Some(p), _) => read_json(p)?,
                (None, Some(t)) => t,
                (None, None) => Vec::new(),
            };
            let arcs: Vec<UnitCircleArc> = match (&s.arcs, da) {
                (Some(p), _) => read_json(p)?,
                (None, Some(a)) => a,
                (None, None) => Vec::new(),
            };
            let n = s
                .stages
                .ok_or_else(|| Failure::Config("--stages or --config is required".into()))?;
            let mut cfg = BuildConfig::new(targets, arcs, n)?;
            if let Some(t) = dtol {
                cfg.tol_factor = t;
            }
            cfg
        }
    };
    if let Some(t) = s.tol_factor {
        cfg.tol_factor = t;
    }
    if let Some(d) = s.max_degree {
        cfg.max_degree = d;
        if s.disc_density.is_none() && s.config.is_none() {
            cfg.disc_density = 4 * d;
        }
    }
    if let Some(d) = s.arc_density {
        cfg.arc_density = d;
    }
    if let Some(d) = s.disc_density {
        cfg.disc_density = d;
    }
    if let Some(d) = s.curve_density {
        cfg.curve_density = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn case_label(c: &StageCase) -> String {
    match c {
        StageCase::I => "I".into(),
        StageCase::II { curve } => format!("II({curve})"),
        StageCase::III { first } => format!("III({first})"),
    }
}

pub fn stage_csv(series: &UniversalSeries) -> String {
    let mut out = String::from("n,case,degree,sup_error,eps_n\n");
    for s in &series.stages {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.n,
            case_label(&s.case),
            s.fit.degree,
            fmt_f64(s.fit.sup_error),
            fmt_f64(s.eps_n)
        ));
    }
    out
}

fn witness_csv(w: &CounterexampleWitness) -> String {
    let mut out = String::from("n,r_n,R1,R2,s1,s2,eta\n");
    for n in 0..=w.n_stages {
        let (r1, r2) = if n == 0 {
            (String::new(), String::new())
        } else {
            (fmt_f64(w.level(0, n)), fmt_f64(w.level(1, n)))
        };
        let eta = match n.checked_sub(1).and_then(|k| w.eta.get(k).copied().flatten()) {
            Some(e) => fmt_f64(e),
            None => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            n,
            fmt_f64(w.rho.get(n)),
            r1,
            r2,
            fmt_f64(w.half_level(0, n)),
            fmt_f64(w.half_level(1, n)),
            eta
        ));
    }
    out
}

fn finish(run: &RunInfo, out: &Path, series: UniversalSeries, extra: Option<String>) -> Outcome {
    write_payload(run, &out.join("series.json"), &(series.to_json()? + "\n"))?;
    write_payload(run, &out.join("stages.csv"), &stage_csv(&series))?;
    if let Some(csv) = extra {
        write_payload(run, &out.join("witness.csv"), &csv)?;
    }
    for s in &series.stages {
        println!(
            "stage {:>2}  case {:<7} degree {:>4}  sup error {:.3e}  eps {:.3e}",
            s.n,
            case_label(&s.case),
            s.fit.degree,
            s.fit.sup_error,
            s.eps_n
        );
    }
    if let Some(rec) = &series.counterexample {
        println!(
            "budget {:.6e}  sweep max min-modulus {:.6e} at r = {:.6}",
            rec.budget, rec.sweep.max_min_modulus, rec.sweep.at_r
        );
    }
    match &series.failure {
        Some(f) => Err(Failure::Stage(format!("stage {} failed: {}", f.n, f.reason))),
        None => Ok(()),
    }
}

fn counterexample(args: &CounterexampleArgs, run: &RunInfo) -> Outcome {
    let phi = DiscAutomorphism::new(args.a, args.theta)?;
    let cfg = resolve(&args.schedule, Some(counterexample_defaults()))?;
    let n = cfg.n_stages;
    let zeta1 = Complex64::from_polar(1.0, args.zeta1);
    let zeta2 = Complex64::from_polar(1.0, args.zeta2);
    let witness = compute_witness(&phi, zeta1, zeta2, &RadiiSchedule::standard(n + 24), n)?;
    let series = build_counterexample_series(&cfg, &phi, &witness)?;
    let table = witness_csv(series.counterexample.as_ref().map_or(&witness, |r| &r.witness));
    finish(run, &args.schedule.out, series, Some(table))
}

#[derive(Serialize)]
struct InvariantReport {
    halvings: Option<usize>,
    stage: abel_core::invariant::InvariantStage,
}

fn invariant(args: &InvariantArgs, run: &RunInfo) -> Outcome {
    let arc = match abel_core::probe::parse_point(&args.arc) {
        Ok(p) => UnitCircleArc::new(p.re, p.im)?,
        Err(_) => return Err(Failure::Config(format!("--arc expects alpha,beta, got {:?}", args.arc))),
    };
    let mut cfg = InvariantConfig::new(args.w, args.r_k, arc, args.m);
    if let Some(d) = args.max_degree {
        cfg.max_degree = d;
    }
    if let Some(d) = args.param_density {
        cfg.param_density = d;
    }
    let halvings = match args.delta {
        Some(d) => {
            cfg.delta = d;
            None
        }
        None => {
            let (d, h) = choose_delta(&cfg)?;
            cfg.delta = d;
            Some(h)
        }
    };
    let stage = build_invariant_stage(&cfg)?;
    println!(
        "delta {:.6e}  degree {}  fit {:.3e}  chain: fit {:.3e} + oscillation {:.3e} + substitution {:.3e}, total {:.3e} (term bound {:.3e})",
        cfg.delta,
        stage.fit.degree,
        stage.fit.sup_error,
        stage.chain.fit_term,
        stage.chain.oscillation_term,
        stage.chain.substitution_term,
        stage.chain.total,
        stage.chain.term_bound
    );
    let holds = stage.chain.holds;
    write_json(
        run,
        &args.out.join("invariant.json"),
        &InvariantReport { halvings, stage },
    )?;
    if holds {
        Ok(())
    } else {
        Err(Failure::Invariant("three-term chain exceeds its bound".into()))
    }
}
