use std::f64::consts::TAU;
use std::path::PathBuf;

use abel_core::geometry::{
    fit_circle, image_circle, modulus_identity_residual, radial_monotone_threshold, DiscAutomorphism,
};
use abel_core::Complex64;
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{write_json, RunInfo};
use crate::{parse_complex, Failure, Outcome};

#[derive(Args)]
pub struct GeometryArgs {
    /// Automorphism parameter, `x` or `x,y`.
    #[arg(long, value_parser = parse_complex)]
    pub a: Complex64,
    /// Random points in the identity suite.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Report path; the summary is printed either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct GeometryConfig {
    a: Complex64,
    samples: usize,
    seed: u64,
    identity_tol: f64,
    circle_tol: f64,
    circle_radii: usize,
    circle_points: usize,
    threshold_directions: usize,
}

#[derive(Serialize)]
struct Suite {
    name: &'static str,
    cases: usize,
    max_residual: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct GeometryReport {
    config: GeometryConfig,
    suites: Vec<Suite>,
    pass: bool,
}

fn suite(name: &'static str, cases: usize, max_residual: f64, tolerance: f64) -> Suite {
    Suite {
        name,
        cases,
        max_residual,
        tolerance,
        pass: max_residual <= tolerance,
    }
}

fn disc_sample(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU))
}

pub fn run(args: &GeometryArgs, run: &RunInfo) -> Outcome {
    if !(args.a.norm() < 1.0) {
        return Err(Failure::Config(format!("|a| = {} must be < 1", args.a.norm())));
    }
    if args.samples == 0 {
        return Err(Failure::Config("samples must be positive".into()));
    }
    let config = GeometryConfig {
        a: args.a,
        samples: args.samples,
        seed: run.seed,
        identity_tol: 1e-11,
        circle_tol: 1e-9,
        circle_radii: 100,
        circle_points: 720,
        threshold_directions: 64,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let phi = DiscAutomorphism::mobius(args.a)?;

    let (mut identity, mut involution) = (0.0_f64, 0.0_f64);
    for _ in 0..args.samples {
        let z = disc_sample(&mut rng);
        identity = identity.max(modulus_identity_residual(args.a, z)?);
        involution = involution.max((phi.apply(phi.apply(z)?)? - z).norm());
    }

    let mut circle = 0.0_f64;
    for _ in 0..config.circle_radii {
        let radius = rng.gen_range(0.05..0.95);
        let pts = (0..config.circle_points)
            .map(|k| {
                phi.apply(Complex64::from_polar(
                    radius,
                    TAU * k as f64 / config.circle_points as f64,
                ))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let fitted = fit_circle(&pts)?;
        let exact = image_circle(args.a, radius)?;
        circle = circle
            .max((fitted.center - exact.center).norm())
            .max((fitted.radius - exact.radius).abs());
    }

    // |Φ(rζ)| must be nondecreasing past the threshold and not below it just before.
    let mut threshold = 0.0_f64;
    for k in 0..config.threshold_directions {
        let zeta = Complex64::from_polar(1.0, TAU * k as f64 / config.threshold_directions as f64);
        let r0 = radial_monotone_threshold(&phi, zeta)?;
        let m = |r: f64| phi.radial_modulus(zeta, r);
        let mut prev = m(r0);
        for j in 1..400 {
            let r = r0 + (1.0 - r0) * j as f64 / 400.0;
            let cur = m(r);
            threshold = threshold.max(prev - cur);
            prev = cur;
        }
        if r0 > 1e-3 {
            threshold = threshold.max(m(r0) - m(r0 - 1e-3));
        }
    }

    let suites = vec![
        suite("modulus_identity", args.samples, identity, config.identity_tol),
        suite("involution", args.samples, involution, config.identity_tol),
        suite("image_circle", config.circle_radii, circle, config.circle_tol),
        suite(
            "radial_threshold",
            config.threshold_directions,
            threshold,
            config.identity_tol,
        ),
    ];
    let pass = suites.iter().all(|s| s.pass);
    for s in &suites {
        println!(
            "{:<18} cases {:>6}  max residual {:.3e}  tol {:.0e}  {}",
            s.name,
            s.cases,
            s.max_residual,
            s.tolerance,
            if s.pass { "pass" } else { "FAIL" }
        );
    }
    let report = GeometryReport { config, suites, pass };
    if let Some(path) = &args.out {
        write_json(run, path, &report)?;
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Invariant("geometry residuals exceed tolerance".into()))
    }
}
