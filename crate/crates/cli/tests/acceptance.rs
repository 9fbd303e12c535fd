//! Acceptance criteria 1–10. Runs as a plain binary: one line per criterion,
//! nonzero exit if any fails.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, LN_2, PI, TAU};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use abel_core::builder::{
    build_counterexample_series, build_membership_series, compute_witness, telescoping_check, BuildConfig,
    RadiiSchedule,
};
use abel_core::geometry::{
    circle_through_three, fixed_point_radius, image_circle, is_origin_shift_circle, modulus_identity_residual,
    CircleOrLine, DiscAutomorphism, OriginShiftDilation, UnitCircleArc,
};
use abel_core::invariant::{build_invariant_stage, choose_delta, InvariantConfig};
use abel_core::poly::ComplexPolynomial;
use abel_core::probe::{
    compose_left, compose_right, dilate_distance, dilated_arc_points, exp_transfer, lift_path, liftable_target,
    universality_scan, FunctionExpr, LeftOp, LiftMap, LiftStatus, ScanOptions,
};
use abel_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn disc_point(rng: &mut ChaCha8Rng, max: f64) -> Complex64 {
    Complex64::from_polar(max * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU))
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(())
    } else {
        Err(format!(
            "runtime {:.1}s exceeds {:.0}s",
            t.as_secs_f64(),
            limit.as_secs_f64()
        ))
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Least-squares circle `x² + y² + Dx + Ey + F = 0` through the points.
fn kasa(pts: &[Complex64]) -> (Complex64, f64) {
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    let mean = pts.iter().sum::<Complex64>() / pts.len() as f64;
    for p in pts {
        let q = p - mean;
        let row = [q.re, q.im, 1.0];
        let rhs = -q.norm_sqr();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            v[i] += row[i] * rhs;
        }
    }
    for k in 0..3 {
        let piv = (k..3).max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs())).unwrap();
        m.swap(k, piv);
        v.swap(k, piv);
        for i in k + 1..3 {
            let f = m[i][k] / m[k][k];
            for j in k..3 {
                m[i][j] -= f * m[k][j];
            }
            v[i] -= f * v[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        x[k] = (v[k] - (k + 1..3).map(|j| m[k][j] * x[j]).sum::<f64>()) / m[k][k];
    }
    let center = c(-x[0] / 2.0, -x[1] / 2.0);
    (center + mean, (center.norm_sqr() - x[2]).sqrt())
}

fn mobius_identities() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut identity, mut involution) = (0.0_f64, 0.0_f64);
    for _ in 0..10_000 {
        let a = disc_point(&mut rng, 0.999);
        let z = disc_point(&mut rng, 1.0);
        identity = identity.max(modulus_identity_residual(a, z).map_err(|e| e.to_string())?);
        let phi = DiscAutomorphism::mobius(a).map_err(|e| e.to_string())?;
        let back = phi.apply(phi.apply(z).unwrap()).unwrap();
        involution = involution.max((back - z).norm());
    }
    check(identity <= 1e-11 && involution <= 1e-11, || {
        format!("identity {identity:.2e}, involution {involution:.2e}")
    })?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("identity {identity:.2e}, involution {involution:.2e}"))
}

fn circle_geometry() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut fit_err, mut three_err) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let a = disc_point(&mut rng, 0.9);
        let radius = rng.gen_range(0.05..0.95);
        let phi = DiscAutomorphism::mobius(a).unwrap();
        let pts: Vec<Complex64> = (0..720)
            .map(|k| {
                phi.apply(Complex64::from_polar(radius, TAU * k as f64 / 720.0))
                    .unwrap()
            })
            .collect();
        let (center, r) = kasa(&pts);
        let got = image_circle(a, radius).map_err(|e| e.to_string())?;
        fit_err = fit_err.max((got.center - center).norm()).max((got.radius - r).abs());
        let (i, j, k) = (rng.gen_range(0..240), rng.gen_range(240..480), rng.gen_range(480..720));
        match circle_through_three(pts[i], pts[j], pts[k]).map_err(|e| e.to_string())? {
            CircleOrLine::Circle(c3) => {
                three_err = three_err.max((c3.center - center).norm()).max((c3.radius - r).abs());
            }
            other => return Err(format!("three points gave {other:?}")),
        }
    }
    check(fit_err <= 1e-9 && three_err <= 1e-9, || {
        format!("image vs fit {fit_err:.2e}, three-point {three_err:.2e}")
    })?;
    within(Duration::from_secs(5), start)?;
    Ok(format!("image vs fit {fit_err:.2e}, three-point {three_err:.2e}"))
}

fn membership_config() -> BuildConfig {
    let targets = vec![
        ComplexPolynomial::constant(c(2.0, 0.0)),
        ComplexPolynomial::constant(c(0.0, -3.0)),
    ];
    let arcs = vec![
        UnitCircleArc::new(0.0, FRAC_PI_2).unwrap(),
        UnitCircleArc::new(PI, 3.0 * FRAC_PI_2).unwrap(),
    ];
    BuildConfig::new(targets, arcs, 8).unwrap()
}

fn membership_build() -> Verdict {
    let start = Instant::now();
    let cfg = membership_config();
    let series = build_membership_series(&cfg).map_err(|e| e.to_string())?;
    if let Some(f) = &series.failure {
        return Err(format!("stage {} failed: {}", f.n, f.reason));
    }
    for s in &series.stages {
        check(s.fit.sup_error <= s.eps_n / 2.0, || {
            format!(
                "stage {} sup error {:.3e} > eps/2 = {:.3e}",
                s.n,
                s.fit.sup_error,
                s.eps_n / 2.0
            )
        })?;
    }
    let tele = telescoping_check(&series);
    let bad: Vec<usize> = tele.iter().filter(|e| !e.holds).map(|e| e.n).collect();
    check(bad.is_empty(), || {
        format!("telescoping bound exceeded at stages {bad:?}")
    })?;
    within(Duration::from_secs(120), start)?;
    Ok(format!("{} stages, telescoping holds", series.stages.len()))
}

fn left_invariance() -> Verdict {
    let start = Instant::now();
    let targets = vec![
        ComplexPolynomial::constant(c(LN_2, 0.0)),
        ComplexPolynomial::constant(c(-LN_2, 0.0)),
    ];
    let arcs = vec![
        UnitCircleArc::new(0.0, 0.1).unwrap(),
        UnitCircleArc::new(PI, PI + 0.1).unwrap(),
    ];
    let cfg = BuildConfig::new(targets, arcs, 2).unwrap();
    let series = build_membership_series(&cfg).map_err(|e| e.to_string())?;
    if let Some(f) = &series.failure {
        return Err(format!("stage {} failed: {}", f.n, f.reason));
    }
    let f = FunctionExpr::poly(series.total());
    let opts = ScanOptions {
        density: 512,
        ..ScanOptions::default()
    };
    // Certificate over the grids the errors are measured on: each stage's arc at its radius.
    let grid: Vec<Complex64> = series
        .stages
        .iter()
        .flat_map(|s| dilated_arc_points(&cfg.enumeration.arcs[s.arc], s.r_n, c(0.0, 0.0), opts.density))
        .collect();
    let exp_f = compose_left(LeftOp::Exp, f.clone(), &grid).map_err(|e| e.to_string())?;
    let recip = compose_left(LeftOp::Reciprocal, exp_f.clone(), &grid).map_err(|e| format!("reciprocal: {e}"))?;
    let tele = telescoping_check(&series);
    let mut worst = 0.0_f64;
    for (s, t) in series.stages.iter().zip(&tele) {
        let arc = &cfg.enumeration.arcs[s.arc];
        let h0 = cfg.enumeration.targets[s.target].eval(c(0.0, 0.0));
        let tr = exp_transfer(&f, arc, &|_| h0, s.r_n, opts.density).map_err(|e| e.to_string())?;
        let to_exp = dilate_distance(&exp_f, arc, &|_| h0.exp(), s.r_n, opts.density).map_err(|e| e.to_string())?;
        let to_inv = dilate_distance(&recip, arc, &|_| (-h0).exp(), s.r_n, opts.density).map_err(|e| e.to_string())?;
        let bound = tr.b.exp() * tr.delta;
        check(tr.holds && to_exp <= bound && to_inv <= bound, || {
            format!(
                "stage {}: exp {to_exp:.3e}, reciprocal {to_inv:.3e}, bound {bound:.3e}",
                s.n
            )
        })?;
        check(to_exp <= tr.b.exp() * t.bound, || {
            format!("stage {}: exceeds e^B times the telescoped bound", s.n)
        })?;
        worst = worst.max(to_exp.max(to_inv) / bound);
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("worst error / e^B delta = {worst:.3}"))
}

fn counterexample_config(n: usize) -> BuildConfig {
    let mut cfg = BuildConfig::new(
        vec![ComplexPolynomial::constant(c(10.0, 0.0))],
        vec![UnitCircleArc::around(PI, 0.01).unwrap()],
        n,
    )
    .unwrap();
    cfg.tol_factor = 1.0;
    cfg
}

fn right_non_invariance() -> Verdict {
    let start = Instant::now();
    let n = 6;
    let phi = DiscAutomorphism::new(c(0.5, 0.0), 0.0).unwrap();
    let witness = compute_witness(&phi, c(1.0, 0.0), c(0.0, 1.0), &RadiiSchedule::standard(n + 24), n)
        .map_err(|e| e.to_string())?;
    let series = build_counterexample_series(&counterexample_config(n), &phi, &witness).map_err(|e| e.to_string())?;
    if let Some(f) = &series.failure {
        return Err(format!("stage {} failed: {}", f.n, f.reason));
    }
    let rec = series.counterexample.as_ref().ok_or("no counterexample record")?;
    check(rec.budget < 1.0, || format!("budget {:.3e} not below 1", rec.budget))?;
    check(
        rec.sweep.samples == 200 && rec.sweep.max_min_modulus <= rec.budget,
        || {
            format!(
                "sweep {:.3e} exceeds budget {:.3e}",
                rec.sweep.max_min_modulus, rec.budget
            )
        },
    )?;
    let tele = telescoping_check(&series);
    check(!tele.is_empty() && tele.iter().all(|e| e.holds), || {
        "plain dilates miss the target 10".into()
    })?;
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "sweep {:.3e} <= budget {:.3e}",
        rec.sweep.max_min_modulus, rec.budget
    ))
}

fn rotation_invariance() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let poly = |rng: &mut ChaCha8Rng, deg: usize, scale: f64| {
        ComplexPolynomial::new(
            (0..=deg)
                .map(|_| c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
                .collect(),
        )
    };
    let base_poly = poly(&mut rng, 12, 1.0);
    let targets = [poly(&mut rng, 3, 1.0), poly(&mut rng, 2, 1.0)];
    let base = FunctionExpr::poly(base_poly);
    let rho = RadiiSchedule::standard(6);
    let opts = ScanOptions {
        density: 64,
        ..ScanOptions::default()
    };
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let a0 = rng.gen_range(0.0..TAU);
        let arcs = vec![
            UnitCircleArc::new(a0, a0 + rng.gen_range(0.1..2.0)).unwrap(),
            UnitCircleArc::new(a0 + 3.0, a0 + 3.0 + rng.gen_range(0.1..2.0)).unwrap(),
        ];
        let theta = rng.gen_range(0.0..TAU);
        let rotated = compose_right(base.clone(), DiscAutomorphism::rotation(theta));
        let plain: Vec<FunctionExpr> = targets.iter().cloned().map(FunctionExpr::poly).collect();
        let left = universality_scan(&rotated, &plain, &arcs, &rho, 5, &opts).map_err(|e| e.to_string())?;
        // The rotation is z ↦ −e^{iθ}z: arcs turn by θ + π, targets follow.
        let turn = theta + PI;
        let back = Complex64::from_polar(1.0, -turn);
        let moved_arcs: Vec<UnitCircleArc> = arcs.iter().map(|a| a.rotated(turn)).collect();
        let moved: Vec<FunctionExpr> = targets.iter().map(|t| FunctionExpr::poly(t.dilated(back))).collect();
        let right = universality_scan(&base, &moved, &moved_arcs, &rho, 5, &opts).map_err(|e| e.to_string())?;
        for (x, y) in left.summaries.iter().zip(&right.summaries) {
            for (p, q) in x.errors.iter().zip(&y.errors) {
                worst = worst.max((p - q).abs());
            }
        }
    }
    check(worst <= 1e-11, || format!("max entry difference {worst:.2e}"))?;
    within(Duration::from_secs(30), start)?;
    Ok(format!("max entry difference {worst:.2e}"))
}

fn lifting() -> Verdict {
    let start = Instant::now();
    let sq =
        lift_path(&LiftMap::square(), &[c(1.0, 0.0), c(4.0, 0.0)], c(1.0, 0.0), 1e-10).map_err(|e| e.to_string())?;
    let lg = lift_path(&LiftMap::Exp, &[c(1.0, 0.0), c(E, 0.0)], c(0.0, 0.0), 1e-10).map_err(|e| e.to_string())?;
    let sq_err = (sq.endpoint() - c(2.0, 0.0)).norm();
    let lg_err = (lg.endpoint() - c(1.0, 0.0)).norm();
    check(sq.status == LiftStatus::Complete && sq_err <= 1e-8, || {
        format!("square root endpoint error {sq_err:.2e}")
    })?;
    check(lg.status == LiftStatus::Complete && lg_err <= 1e-8, || {
        format!("log endpoint error {lg_err:.2e}")
    })?;

    let two = c(2.0, 0.0);
    let t1 = liftable_target(
        &LiftMap::Exp,
        &UnitCircleArc::new(0.0, FRAC_PI_2).unwrap(),
        &|_| two,
        0.1,
        4,
    )
    .map_err(|e| format!("exp case: {e}"))?;
    let off_log = t1.lifted.iter().map(|h| (h - c(LN_2, 0.0)).norm()).fold(0.0, f64::max);
    check(t1.defect < 0.1 && off_log <= 1e-6, || {
        format!("exp case defect {:.2e}, |h0 - log 2| {off_log:.2e}", t1.defect)
    })?;

    let eps = 0.05;
    let t2 = liftable_target(
        &LiftMap::square(),
        &UnitCircleArc::new(0.1, FRAC_PI_2).unwrap(),
        &|z| z,
        eps,
        4,
    )
    .map_err(|e| format!("square case: {e}"))?;
    let sign = if (t2.lifted[0] - Complex64::from_polar(1.0, 0.05)).norm() < 0.5 {
        1.0
    } else {
        -1.0
    };
    let branch = t2
        .params
        .iter()
        .zip(&t2.lifted)
        .map(|(t, h)| (h - Complex64::from_polar(sign, t / 2.0)).norm())
        .fold(0.0, f64::max);
    check(t2.defect < eps && branch < eps, || {
        format!("square case defect {:.2e}, branch offset {branch:.2e}", t2.defect)
    })?;

    let t3 = liftable_target(
        &LiftMap::square(),
        &UnitCircleArc::new(0.0, 1.0).unwrap(),
        &|_| c(0.0, 0.0),
        eps,
        3,
    )
    .map_err(|e| format!("zero case: {e}"))?;
    let worst = t3.lifted.iter().map(|h| (h * h).norm()).fold(0.0, f64::max);
    check(t3.defect < eps && worst < eps, || {
        format!("zero case defect {:.2e}", t3.defect)
    })?;
    within(Duration::from_secs(10), start)?;
    Ok(format!(
        "endpoints {sq_err:.1e}/{lg_err:.1e}, defects {:.1e}/{:.1e}/{:.1e}",
        t1.defect, t2.defect, t3.defect
    ))
}

fn separation() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut false_positives = 0;
    let mut configs = 0;
    while configs < 1000 {
        let w1 = disc_point(&mut rng, 0.95);
        let w2 = disc_point(&mut rng, 0.95);
        let r = rng.gen_range(0.01..0.99);
        if (w1 - w2).norm() < 1e-3 {
            continue;
        }
        configs += 1;
        let circle = OriginShiftDilation::new(w2)
            .unwrap()
            .image_of_centered_circle(r)
            .unwrap();
        let (t1, t2, t3) = (
            rng.gen_range(0.0..2.0),
            rng.gen_range(2.0..4.0),
            rng.gen_range(4.0..TAU),
        );
        let CircleOrLine::Circle(k) =
            circle_through_three(circle.point_at(t1), circle.point_at(t2), circle.point_at(t3))
                .map_err(|e| e.to_string())?
        else {
            return Err("three points on a circle came out collinear".into());
        };
        if is_origin_shift_circle(&k, w1, 1e-9).is_some() {
            false_positives += 1;
        }
    }
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let w = disc_point(&mut rng, 0.95);
        let a = disc_point(&mut rng, 0.95);
        let den = a - w * a.norm_sqr();
        if a.norm() < 1e-3 || den.norm() < 1e-6 {
            continue;
        }
        let direct = (w - a) / den;
        let got = fixed_point_radius(w, a).map_err(|e| e.to_string())?;
        worst = worst.max((got - direct).norm() / direct.norm().max(1.0));
    }
    check(false_positives == 0 && worst <= 1e-12, || {
        format!("{false_positives} false positives, radius formula error {worst:.2e}")
    })?;
    within(Duration::from_secs(5), start)?;
    Ok(format!(
        "0 false positives in {configs}, radius formula error {worst:.2e}"
    ))
}

fn invariant_stage() -> Verdict {
    let start = Instant::now();
    let arc = UnitCircleArc::new(0.0, FRAC_PI_4).unwrap();
    let mut cfg = InvariantConfig::new(c(0.2, 0.0), 0.9375, arc, 4);
    cfg.param_density = 8;
    let (delta, halvings) = choose_delta(&cfg).map_err(|e| e.to_string())?;
    cfg.delta = delta;
    let stage = build_invariant_stage(&cfg).map_err(|e| e.to_string())?;
    let ch = &stage.chain;
    check(ch.samples >= 50 || cfg.probe_params >= 50, || {
        "fewer than 50 parameters probed".into()
    })?;
    check(ch.holds && ch.total < 3.0 / cfg.m as f64, || {
        format!("chain total {:.3e}", ch.total)
    })?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "delta {delta:.3e} after {halvings} halvings, degree {}, chain {:.3e} < {:.2}",
        stage.fit.degree,
        ch.total,
        3.0 / cfg.m as f64
    ))
}

fn cli(args: &[&str], dir: &Path) -> Result<(), String> {
    Command::new(env!("CARGO_BIN_EXE_abel-lab"))
        .args(args)
        .current_dir(dir)
        .output()
        .map(|_| ())
        .map_err(|e| e.to_string())
}

fn determinism() -> Verdict {
    let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let _ = std::fs::remove_dir_all(&root);
    std::fs::create_dir_all(&root).map_err(|e| e.to_string())?;
    let cfg = serde_json::to_string(&membership_config()).map_err(|e| e.to_string())?;
    std::fs::write(root.join("membership.json"), cfg).map_err(|e| e.to_string())?;
    for run in ["a", "b"] {
        cli(
            &[
                "--seed",
                "11",
                "build",
                "membership",
                "--config",
                "membership.json",
                "--out",
                &format!("{run}/m"),
            ],
            &root,
        )?;
        cli(
            &[
                "--seed",
                "11",
                "build",
                "counterexample",
                "--a",
                "0.5",
                "--zeta1",
                "0",
                "--zeta2",
                &FRAC_PI_2.to_string(),
                "--stages",
                "6",
                "--out",
                &format!("{run}/c"),
            ],
            &root,
        )?;
    }
    let mut compared = 0;
    for file in [
        "m/series.json",
        "m/stages.csv",
        "c/series.json",
        "c/stages.csv",
        "c/witness.csv",
    ] {
        let a = std::fs::read(root.join("a").join(file)).map_err(|e| format!("{file}: {e}"))?;
        let b = std::fs::read(root.join("b").join(file)).map_err(|e| format!("{file}: {e}"))?;
        check(a == b, || format!("{file} differs between runs"))?;
        compared += 1;
    }
    Ok(format!("{compared} payloads byte-identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Möbius identities", mobius_identities),
        ("circle geometry", circle_geometry),
        ("membership build", membership_build),
        ("left invariance", left_invariance),
        ("right non-invariance", right_non_invariance),
        ("rotation invariance", rotation_invariance),
        ("lifting", lifting),
        ("separation", separation),
        ("invariant stage", invariant_stage),
        ("determinism", determinism),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let k = i + 1;
        if !filter.is_empty() && !filter.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {k:>2} PASS  {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
