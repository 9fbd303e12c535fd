//! Probes of universality on dilated arcs, composition wrappers, and the
//! inverse lifting `g ∘ h₀ = h` along paths.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::builder::RadiiSchedule;
use crate::compacta::distance_to_polyline;
use crate::error::{Error, Result};
use crate::geometry::{linspace, DiscAutomorphism, UnitCircleArc};
use crate::invariant::sunflower;
use crate::poly::ComplexPolynomial;
use crate::report::fmt_f64;

/// Smallest modulus a reciprocal argument may take on a probe grid.
pub const RECIPROCAL_FLOOR: f64 = 1e-6;

/// Label carried by every scan report.
pub const EVIDENCE_NOTE: &str = "finitely many probes: evidence of universality, not a certificate";

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum FunctionExpr {
    Poly {
        p: ComplexPolynomial,
    },
    Exp {
        inner: Box<FunctionExpr>,
    },
    /// `certificate` is the grid minimum of `|inner|` recorded at construction.
    Reciprocal {
        inner: Box<FunctionExpr>,
        certificate: f64,
    },
    PolyOf {
        p: ComplexPolynomial,
        inner: Box<FunctionExpr>,
    },
    /// `inner ∘ phi`.
    PreCompose {
        phi: DiscAutomorphism,
        inner: Box<FunctionExpr>,
    },
}

impl FunctionExpr {
    pub fn poly(p: ComplexPolynomial) -> Self {
        Self::Poly { p }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            Self::Poly { p } => Ok(p.eval(z)),
            Self::Exp { inner } => Ok(inner.eval(z)?.exp()),
            Self::Reciprocal { inner, .. } => {
                let v = inner.eval(z)?;
                if v.norm() < RECIPROCAL_FLOOR {
                    return Err(Error::ReciprocalCertificate { min_modulus: v.norm() });
                }
                Ok(v.inv())
            }
            Self::PolyOf { p, inner } => Ok(p.eval(inner.eval(z)?)),
            Self::PreCompose { phi, inner } => inner.eval(phi.apply(z)?),
        }
    }
}

/// Entire functions applied on the output side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LeftOp {
    Exp,
    Reciprocal,
    Poly { p: ComplexPolynomial },
}

/// `g ∘ f`. A reciprocal is only formed if `|f| > RECIPROCAL_FLOOR` on all of `grid`.
pub fn compose_left(g: LeftOp, f: FunctionExpr, grid: &[Complex64]) -> Result<FunctionExpr> {
    let inner = Box::new(f);
    Ok(match g {
        LeftOp::Exp => FunctionExpr::Exp { inner },
        LeftOp::Poly { p } => FunctionExpr::PolyOf { p, inner },
        LeftOp::Reciprocal => {
            if grid.is_empty() {
                return Err(Error::InvalidParameter(
                    "a reciprocal needs a non-empty probe grid".into(),
                ));
            }
            let mut certificate = f64::INFINITY;
            for z in grid {
                certificate = certificate.min(inner.eval(*z)?.norm());
            }
            if !(certificate > RECIPROCAL_FLOOR) {
                return Err(Error::ReciprocalCertificate {
                    min_modulus: certificate,
                });
            }
            FunctionExpr::Reciprocal { inner, certificate }
        }
    })
}

/// `f ∘ phi`.
pub fn compose_right(f: FunctionExpr, phi: DiscAutomorphism) -> FunctionExpr {
    FunctionExpr::PreCompose {
        phi,
        inner: Box::new(f),
    }
}

/// `w + r(ζ − w)` over `density` parameters of the arc.
pub fn dilated_arc_points(arc: &UnitCircleArc, r: f64, w: Complex64, density: usize) -> Vec<Complex64> {
    arc.parameters(density)
        .into_iter()
        .map(|t| w + (Complex64::from_polar(1.0, t) - w) * r)
        .collect()
}

/// Every dilated-arc sample a scan over `n ≤ n_max` touches.
pub fn probe_grid(arcs: &[UnitCircleArc], rho: &RadiiSchedule, n_max: usize, opts: &ScanOptions) -> Vec<Complex64> {
    let mut out = Vec::new();
    for arc in arcs {
        for n in 0..=n_max.min(rho.len().saturating_sub(1)) {
            out.extend(dilated_arc_points(arc, rho.get(n), opts.origin, opts.density));
        }
    }
    out
}

/// Grid sup of `|f(rζ) − target(ζ)|` over the arc.
pub fn dilate_distance(
    f: &FunctionExpr,
    arc: &UnitCircleArc,
    target: &dyn Fn(Complex64) -> Complex64,
    r: f64,
    density: usize,
) -> Result<f64> {
    dilate_distance_from(f, arc, target, r, ZERO, density)
}

/// As [`dilate_distance`] with dilations centred at `w`: `f(w + r(ζ − w))`.
pub fn dilate_distance_from(
    f: &FunctionExpr,
    arc: &UnitCircleArc,
    target: &dyn Fn(Complex64) -> Complex64,
    r: f64,
    w: Complex64,
    density: usize,
) -> Result<f64> {
    check_dilation(r, density)?;
    let mut sup = 0.0_f64;
    for t in arc.parameters(density) {
        let zeta = Complex64::from_polar(1.0, t);
        let v = f.eval(w + (zeta - w) * r)?;
        sup = sup.max((v - target(zeta)).norm());
    }
    Ok(sup)
}

/// [`dilate_distance_from`] with a target that may itself fail to evaluate.
pub fn expr_distance(
    f: &FunctionExpr,
    arc: &UnitCircleArc,
    target: &FunctionExpr,
    r: f64,
    w: Complex64,
    density: usize,
) -> Result<f64> {
    check_dilation(r, density)?;
    let mut sup = 0.0_f64;
    for t in arc.parameters(density) {
        let zeta = Complex64::from_polar(1.0, t);
        let v = f.eval(w + (zeta - w) * r)?;
        sup = sup.max((v - target.eval(zeta)?).norm());
    }
    Ok(sup)
}

fn check_dilation(r: f64, density: usize) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "dilation radius must lie in (0, 1), got {r}"
        )));
    }
    if density < 2 {
        return Err(Error::InvalidParameter("density must be at least 2".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub density: usize,
    /// Centre of the dilations; `0` for the plain definition.
    pub origin: Complex64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            density: 256,
            origin: ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilateSummary {
    pub target_id: usize,
    pub arc_id: usize,
    /// Sup errors for `n = 0..=n_max`.
    pub errors: Vec<f64>,
    pub best_n: usize,
    pub best_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilateReport {
    pub note: String,
    pub options: ScanOptions,
    /// `r_0..=r_{n_max}`.
    pub radii: Vec<f64>,
    pub summaries: Vec<DilateSummary>,
}

impl DilateReport {
    /// One row per `(target, arc, n)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("target_id,arc_id,n,r_n,sup_error\n");
        for s in &self.summaries {
            for (n, e) in s.errors.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.target_id,
                    s.arc_id,
                    n,
                    fmt_f64(self.radii[n]),
                    fmt_f64(*e)
                ));
            }
        }
        out
    }

    pub fn summary(&self, target_id: usize, arc_id: usize) -> Option<&DilateSummary> {
        self.summaries
            .iter()
            .find(|s| s.target_id == target_id && s.arc_id == arc_id)
    }
}

/// `dilate_distance` for every target, arc and `n ≤ n_max`.
pub fn universality_scan(
    f: &FunctionExpr,
    targets: &[FunctionExpr],
    arcs: &[UnitCircleArc],
    rho: &RadiiSchedule,
    n_max: usize,
    opts: &ScanOptions,
) -> Result<DilateReport> {
    if rho.len() <= n_max {
        return Err(Error::InvalidParameter(format!(
            "radii schedule has {} entries, scan needs {}",
            rho.len(),
            n_max + 1
        )));
    }
    let jobs: Vec<(usize, usize, usize)> = (0..targets.len())
        .flat_map(|t| (0..arcs.len()).flat_map(move |a| (0..=n_max).map(move |n| (t, a, n))))
        .collect();
    let run = |&(t, a, n): &(usize, usize, usize)| {
        expr_distance(f, &arcs[a], &targets[t], rho.get(n), opts.origin, opts.density)
    };
    let workers = std::thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(jobs.len().max(1));
    let chunk = jobs.len().div_ceil(workers).max(1);
    let results: Vec<Result<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(run).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    let errors = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let per = n_max + 1;
    let summaries = jobs
        .chunks(per)
        .zip(errors.chunks(per))
        .map(|(job, errs)| {
            let (best_n, best_error) = errs
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (n, e)| if e < acc.1 { (n, e) } else { acc });
            DilateSummary {
                target_id: job[0].0,
                arc_id: job[0].1,
                errors: errs.to_vec(),
                best_n,
                best_error,
            }
        })
        .collect();
    Ok(DilateReport {
        note: EVIDENCE_NOTE.to_string(),
        options: *opts,
        radii: rho.as_slice()[..per].to_vec(),
        summaries,
    })
}

/// Fraction of `targets` within `eps` of some `f(r_n ζ)`, `n ≤ n_max`.
pub fn radial_value_coverage(
    f: &FunctionExpr,
    zeta: Complex64,
    rho: &RadiiSchedule,
    n_max: usize,
    targets: &[Complex64],
    eps: f64,
) -> Result<f64> {
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("zeta must lie on the unit circle".into()));
    }
    if targets.is_empty() {
        return Ok(0.0);
    }
    let values = (0..=n_max.min(rho.len().saturating_sub(1)))
        .map(|n| f.eval(zeta * rho.get(n)))
        .collect::<Result<Vec<_>>>()?;
    let hit = targets
        .iter()
        .filter(|c| values.iter().any(|v| (v - *c).norm() < eps))
        .count();
    Ok(hit as f64 / targets.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpTransfer {
    /// Grid sup of `|F − h₀|`.
    pub delta: f64,
    /// `max(sup |F|, sup |h₀|)` on the grid.
    pub b: f64,
    pub bound: f64,
    /// Grid sup of `|exp F − exp h₀|`.
    pub exp_error: f64,
    pub holds: bool,
}

/// Measures both sides of `|e^F − e^{h₀}| ≤ e^B |F − h₀|` on one dilated arc.
pub fn exp_transfer(
    f: &FunctionExpr,
    arc: &UnitCircleArc,
    h0: &dyn Fn(Complex64) -> Complex64,
    r: f64,
    density: usize,
) -> Result<ExpTransfer> {
    let (mut delta, mut b, mut exp_error) = (0.0_f64, 0.0_f64, 0.0_f64);
    for t in arc.parameters(density) {
        let zeta = Complex64::from_polar(1.0, t);
        let v = f.eval(zeta * r)?;
        let h = h0(zeta);
        delta = delta.max((v - h).norm());
        b = b.max(v.norm()).max(h.norm());
        exp_error = exp_error.max((v.exp() - h.exp()).norm());
    }
    let bound = b.exp() * delta;
    Ok(ExpTransfer {
        delta,
        b,
        bound,
        exp_error,
        holds: exp_error <= bound,
    })
}

/// The entire function a lift inverts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "g", rename_all = "snake_case")]
pub enum LiftMap {
    Exp,
    Poly { p: ComplexPolynomial },
}

impl LiftMap {
    pub fn square() -> Self {
        Self::Poly {
            p: ComplexPolynomial::from_real(&[0.0, 0.0, 1.0]),
        }
    }

    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        match self {
            Self::Exp => {
                let e = z.exp();
                (e, e)
            }
            Self::Poly { p } => p.eval_with_derivative(z),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_with_derivative(z).0
    }

    /// Images of the zeros of `g′`.
    pub fn critical_values(&self) -> Result<Vec<Complex64>> {
        match self {
            Self::Exp => Ok(Vec::new()),
            Self::Poly { p } => Ok(p.derivative().roots()?.into_iter().map(|c| p.eval(c)).collect()),
        }
    }

    /// Values a path must keep away from: critical values, plus `0` for `exp`.
    pub fn singular_values(&self) -> Result<Vec<Complex64>> {
        let mut v = self.critical_values()?;
        if matches!(self, Self::Exp) {
            v.push(ZERO);
        }
        Ok(v)
    }

    /// A preimage of `w`: the principal logarithm for `exp`, otherwise the
    /// root of `g − w` with the largest real part (then imaginary part).
    pub fn preimage(&self, w: Complex64) -> Result<Complex64> {
        match self {
            Self::Exp => {
                if w == ZERO {
                    return Err(Error::NodeSearchFailure("exp omits 0".into()));
                }
                Ok(w.ln())
            }
            Self::Poly { p } => p
                .shifted_by(w)
                .roots()?
                .into_iter()
                .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
                .ok_or_else(|| Error::NodeSearchFailure("constant g has no preimages".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LiftStatus {
    Complete,
    /// Stalled next to a critical value after sample `index`.
    CriticalPointHit {
        index: usize,
    },
    Diverged {
        index: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftSample {
    /// Arc length along the path.
    pub s: f64,
    pub point: Complex64,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftResult {
    pub tol: f64,
    pub path_length: f64,
    pub samples: Vec<LiftSample>,
    /// Lift at each polyline vertex reached.
    pub vertex_values: Vec<Complex64>,
    pub max_defect: f64,
    pub status: LiftStatus,
}

impl LiftResult {
    pub fn endpoint(&self) -> Complex64 {
        self.samples.last().map_or(ZERO, |s| s.value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,s,path_re,path_im,h_re,h_im\n");
        for (j, s) in self.samples.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                j,
                fmt_f64(s.s),
                fmt_f64(s.point.re),
                fmt_f64(s.point.im),
                fmt_f64(s.value.re),
                fmt_f64(s.value.im)
            ));
        }
        out
    }
}

/// Lifts stall once the step falls to this fraction of the path length.
pub const MIN_STEP_FRACTION: f64 = 1e-6;
/// `|h₀|` beyond which a lift is declared divergent.
pub const DIVERGENCE_RADIUS: f64 = 1e6;
/// `|g′|` below which a stall is attributed to a critical point.
pub const CRITICAL_DERIVATIVE: f64 = 1e-8;
const CORRECTOR_ITERATIONS: usize = 50;

/// Damped Newton on `g(h) = p` from `h`; `None` unless `|g(h) − p| ≤ tol`.
fn correct(g: &LiftMap, mut h: Complex64, p: Complex64, tol: f64) -> Option<Complex64> {
    let mut res = (g.eval(h) - p).norm();
    for _ in 0..CORRECTOR_ITERATIONS {
        if res <= tol {
            return Some(h);
        }
        let (v, dv) = g.eval_with_derivative(h);
        if dv.norm() == 0.0 {
            return None;
        }
        let step = (v - p) / dv;
        let mut lambda = 1.0;
        loop {
            let cand = h - step * lambda;
            let r = (g.eval(cand) - p).norm();
            if r < res {
                h = cand;
                res = r;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-3 {
                return None;
            }
        }
        if !(h.re.is_finite() && h.im.is_finite()) {
            return None;
        }
    }
    (res <= tol).then_some(h)
}

/// Predictor–corrector continuation of `h₀` with `g(h₀(t)) = path(t)`.
///
/// Steps are accepted when the Euler predictor's residual is at most `4·tol`,
/// which keeps linear interpolation between samples within a few `tol`;
/// at the minimum step any converged, branch-consistent correction is taken.
pub fn lift_path(g: &LiftMap, path: &[Complex64], start: Complex64, tol: f64) -> Result<LiftResult> {
    if path.is_empty() {
        return Err(Error::InvalidParameter("path needs at least one point".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let start_defect = (g.eval(start) - path[0]).norm();
    if !(start_defect <= tol) {
        return Err(Error::InvalidParameter(format!(
            "|g(start) - path(0)| = {start_defect:e} exceeds tol {tol:e}"
        )));
    }
    let singular = g.critical_values()?;
    let length: f64 = path.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let min_step = MIN_STEP_FRACTION * length;
    let mut h = start;
    let mut s_acc = 0.0;
    let mut samples = vec![LiftSample {
        s: 0.0,
        point: path[0],
        value: h,
    }];
    let mut vertex_values = vec![h];
    let mut max_defect = start_defect;
    let finish = |samples: Vec<LiftSample>, vertex_values, max_defect, status| LiftResult {
        tol,
        path_length: length,
        samples,
        vertex_values,
        max_defect,
        status,
    };
    for seg in path.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let ell = (b - a).norm();
        if ell == 0.0 {
            vertex_values.push(h);
            continue;
        }
        let max_frac = 1.0 / 64.0;
        let min_frac = (min_step / ell).min(max_frac);
        let mut frac = max_frac;
        let mut sigma = 0.0;
        while sigma < 1.0 {
            let d = frac.min(1.0 - sigma);
            let at_min = d <= min_frac * (1.0 + 1e-12);
            let p_cur = a + (b - a) * sigma;
            let p_new = if sigma + d >= 1.0 { b } else { a + (b - a) * (sigma + d) };
            let (_, dg) = g.eval_with_derivative(h);
            let mut accepted = None;
            if dg.norm() > 0.0 {
                let h_pred = h + (p_new - p_cur) / dg;
                let nonlinearity = (g.eval(h_pred) - p_new).norm();
                if let Some(h_new) = correct(g, h_pred, p_new, tol) {
                    let consistent = (h_new - h_pred).norm() <= 0.5 * (h_pred - h).norm() + 1e3 * tol;
                    if consistent && (nonlinearity <= 4.0 * tol || at_min) {
                        accepted = Some((h_new, nonlinearity));
                    }
                }
            }
            match accepted {
                Some((h_new, nonlinearity)) => {
                    h = h_new;
                    sigma = if sigma + d >= 1.0 { 1.0 } else { sigma + d };
                    let defect = (g.eval(h) - p_new).norm();
                    max_defect = max_defect.max(defect);
                    samples.push(LiftSample {
                        s: s_acc + sigma * ell,
                        point: p_new,
                        value: h,
                    });
                    if h.norm() > DIVERGENCE_RADIUS || !(h.re.is_finite() && h.im.is_finite()) {
                        let index = samples.len() - 1;
                        return Ok(finish(
                            samples,
                            vertex_values,
                            max_defect,
                            LiftStatus::Diverged { index },
                        ));
                    }
                    if nonlinearity < 0.25 * tol {
                        frac = (frac * 2.0).min(max_frac);
                    }
                }
                None if at_min => {
                    let index = samples.len() - 1;
                    let near_critical = dg.norm() < CRITICAL_DERIVATIVE
                        || singular.iter().any(|c| (c - p_cur).norm() <= 16.0 * min_step);
                    let status = if near_critical {
                        LiftStatus::CriticalPointHit { index }
                    } else {
                        LiftStatus::Diverged { index }
                    };
                    return Ok(finish(samples, vertex_values, max_defect, status));
                }
                None => frac = (frac * 0.5).max(min_frac),
            }
        }
        s_acc += ell;
        vertex_values.push(h);
    }
    Ok(finish(samples, vertex_values, max_defect, LiftStatus::Complete))
}

/// Fine samples per node interval in [`liftable_target`].
pub const SUBSAMPLES: usize = 8;
const MAX_REFINEMENTS: usize = 16;
const NODE_CANDIDATES: usize = 64;
/// Nodes closer than this to a critical value are rejected.
pub const NODE_CLEARANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftableTarget {
    pub g: LiftMap,
    pub arc: UnitCircleArc,
    pub eps: f64,
    pub node_params: Vec<f64>,
    /// `w_k`, within `eps/4` of `h(t_k)` and off the critical values.
    pub node_values: Vec<Complex64>,
    pub params: Vec<f64>,
    /// `h₀` at `params`.
    pub lifted: Vec<Complex64>,
    /// Grid sup of `|g(h₀) − h|`.
    pub defect: f64,
    pub refinements: usize,
}

/// Builds `h₀` on the arc with `|g ∘ h₀ − h| < eps`: nodes where `h` moves less
/// than `eps/4`, nearby non-critical node values, and lifts of the segments
/// between them.
pub fn liftable_target(
    g: &LiftMap,
    arc: &UnitCircleArc,
    h: &dyn Fn(Complex64) -> Complex64,
    eps: f64,
    n_nodes: usize,
) -> Result<LiftableTarget> {
    if n_nodes < 2 {
        return Err(Error::InvalidParameter("n_nodes must be at least 2".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let quarter = 0.25 * eps;
    let eval_h = |t: f64| h(Complex64::from_polar(1.0, t));

    let mut refinements = 0;
    let (node_params, params, values) = loop {
        let k = (n_nodes - 1) * (1 << refinements) + 1;
        let nodes = linspace(arc.alpha, arc.beta, k);
        let params = linspace(arc.alpha, arc.beta, (k - 1) * SUBSAMPLES + 1);
        let values: Vec<Complex64> = params.iter().map(|t| eval_h(*t)).collect();
        let fine = (0..k - 1).all(|j| {
            let base = values[j * SUBSAMPLES];
            values[j * SUBSAMPLES..=(j + 1) * SUBSAMPLES]
                .iter()
                .all(|v| (v - base).norm() < quarter)
        });
        if fine {
            break (nodes, params, values);
        }
        refinements += 1;
        if refinements > MAX_REFINEMENTS {
            return Err(Error::NodeSearchFailure(format!(
                "h still moves by eps/4 between nodes after {MAX_REFINEMENTS} refinements"
            )));
        }
    };

    let singular = g.singular_values()?;
    let segment_clearance = eps / 64.0;
    let mut node_values: Vec<Complex64> = Vec::with_capacity(node_params.len());
    for j in 0..node_params.len() {
        let center = values[j * SUBSAMPLES];
        let candidates = std::iter::once(center).chain(sunflower(center, 0.9 * quarter, NODE_CANDIDATES));
        let mut chosen = None;
        for w in candidates {
            if singular.iter().any(|c| (c - w).norm() < NODE_CLEARANCE) {
                continue;
            }
            if let Some(prev) = node_values.last() {
                if singular
                    .iter()
                    .any(|c| distance_to_polyline(*c, &[*prev, w]) < segment_clearance)
                {
                    continue;
                }
            }
            chosen = Some(w);
            break;
        }
        match chosen {
            Some(w) => node_values.push(w),
            None => return Err(Error::NodeSearchFailure(format!("{center}"))),
        }
    }

    let mut path = Vec::with_capacity(params.len());
    for j in 0..node_values.len() - 1 {
        let (wa, wb) = (node_values[j], node_values[j + 1]);
        let first = if j == 0 { 0 } else { 1 };
        for i in first..=SUBSAMPLES {
            path.push(wa + (wb - wa) * (i as f64 / SUBSAMPLES as f64));
        }
    }
    let tol = (1e-6 * eps).clamp(1e-12, 1e-8);
    let start = g.preimage(path[0])?;
    let start = correct(g, start, path[0], tol).unwrap_or(start);
    let lift = lift_path(g, &path, start, tol)?;
    if lift.status != LiftStatus::Complete {
        return Err(Error::LiftFailed(format!("{:?}", lift.status)));
    }
    let lifted = lift.vertex_values;
    let defect = lifted
        .iter()
        .zip(&values)
        .map(|(l, v)| (g.eval(*l) - v).norm())
        .fold(0.0, f64::max);
    if !(defect < eps) {
        return Err(Error::LiftFailed(format!("defect {defect:e} is not below eps {eps:e}")));
    }
    Ok(LiftableTarget {
        g: g.clone(),
        arc: *arc,
        eps,
        node_params,
        node_values,
        params,
        lifted,
        defect,
        refinements,
    })
}

/// Parses a polyline `"x,y:x,y:…"`.
pub fn parse_polyline(s: &str) -> Result<Vec<Complex64>> {
    s.split(':').map(parse_point).collect()
}

/// Parses `"x,y"`.
pub fn parse_point(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidParameter(format!("expected x,y but got {s:?}"));
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(x, y))
}

/// Arc of angular width `width` centred on `zeta`'s argument.
pub fn point_arc(zeta: Complex64, width: f64) -> Result<UnitCircleArc> {
    UnitCircleArc::around(zeta.arg().rem_euclid(2.0 * PI), width)
}
