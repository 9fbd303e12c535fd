//! Staged constructions of truncated universal series: plain and shifted
//! membership builds, and the two-curve counterexample against right
//! composition with a non-rotation.
//!
//! Builds are finite. The target and arc families and the repeating
//! `(α, β)` schedule are cut to finite lists with a cyclic schedule, and that
//! truncation is stated in every series header. A stage that cannot be fitted
//! stops the build; the stages before it are kept.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compacta::{distance_to_polyline, ComponentParams, CompoundCompactum, SampledComponent};
use crate::error::{Error, Result};
use crate::fit::{fit_until_with, Fit, FitOptions, FitReport};
use crate::geometry::{self, radial_monotone_threshold, solve_level_radius, DiscAutomorphism, UnitCircleArc};
use crate::poly::{accumulate, ComplexPolynomial};

pub const SERIES_HEADER: &str = "desk-scale truncation: finitely many targets and arcs, \
cyclic (alpha, beta) schedule, finitely many stages; suprema are grid suprema";

/// An arc meets a witness curve when some arc sample is this close to it.
pub const MEETS_DISTANCE: f64 = 1e-3;
/// Strict slack required of the η inequality chain.
pub const ETA_MARGIN: f64 = 1e-4;
/// Witness radii closer than this count as a collision.
pub const COLLISION: f64 = 1e-9;
/// Extra curve samples placed in each bridging window.
const WINDOW_SAMPLES: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RadiiSchedule {
    r: Vec<f64>,
}

impl RadiiSchedule {
    /// Strictly increasing radii in `[0, 1)`.
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if let Some(x) = r.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::InvalidParameter(format!("radius {x} outside [0, 1)")));
        }
        if r.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
        }
        Ok(Self { r })
    }

    /// `r[n] = 1 − 2^{−(n+1)}` for `n < len`.
    pub fn standard(len: usize) -> Self {
        Self {
            r: (0..len).map(|n| 1.0 - 0.5_f64.powi(n as i32 + 1)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn get(&self, n: usize) -> f64 {
        self.r[n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.r
    }

    /// Drops the first `k` radii; index `n` of the result is index `n + k` here.
    pub fn drop_front(&self, k: usize) -> Self {
        Self {
            r: self.r[k.min(self.r.len())..].to_vec(),
        }
    }
}

impl TryFrom<Vec<f64>> for RadiiSchedule {
    type Error = Error;
    fn try_from(r: Vec<f64>) -> Result<Self> {
        Self::new(r)
    }
}

impl From<RadiiSchedule> for Vec<f64> {
    fn from(s: RadiiSchedule) -> Self {
        s.r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EpsilonSchedule {
    eps: Vec<f64>,
}

impl EpsilonSchedule {
    /// Positive, nonincreasing, with total at most 1/2.
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidParameter("eps entries must be positive".into()));
        }
        if eps.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("eps must be nonincreasing".into()));
        }
        let total: f64 = eps.iter().sum();
        if total > 0.5 {
            return Err(Error::InvalidParameter(format!("eps sums to {total} > 1/2")));
        }
        Ok(Self { eps })
    }

    /// `eps[n] = 2^{−(n+2)}` for `n < len`.
    pub fn standard(len: usize) -> Self {
        Self {
            eps: (0..len).map(|n| 0.5_f64.powi(n as i32 + 2)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn get(&self, n: usize) -> f64 {
        self.eps[n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.eps
    }

    /// `Σ_{k=from}^{to} eps[k]`.
    pub fn sum_range(&self, from: usize, to: usize) -> f64 {
        (from..=to).map(|k| self.eps[k]).sum()
    }
}

impl TryFrom<Vec<f64>> for EpsilonSchedule {
    type Error = Error;
    fn try_from(eps: Vec<f64>) -> Result<Self> {
        Self::new(eps)
    }
}

impl From<EpsilonSchedule> for Vec<f64> {
    fn from(s: EpsilonSchedule) -> Self {
        s.eps
    }
}

/// Cyclic enumeration of the `(target, arc)` grid. Pair `j` is
/// `(j mod T, (j div T) mod A)`, so every full cycle of `T·A` stages hits
/// every pair once.
pub fn schedule_pairs(n_targets: usize, n_arcs: usize, n_stages: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_targets == 0 || n_arcs == 0 {
        return Err(Error::InvalidParameter("need at least one target and one arc".into()));
    }
    if n_stages < n_targets * n_arcs {
        return Err(Error::InvalidParameter(format!(
            "{n_stages} stages cannot cover {n_targets}×{n_arcs} pairs"
        )));
    }
    Ok(cyclic_pairs(n_targets, n_arcs, n_stages))
}

fn cyclic_pairs(n_targets: usize, n_arcs: usize, n_stages: usize) -> (Vec<usize>, Vec<usize>) {
    let cycle = n_targets * n_arcs;
    (0..n_stages)
        .map(|j| {
            let p = j % cycle;
            (p % n_targets, p / n_targets)
        })
        .unzip()
}

/// Targets `φ_m`, arcs `K_m`, and the schedule. Stage `n ≥ 1` uses
/// `targets[alpha[n−1]]` on `arcs[beta[n−1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEnumeration {
    pub targets: Vec<ComplexPolynomial>,
    pub arcs: Vec<UnitCircleArc>,
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
}

impl TargetEnumeration {
    /// Cyclic schedule of length `n_stages`; shorter than one cycle is allowed,
    /// and an empty schedule needs no targets or arcs.
    pub fn cyclic(targets: Vec<ComplexPolynomial>, arcs: Vec<UnitCircleArc>, n_stages: usize) -> Result<Self> {
        if n_stages > 0 && (targets.is_empty() || arcs.is_empty()) {
            return Err(Error::InvalidParameter("need at least one target and one arc".into()));
        }
        let (alpha, beta) = cyclic_pairs(targets.len(), arcs.len(), n_stages);
        Ok(Self {
            targets,
            arcs,
            alpha,
            beta,
        })
    }

    /// `(target index, arc index)` of stage `n ≥ 1`.
    pub fn pair(&self, n: usize) -> (usize, usize) {
        (self.alpha[n - 1], self.beta[n - 1])
    }

    fn validate(&self, n_stages: usize) -> Result<()> {
        if self.alpha.len() < n_stages || self.beta.len() < n_stages {
            return Err(Error::InvalidParameter(format!(
                "schedule covers {} stages, {n_stages} requested",
                self.alpha.len().min(self.beta.len())
            )));
        }
        if self.alpha.iter().any(|&a| a >= self.targets.len()) || self.beta.iter().any(|&b| b >= self.arcs.len()) {
            return Err(Error::InvalidParameter("schedule index out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub rho: RadiiSchedule,
    pub eps: EpsilonSchedule,
    #[serde(flatten)]
    pub enumeration: TargetEnumeration,
    pub n_stages: usize,
    /// Stage `n` is fitted to `tol_factor · eps[n]`.
    pub tol_factor: f64,
    pub arc_density: usize,
    pub disc_density: usize,
    pub curve_density: usize,
    pub max_degree: usize,
    pub fit: FitOptions,
}

impl BuildConfig {
    /// Standard schedules, cyclic enumeration, tolerance factor 1/2, 512
    /// samples per arc and degree budget 512.
    pub fn new(targets: Vec<ComplexPolynomial>, arcs: Vec<UnitCircleArc>, n_stages: usize) -> Result<Self> {
        let max_degree = 512;
        Ok(Self {
            rho: RadiiSchedule::standard(n_stages + 2),
            eps: EpsilonSchedule::standard(n_stages + 2),
            enumeration: TargetEnumeration::cyclic(targets, arcs, n_stages)?,
            n_stages,
            tol_factor: 0.5,
            arc_density: 512,
            disc_density: 4 * max_degree,
            curve_density: 1024,
            max_degree,
            fit: FitOptions::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_stages;
        if self.rho.len() < n + 1 || self.eps.len() < n + 1 {
            return Err(Error::InvalidParameter(format!(
                "{n} stages need {} radii and eps entries",
                n + 1
            )));
        }
        self.enumeration.validate(n)?;
        if !(self.tol_factor > 0.0 && self.tol_factor <= 1.0) {
            return Err(Error::InvalidParameter("tol_factor must lie in (0, 1]".into()));
        }
        if self.arc_density < 2 || self.disc_density < 2 || self.curve_density < 2 || self.max_degree == 0 {
            return Err(Error::InvalidParameter(
                "densities must be >= 2 and max_degree >= 1".into(),
            ));
        }
        if self.rho.as_slice().first().is_some_and(|&r0| r0 <= 0.0) && n > 0 {
            return Err(Error::InvalidParameter(
                "the first disc constraint needs r[0] > 0".into(),
            ));
        }
        Ok(())
    }

    fn stage_tol(&self, n: usize) -> f64 {
        self.tol_factor * self.eps.get(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum StageCase {
    /// The arc meets no witness curve.
    I,
    /// The arc meets witness curve `curve` (1 or 2) only.
    II { curve: usize },
    /// The arc meets both curves; `first` has the smaller level radius.
    III { first: usize },
}

/// Bridging value pinned on a witness curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub curve: usize,
    /// Curve parameter `R` of the pin `Φ(Rζ)`.
    pub parameter: f64,
    pub point: Complex64,
    /// Prescribed value of `P_n` at the pin.
    pub value: Complex64,
    /// `|S_n − φ|` at the pin after the fit.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub n: usize,
    #[serde(flatten)]
    pub case: StageCase,
    pub target: usize,
    pub arc: usize,
    pub r_n: f64,
    pub eps_n: f64,
    pub tol: f64,
    /// Smallest degree compatible with the disc constraint by the
    /// Bernstein–Walsh inequality.
    pub degree_floor: Option<usize>,
    /// Components without points or targets; regenerable from their params.
    pub compactum: Vec<SampledComponent>,
    pub fit: FitReport,
    pub coeffs: ComplexPolynomial,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pins: Vec<Pin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub n: usize,
    #[serde(flatten)]
    pub case: StageCase,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best: Option<FitReport>,
    pub degree_floor: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesKind {
    Membership,
    Shifted { w: Complex64 },
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub samples: usize,
    pub r_from: f64,
    pub r_to: f64,
    /// Largest `min(|F(Φ(rζ₁))|, |F(Φ(rζ₂))|)` over the sweep.
    pub max_min_modulus: f64,
    pub at_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    pub phi: DiscAutomorphism,
    pub witness: CounterexampleWitness,
    /// `Σ eps[n] + Σ` realized stage sup errors over the built stages.
    pub budget: f64,
    pub sweep: SweepSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalSeries {
    pub header: String,
    #[serde(flatten)]
    pub kind: SeriesKind,
    pub config: BuildConfig,
    pub stages: Vec<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<StageFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleRecord>,
}

impl UniversalSeries {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none() && self.stages.len() == self.config.n_stages
    }

    /// `Σ_{k≤n} P_k` over the first `n` built stages (`P₀ = 0`).
    pub fn partial_sum(&self, n: usize) -> ComplexPolynomial {
        let polys: Vec<ComplexPolynomial> = self.stages[..n.min(self.stages.len())]
            .iter()
            .map(|s| s.coeffs.clone())
            .collect();
        accumulate(&polys)
    }

    pub fn total(&self) -> ComplexPolynomial {
        self.partial_sum(self.stages.len())
    }

    /// Origin of the dilations the series was built for.
    pub fn origin(&self) -> Complex64 {
        match self.kind {
            SeriesKind::Shifted { w } => w,
            _ => ZERO,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Degree below which no polynomial bounded by `tol` on `|z| = r_inner` can
/// come within `tol` of a value of modulus `peak` at `|z| = r_outer`.
pub fn degree_floor(peak: f64, tol: f64, r_inner: f64, r_outer: f64) -> Option<usize> {
    if peak <= 2.0 * tol || !(r_outer > r_inner) || r_inner <= 0.0 {
        return None;
    }
    Some((((peak - tol) / tol).ln() / (r_outer / r_inner).ln()).ceil() as usize)
}

/// Arc `w + r(ζ − w)` with targets `φ(ζ) − S(z)`, labeled `"arc"`.
fn arc_component(
    arc: &UnitCircleArc,
    r: f64,
    w: Complex64,
    density: usize,
    phi: &ComplexPolynomial,
    partial: &ComplexPolynomial,
) -> Result<SampledComponent> {
    let params = ComponentParams::DilatedArc {
        alpha: arc.alpha,
        beta: arc.beta,
        r,
        w,
    };
    let comp = SampledComponent::from_params("arc", params, density, None)?;
    let target = arc
        .parameters(density)
        .into_iter()
        .zip(&comp.points)
        .map(|(t, z)| phi.eval(Complex64::from_polar(1.0, t)) - partial.eval(*z))
        .collect();
    comp.with_target(target)
}

fn disc_component(r: f64, w: Complex64, density: usize) -> Result<SampledComponent> {
    let params = ComponentParams::DiscBoundary { r, w };
    let comp = SampledComponent::from_params("disc", params, density, None)?;
    let n = comp.points.len();
    comp.with_target(vec![ZERO; n])
}

fn stripped(set: &CompoundCompactum) -> Vec<SampledComponent> {
    set.components
        .iter()
        .map(|c| SampledComponent {
            points: Vec::new(),
            target: None,
            ..c.clone()
        })
        .collect()
}

fn peak_target(set: &CompoundCompactum) -> f64 {
    set.components
        .iter()
        .filter_map(|c| c.target.as_ref())
        .flatten()
        .map(|t| t.norm())
        .fold(0.0, f64::max)
}

enum StageFit {
    Done(Fit),
    Failed(StageFailure),
}

fn run_fit(
    cfg: &BuildConfig,
    set: &CompoundCompactum,
    n: usize,
    case: StageCase,
    floor: Option<usize>,
) -> Result<StageFit> {
    match fit_until_with(set, cfg.stage_tol(n), cfg.max_degree, &cfg.fit) {
        Ok(fit) => Ok(StageFit::Done(fit)),
        Err(Error::ToleranceUnreachable { tol, best }) => Ok(StageFit::Failed(StageFailure {
            n,
            case,
            reason: format!(
                "tolerance {tol:e} unreachable within degree {}; best sup error {:e}",
                cfg.max_degree, best.report.sup_error
            ),
            best: Some(best.report),
            degree_floor: floor,
        })),
        Err(e) => Err(e),
    }
}

/// Membership series for plain radial dilates.
pub fn build_membership_series(cfg: &BuildConfig) -> Result<UniversalSeries> {
    build_dilation_series(cfg, ZERO, SeriesKind::Membership)
}

/// Membership series for the dilations `ζ ↦ w + r(ζ − w)`.
pub fn build_shifted_membership_series(w: Complex64, cfg: &BuildConfig) -> Result<UniversalSeries> {
    if !(w.norm() < 1.0) {
        return Err(Error::InvalidParameter(format!("|w| = {} must be < 1", w.norm())));
    }
    build_dilation_series(cfg, w, SeriesKind::Shifted { w })
}

fn build_dilation_series(cfg: &BuildConfig, w: Complex64, kind: SeriesKind) -> Result<UniversalSeries> {
    cfg.validate()?;
    let mut series = UniversalSeries {
        header: SERIES_HEADER.to_string(),
        kind,
        config: cfg.clone(),
        stages: Vec::new(),
        failure: None,
        counterexample: None,
    };
    let mut partial = ComplexPolynomial::zero();
    for n in 1..=cfg.n_stages {
        let (ti, ai) = cfg.enumeration.pair(n);
        let r_n = cfg.rho.get(n);
        let set = CompoundCompactum::union(vec![
            disc_component(cfg.rho.get(n - 1), w, cfg.disc_density)?,
            arc_component(
                &cfg.enumeration.arcs[ai],
                r_n,
                w,
                cfg.arc_density,
                &cfg.enumeration.targets[ti],
                &partial,
            )?,
        ])?;
        let floor = degree_floor(peak_target(&set), cfg.stage_tol(n), cfg.rho.get(n - 1), r_n);
        let fit = match run_fit(cfg, &set, n, StageCase::I, floor)? {
            StageFit::Done(fit) => fit,
            StageFit::Failed(f) => {
                series.failure = Some(f);
                return Ok(series);
            }
        };
        partial = &partial + &fit.poly;
        series.stages.push(Stage {
            n,
            case: StageCase::I,
            target: ti,
            arc: ai,
            r_n,
            eps_n: cfg.eps.get(n),
            tol: cfg.stage_tol(n),
            degree_floor: floor,
            compactum: stripped(&set),
            fit: fit.report,
            coeffs: fit.poly,
            pins: Vec::new(),
            eta: None,
        });
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelescopeEntry {
    pub n: usize,
    pub target: usize,
    pub arc: usize,
    pub sup_error: f64,
    pub bound: f64,
    pub holds: bool,
}

/// For every built stage `n`, the grid sup of `|F(w + r_n(ζ − w)) − φ(ζ)|`
/// over its arc against `eps[n] + Σ_{k>n} eps[k]`, with `F` the full sum.
pub fn telescoping_check(series: &UniversalSeries) -> Vec<TelescopeEntry> {
    let cfg = &series.config;
    let total = series.total();
    let w = series.origin();
    let last = series.stages.len();
    series
        .stages
        .iter()
        .map(|s| {
            let phi = &cfg.enumeration.targets[s.target];
            let arc = &cfg.enumeration.arcs[s.arc];
            let sup_error = arc
                .parameters(cfg.arc_density)
                .into_iter()
                .map(|t| {
                    let zeta = Complex64::from_polar(1.0, t);
                    (total.eval(w + (zeta - w) * s.r_n) - phi.eval(zeta)).norm()
                })
                .fold(0.0, f64::max);
            let bound = s.eps_n
                + if s.n < last {
                    cfg.eps.sum_range(s.n + 1, last)
                } else {
                    0.0
                };
            TelescopeEntry {
                n: s.n,
                target: s.target,
                arc: s.arc,
                sup_error,
                bound,
                holds: sup_error <= bound,
            }
        })
        .collect()
}

/// Level radii of the two Möbius radial curves `r ↦ Φ(rζᵢ)`.
///
/// `big_r[i][n−1] = Rₙ` solves `|Φ(Rζᵢ)| = r_n` for `n = 1..=N`;
/// `s[i][n]` solves `|Φ(sζᵢ)| = (r_n + r_{n+1})/2` for `n = 0..=N`. A half
/// level below the curve's value at `r_minus1` is clamped to `r_minus1` and
/// flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleWitness {
    pub zeta1: Complex64,
    pub zeta2: Complex64,
    pub r_minus1: f64,
    pub thresholds: [f64; 2],
    /// Radii after dropping the leading entries no curve can reach.
    pub rho: RadiiSchedule,
    pub dropped: usize,
    pub n_stages: usize,
    pub big_r: [Vec<f64>; 2],
    pub s: [Vec<f64>; 2],
    pub s_clamped: [Vec<bool>; 2],
    /// `ηₙ` for stages that needed one (index `n − 1`).
    pub eta: Vec<Option<f64>>,
}

impl CounterexampleWitness {
    pub fn zeta(&self, curve: usize) -> Complex64 {
        if curve == 0 {
            self.zeta1
        } else {
            self.zeta2
        }
    }

    /// `Rₙ` on curve `i ∈ {0, 1}`, `n ≥ 1`.
    pub fn level(&self, i: usize, n: usize) -> f64 {
        self.big_r[i][n - 1]
    }

    pub fn half_level(&self, i: usize, n: usize) -> f64 {
        self.s[i][n]
    }
}

/// Drops leading radii until `r[1]` exceeds the curves' common floor
/// `max_i |Φ(r_minus1 ζᵢ)|`; returns the schedule and the number dropped.
pub fn admissible_radii(
    phi: &DiscAutomorphism,
    zetas: [Complex64; 2],
    r_minus1: f64,
    rho: &RadiiSchedule,
) -> (RadiiSchedule, usize) {
    let floor = zetas
        .iter()
        .map(|z| phi.radial_modulus(*z, r_minus1))
        .fold(0.0, f64::max);
    let k = (0..rho.len().saturating_sub(1))
        .find(|&k| rho.get(k + 1) > floor)
        .unwrap_or(rho.len());
    (rho.drop_front(k), k)
}

pub fn compute_witness(
    phi: &DiscAutomorphism,
    zeta1: Complex64,
    zeta2: Complex64,
    rho: &RadiiSchedule,
    n_stages: usize,
) -> Result<CounterexampleWitness> {
    if phi.is_rotation() {
        return Err(Error::InvalidParameter("a rotation has no witness pair".into()));
    }
    let a = phi.a();
    if ((a.conj() * zeta1).re - (a.conj() * zeta2).re).abs() < 1e-12 {
        return Err(Error::CriterionViolated);
    }
    let zetas = [zeta1, zeta2];
    let thresholds = [
        radial_monotone_threshold(phi, zeta1)?,
        radial_monotone_threshold(phi, zeta2)?,
    ];
    let r_minus1 = thresholds[0].max(thresholds[1]);
    let (rho, dropped) = admissible_radii(phi, zetas, r_minus1, rho);
    if rho.len() < n_stages + 2 {
        return Err(Error::InvalidParameter(format!(
            "{n_stages} stages need {} admissible radii, {} left after dropping {dropped}",
            n_stages + 2,
            rho.len()
        )));
    }
    let mut big_r = [Vec::new(), Vec::new()];
    let mut s = [Vec::new(), Vec::new()];
    let mut s_clamped = [Vec::new(), Vec::new()];
    for i in 0..2 {
        let floor = phi.radial_modulus(zetas[i], r_minus1);
        for n in 1..=n_stages {
            big_r[i].push(solve_level_radius(phi, zetas[i], rho.get(n), r_minus1)?);
        }
        for n in 0..=n_stages {
            let level = 0.5 * (rho.get(n) + rho.get(n + 1));
            if level < floor {
                s[i].push(r_minus1);
                s_clamped[i].push(true);
            } else {
                s[i].push(solve_level_radius(phi, zetas[i], level, r_minus1)?);
                s_clamped[i].push(false);
            }
        }
    }
    let witness = CounterexampleWitness {
        zeta1,
        zeta2,
        r_minus1,
        thresholds,
        rho,
        dropped,
        n_stages,
        big_r,
        s,
        s_clamped,
        eta: vec![None; n_stages],
    };
    check_interleaving(&witness)?;
    Ok(witness)
}

fn check_interleaving(w: &CounterexampleWitness) -> Result<()> {
    let mut tagged = Vec::new();
    for i in 0..2 {
        // s_0 < R_1 < s_1 < … < R_N < s_N
        let mut chain = vec![(w.s[i][0], w.s_clamped[i][0])];
        for n in 1..=w.n_stages {
            chain.push((w.big_r[i][n - 1], false));
            chain.push((w.s[i][n], w.s_clamped[i][n]));
        }
        for pair in chain.windows(2) {
            if !(pair[1].0 - pair[0].0 > COLLISION) {
                return Err(Error::InterleavingViolated(format!(
                    "curve {}: {} then {}",
                    i + 1,
                    pair[0].0,
                    pair[1].0
                )));
            }
        }
        for (k, (v, clamped)) in chain.into_iter().enumerate() {
            if clamped {
                continue;
            }
            if !(v > w.r_minus1 && v < 1.0) {
                return Err(Error::InterleavingViolated(format!(
                    "curve {}: {v} outside (r_-1, 1)",
                    i + 1
                )));
            }
            tagged.push((v, 2 * i + k % 2));
        }
    }
    tagged.sort_by(|x, y| x.0.total_cmp(&y.0));
    for pair in tagged.windows(2) {
        if pair[0].1 != pair[1].1 && pair[1].0 - pair[0].0 <= COLLISION {
            return Err(Error::InterleavingViolated(format!(
                "sequences collide at {}",
                pair[0].0
            )));
        }
    }
    Ok(())
}

/// Upper curve parameter of the sampled witness curves.
fn curve_end(w: &CounterexampleWitness) -> f64 {
    let last = w.s[0][w.n_stages].max(w.s[1][w.n_stages]);
    (1.0_f64 - 1e-3).max(last + 0.5 * (1.0 - last))
}

fn witness_curve(
    phi: &DiscAutomorphism,
    w: &CounterexampleWitness,
    i: usize,
    from: f64,
    extra: Vec<f64>,
    density: usize,
) -> Result<SampledComponent> {
    let params = ComponentParams::RadialCurve {
        phi: *phi,
        zeta: w.zeta(i),
        r_from: from,
        r_to: curve_end(w),
        extra,
    };
    SampledComponent::from_params(format!("curve{}", i + 1), params, density, None)
}

/// Case of stage `n`: which witness curves come within [`MEETS_DISTANCE`] of the arc.
pub fn classify_stage(
    n: usize,
    arc: &SampledComponent,
    curves: &[SampledComponent],
    witness: &CounterexampleWitness,
) -> StageCase {
    let meets: Vec<bool> = curves
        .iter()
        .map(|c| {
            arc.points
                .iter()
                .any(|p| distance_to_polyline(*p, &c.points) < MEETS_DISTANCE)
        })
        .collect();
    match meets.as_slice() {
        [true, true] => {
            let first = if witness.level(0, n) < witness.level(1, n) {
                1
            } else {
                2
            };
            StageCase::III { first }
        }
        [true, false] => StageCase::II { curve: 1 },
        [false, true] => StageCase::II { curve: 2 },
        _ => StageCase::I,
    }
}

/// `ηₙ` for a Case III stage with `first` the curve of smaller level radius
/// (0-based), halving from a quarter of the gap between the level radii until
/// the inequality chain holds with slack [`ETA_MARGIN`].
pub fn eta_search(phi: &DiscAutomorphism, w: &CounterexampleWitness, n: usize, first: usize) -> Result<f64> {
    let (i, j) = (first, 1 - first);
    let mi = |r: f64| phi.radial_modulus(w.zeta(i), r);
    let mj = |r: f64| phi.radial_modulus(w.zeta(j), r);
    let (ri, rj) = (w.level(i, n), w.level(j, n));
    let r_n = w.rho.get(n);
    let m = ETA_MARGIN;
    let holds = |eta: f64| {
        let a = mj(w.half_level(j, n - 1)).max(mj(ri + eta)) < mj(rj - eta) - m;
        let b = mj(rj - eta) < r_n - m;
        let c = r_n < mi(ri + eta) - m;
        let d = mi(ri + eta) < mi(w.half_level(i, n)).min(mi(rj - eta)) - m;
        let e = mi(ri - eta) >= mi(w.half_level(i, n - 1));
        let f = mj(rj + eta) <= mj(w.half_level(j, n));
        a && b && c && d && e && f
    };
    let mut eta = 0.25 * (rj - ri);
    while eta > 1e-15 {
        if holds(eta) {
            return Ok(eta);
        }
        eta *= 0.5;
    }
    Err(Error::EtaNotFound {
        stage: n,
        detail: format!("level radii {ri} and {rj} at r_n = {r_n}"),
    })
}

/// Hat function on `[lo, hi]` peaking at `peak` with value 1.
fn hat(r: f64, lo: f64, peak: f64, hi: f64) -> f64 {
    if r <= lo || r >= hi {
        0.0
    } else if r <= peak {
        if peak > lo {
            (r - lo) / (peak - lo)
        } else {
            1.0
        }
    } else if hi > peak {
        (hi - r) / (hi - peak)
    } else {
        1.0
    }
}

struct Bridge {
    curve: usize,
    from: f64,
    lo: f64,
    peak: f64,
    hi: f64,
}

fn bridged_curve(
    phi: &DiscAutomorphism,
    w: &CounterexampleWitness,
    b: &Bridge,
    value: Complex64,
    density: usize,
) -> Result<SampledComponent> {
    let mut extra = geometry::linspace(b.lo, b.hi, WINDOW_SAMPLES);
    extra.push(b.peak);
    let comp = witness_curve(phi, w, b.curve, b.from, extra, density)?;
    let radii = comp.params.curve_parameters(density).expect("radial curve");
    let target = radii.iter().map(|&r| value * hat(r, b.lo, b.peak, b.hi)).collect();
    comp.with_target(target)
}

/// The two-curve construction against right composition with `phi`.
///
/// The build runs on the witness's admissible radii, which replace
/// `cfg.rho` in the returned config.
pub fn build_counterexample_series(
    cfg: &BuildConfig,
    phi: &DiscAutomorphism,
    witness: &CounterexampleWitness,
) -> Result<UniversalSeries> {
    let mut cfg = cfg.clone();
    cfg.rho = witness.rho.clone();
    cfg.validate()?;
    if witness.n_stages < cfg.n_stages {
        return Err(Error::InvalidParameter(format!(
            "witness covers {} stages, {} requested",
            witness.n_stages, cfg.n_stages
        )));
    }
    let mut witness = witness.clone();
    let mut series = UniversalSeries {
        header: SERIES_HEADER.to_string(),
        kind: SeriesKind::Counterexample,
        config: cfg.clone(),
        stages: Vec::new(),
        failure: None,
        counterexample: None,
    };
    let plain = [
        witness_curve(phi, &witness, 0, witness.r_minus1, Vec::new(), cfg.curve_density)?,
        witness_curve(phi, &witness, 1, witness.r_minus1, Vec::new(), cfg.curve_density)?,
    ];
    let mut partial = ComplexPolynomial::zero();
    for n in 1..=cfg.n_stages {
        let (ti, ai) = cfg.enumeration.pair(n);
        let target = &cfg.enumeration.targets[ti];
        let r_n = cfg.rho.get(n);
        let arc = arc_component(&cfg.enumeration.arcs[ai], r_n, ZERO, cfg.arc_density, target, &partial)?;
        let case = classify_stage(n, &arc, &plain, &witness);
        let pin_value = |i: usize| -> Result<(f64, Complex64, Complex64)> {
            let rr = witness.level(i, n);
            let z = phi.apply(witness.zeta(i) * rr)?;
            Ok((rr, z, target.eval(z / r_n) - partial.eval(z)))
        };
        let zero_curve = |i: usize| -> Result<SampledComponent> {
            let c = plain[i].clone();
            let len = c.points.len();
            c.with_target(vec![ZERO; len])
        };
        let mut components = vec![disc_component(cfg.rho.get(n - 1), ZERO, cfg.disc_density)?, arc];
        let mut pins = Vec::new();
        let mut eta = None;
        match case {
            StageCase::I => {
                components.push(zero_curve(0)?);
                components.push(zero_curve(1)?);
            }
            StageCase::II { curve } => {
                let i = curve - 1;
                let (rr, z, v) = pin_value(i)?;
                let bridge = Bridge {
                    curve: i,
                    from: witness.r_minus1,
                    lo: witness.half_level(i, n - 1),
                    peak: rr,
                    hi: witness.half_level(i, n),
                };
                let mut both = [None, None];
                both[i] = Some(bridged_curve(phi, &witness, &bridge, v, cfg.curve_density)?);
                both[1 - i] = Some(zero_curve(1 - i)?);
                components.extend(both.into_iter().flatten());
                pins.push((i, rr, z, v));
            }
            StageCase::III { first } => {
                let i = first - 1;
                let e = match eta_search(phi, &witness, n, i) {
                    Ok(e) => e,
                    Err(err) => {
                        series.failure = Some(StageFailure {
                            n,
                            case,
                            reason: err.to_string(),
                            best: None,
                            degree_floor: None,
                        });
                        break;
                    }
                };
                eta = Some(e);
                let mut both = [None, None];
                for k in [i, 1 - i] {
                    let (rr, z, v) = pin_value(k)?;
                    let from = if k == i {
                        witness.half_level(i, n - 1)
                    } else {
                        witness.r_minus1
                    };
                    let bridge = Bridge {
                        curve: k,
                        from,
                        lo: rr - e,
                        peak: rr,
                        hi: rr + e,
                    };
                    both[k] = Some(bridged_curve(phi, &witness, &bridge, v, cfg.curve_density)?);
                    pins.push((k, rr, z, v));
                }
                components.extend(both.into_iter().flatten());
            }
        }
        let set = CompoundCompactum::union(components)?;
        let floor = degree_floor(peak_target(&set), cfg.stage_tol(n), cfg.rho.get(n - 1), r_n);
        let fit = match run_fit(&cfg, &set, n, case, floor)? {
            StageFit::Done(fit) => fit,
            StageFit::Failed(f) => {
                series.failure = Some(f);
                break;
            }
        };
        partial = &partial + &fit.poly;
        witness.eta[n - 1] = eta;
        let pins = pins
            .into_iter()
            .map(|(i, rr, z, v)| Pin {
                curve: i + 1,
                parameter: rr,
                point: z,
                value: v,
                residual: (partial.eval(z) - target.eval(z / r_n)).norm(),
            })
            .collect();
        series.stages.push(Stage {
            n,
            case,
            target: ti,
            arc: ai,
            r_n,
            eps_n: cfg.eps.get(n),
            tol: cfg.stage_tol(n),
            degree_floor: floor,
            compactum: stripped(&set),
            fit: fit.report,
            coeffs: fit.poly,
            pins,
            eta,
        });
    }
    let built = series.stages.len();
    let budget = if built == 0 { 0.0 } else { cfg.eps.sum_range(1, built) }
        + series.stages.iter().map(|s| s.fit.sup_error).sum::<f64>();
    let sweep = min_modulus_sweep(
        &series.total(),
        phi,
        &witness,
        witness.r_minus1,
        cfg.rho.get(built.max(1)),
        200,
    )?;
    series.counterexample = Some(CounterexampleRecord {
        phi: *phi,
        witness,
        budget,
        sweep,
    });
    Ok(series)
}

/// Largest `min(|F(Φ(rζ₁))|, |F(Φ(rζ₂))|)` over `samples` radii in `[r_from, r_to]`.
pub fn min_modulus_sweep(
    f: &ComplexPolynomial,
    phi: &DiscAutomorphism,
    witness: &CounterexampleWitness,
    r_from: f64,
    r_to: f64,
    samples: usize,
) -> Result<SweepSummary> {
    let mut worst = (f64::NEG_INFINITY, r_from);
    for r in geometry::linspace(r_from, r_to, samples) {
        let m1 = f.eval(phi.apply(witness.zeta1 * r)?).norm();
        let m2 = f.eval(phi.apply(witness.zeta2 * r)?).norm();
        let m = m1.min(m2);
        if m > worst.0 {
            worst = (m, r);
        }
    }
    Ok(SweepSummary {
        samples,
        r_from,
        r_to,
        max_min_modulus: worst.0,
        at_r: worst.1,
    })
}
