//! Sampled compact sets: dilated arcs, disc constraints, Möbius radial curves
//! and labeled unions of them.
//!
//! Grid suprema only certify the grid. Every component records its sampling
//! parameters so a set can be regenerated and refined deterministically.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, DiscAutomorphism, UnitCircleArc};

/// Below this separation two components are reported as overlapping.
pub const OVERLAP_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    DilatedArc,
    DiscBoundary,
    RadialCurve,
    ParamUnion,
}

/// Generating parameters of a component. `w` is the origin of a `Ψ_w`
/// dilation and is zero for plain radial dilation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ComponentParams {
    DilatedArc {
        alpha: f64,
        beta: f64,
        r: f64,
        #[serde(default)]
        w: Complex64,
    },
    DiscBoundary {
        r: f64,
        #[serde(default)]
        w: Complex64,
    },
    RadialCurve {
        phi: DiscAutomorphism,
        zeta: Complex64,
        r_from: f64,
        r_to: f64,
        /// Additional curve parameters merged into the uniform grid.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        extra: Vec<f64>,
    },
    ParamUnion {
        w_center: Complex64,
        delta: f64,
        r_k: f64,
        alpha: f64,
        beta: f64,
        param_density: usize,
    },
}

impl ComponentParams {
    pub fn kind(&self) -> ComponentKind {
        match self {
            Self::DilatedArc { .. } => ComponentKind::DilatedArc,
            Self::DiscBoundary { .. } => ComponentKind::DiscBoundary,
            Self::RadialCurve { .. } => ComponentKind::RadialCurve,
            Self::ParamUnion { .. } => ComponentKind::ParamUnion,
        }
    }

    fn validate(&self, density: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Self::DilatedArc { alpha, beta, r, w } => {
                UnitCircleArc::new(*alpha, *beta)?;
                if density < 2 {
                    return bad(format!("arc density must be >= 2, got {density}"));
                }
                if !(*r > 0.0 && *r < 1.0) || w.norm() >= 1.0 {
                    return bad(format!("dilated arc needs 0 < r < 1 and |w| < 1, r = {r}"));
                }
            }
            Self::DiscBoundary { r, w } => {
                if density == 0 || !(*r > 0.0 && *r < 1.0) || w.norm() >= 1.0 {
                    return bad(format!("disc constraint needs 0 < r < 1 and density > 0, r = {r}"));
                }
            }
            Self::RadialCurve {
                zeta,
                r_from,
                r_to,
                extra,
                ..
            } => {
                if (zeta.norm() - 1.0).abs() > 1e-12 {
                    return bad("radial curve direction must be unimodular".into());
                }
                if !(0.0 <= *r_from && r_from < r_to && *r_to < 1.0) || density < 2 {
                    return bad(format!(
                        "radial curve needs 0 <= r_from < r_to < 1 and density >= 2 ({r_from}, {r_to})"
                    ));
                }
                if extra.iter().any(|r| !(0.0..1.0).contains(r)) {
                    return bad("extra curve parameters must lie in [0, 1)".into());
                }
            }
            Self::ParamUnion {
                w_center,
                delta,
                r_k,
                alpha,
                beta,
                ..
            } => {
                UnitCircleArc::new(*alpha, *beta)?;
                if !(*delta >= 0.0) || w_center.norm() + delta >= 1.0 || !(*r_k > 0.0 && *r_k < 1.0) {
                    return bad("parameter union needs |w| + delta < 1 and 0 < r_k < 1".into());
                }
            }
        }
        Ok(())
    }

    /// Curve parameters `r` behind the samples of a radial curve, in sample order.
    pub fn curve_parameters(&self, density: usize) -> Option<Vec<f64>> {
        match self {
            Self::RadialCurve {
                r_from, r_to, extra, ..
            } => {
                let mut radii = geometry::linspace(*r_from, *r_to, density);
                radii.extend(extra.iter().copied());
                radii.sort_by(f64::total_cmp);
                radii.dedup();
                Some(radii)
            }
            _ => None,
        }
    }

    /// Deterministic point set for these parameters at `density`.
    pub fn sample(&self, density: usize) -> Result<Vec<Complex64>> {
        self.validate(density)?;
        Ok(match self {
            Self::DilatedArc { alpha, beta, r, w } => geometry::linspace(*alpha, *beta, density)
                .into_iter()
                .map(|t| *w + (Complex64::from_polar(1.0, t) - *w) * *r)
                .collect(),
            Self::DiscBoundary { r, w } => (0..density)
                .map(|j| {
                    let t = TAU * j as f64 / density as f64;
                    *w + (Complex64::from_polar(1.0, t) - *w) * *r
                })
                .collect(),
            Self::RadialCurve { phi, zeta, .. } => {
                let radii = self.curve_parameters(density).expect("radial curve");
                radii
                    .into_iter()
                    .map(|r| phi.apply(*zeta * r))
                    .collect::<Result<Vec<_>>>()?
            }
            Self::ParamUnion {
                w_center,
                delta,
                r_k,
                alpha,
                beta,
                param_density,
            } => {
                let taus = geometry::polar_disc_grid(*w_center, *delta, *param_density);
                let arc: Vec<Complex64> = geometry::linspace(*alpha, *beta, density)
                    .into_iter()
                    .map(|t| Complex64::from_polar(*r_k, t))
                    .collect();
                let mut out = Vec::with_capacity(taus.len() * arc.len());
                for tau in taus {
                    let map = DiscAutomorphism::translation(tau)?;
                    for z in &arc {
                        out.push(map.apply(*z)?);
                    }
                }
                out
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledComponent {
    pub label: String,
    #[serde(flatten)]
    pub params: ComponentParams,
    pub density: usize,
    /// Relative voice of the component in a least-squares fit; each point
    /// carries `weight / points.len()`.
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<Complex64>>,
}

fn unit_weight() -> f64 {
    1.0
}

impl SampledComponent {
    pub fn from_params(
        label: impl Into<String>,
        params: ComponentParams,
        density: usize,
        target: Option<Vec<Complex64>>,
    ) -> Result<Self> {
        let points = params.sample(density)?;
        let component = Self {
            label: label.into(),
            params,
            density,
            weight: 1.0,
            points,
            target,
        };
        component.validate()?;
        Ok(component)
    }

    pub fn kind(&self) -> ComponentKind {
        self.params.kind()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidParameter(format!("component {} is empty", self.label)));
        }
        if let Some(z) = self.points.iter().find(|z| !(z.norm() < 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "component {} has a point of modulus {} outside the open disc",
                self.label,
                z.norm()
            )));
        }
        if let Some(t) = &self.target {
            if t.len() != self.points.len() {
                return Err(Error::InvalidParameter(format!(
                    "component {}: {} targets for {} points",
                    self.label,
                    t.len(),
                    self.points.len()
                )));
            }
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(Error::InvalidParameter("component weight must be positive".into()));
        }
        Ok(())
    }

    pub fn with_target(mut self, target: Vec<Complex64>) -> Result<Self> {
        self.target = Some(target);
        self.validate()?;
        Ok(self)
    }

    /// Sets the target to `f(point)` at every sample.
    pub fn with_target_fn(self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        let target = self.points.iter().map(|z| f(*z)).collect();
        self.with_target(target)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Result<Self> {
        self.weight = weight;
        self.validate()?;
        Ok(self)
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Regenerates `points` from the stored parameters.
    pub fn regenerate(&mut self) -> Result<()> {
        self.points = self.params.sample(self.density)?;
        self.validate()
    }
}

/// `density` equally spaced samples of `{r e^{it} : t ∈ [α, β]}`, endpoints included.
pub fn sample_dilated_arc(arc: &UnitCircleArc, r: f64, density: usize) -> Result<SampledComponent> {
    let params = ComponentParams::DilatedArc {
        alpha: arc.alpha,
        beta: arc.beta,
        r,
        w: Complex64::new(0.0, 0.0),
    };
    SampledComponent::from_params("arc", params, density, None)
}

/// Boundary samples of `D̄(0, r)` with target 0. Sampling the boundary is
/// enough for polynomials by the maximum principle.
pub fn sample_disc_constraint(r: f64, density: usize) -> Result<SampledComponent> {
    let params = ComponentParams::DiscBoundary {
        r,
        w: Complex64::new(0.0, 0.0),
    };
    let mut c = SampledComponent::from_params("disc", params, density, None)?;
    c.target = Some(vec![Complex64::new(0.0, 0.0); c.points.len()]);
    Ok(c)
}

/// Images `Φ(rζ)` for `density` equally spaced `r ∈ [r_from, r_to]`.
pub fn sample_radial_curve(
    phi: &DiscAutomorphism,
    zeta: Complex64,
    r_from: f64,
    r_to: f64,
    density: usize,
) -> Result<SampledComponent> {
    let params = ComponentParams::RadialCurve {
        phi: *phi,
        zeta,
        r_from,
        r_to,
        extra: Vec::new(),
    };
    SampledComponent::from_params("curve", params, density, None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundCompactum {
    pub components: Vec<SampledComponent>,
    /// Minimum distance between points of distinct components; `None` for a
    /// single component (no pair to measure).
    pub separation: Option<f64>,
}

impl CompoundCompactum {
    pub fn union(components: Vec<SampledComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("union needs at least one component".into()));
        }
        for c in &components {
            c.validate()?;
        }
        let separation = min_separation(&components);
        Ok(Self { components, separation })
    }

    /// True when two components come closer than [`OVERLAP_THRESHOLD`].
    pub fn has_overlap(&self) -> bool {
        self.separation.is_some_and(|s| s < OVERLAP_THRESHOLD)
    }

    pub fn sample_count(&self) -> usize {
        self.components.iter().map(|c| c.points.len()).sum()
    }

    pub fn max_modulus(&self) -> f64 {
        self.components.iter().map(|c| c.max_modulus()).fold(0.0, f64::max)
    }

    pub fn component(&self, label: &str) -> Option<&SampledComponent> {
        self.components.iter().find(|c| c.label == label)
    }

    /// JSON document `{components: [{kind, params, density, points?, target?}]}`.
    pub fn to_json(&self, include_points: bool) -> Result<String> {
        let doc = CompactumDoc {
            components: self
                .components
                .iter()
                .map(|c| {
                    let mut c = c.clone();
                    if !include_points {
                        c.points.clear();
                    }
                    c
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses the JSON document, regenerating omitted point sets from their parameters.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CompactumDoc = serde_json::from_str(s)?;
        let mut components = doc.components;
        for c in &mut components {
            if c.points.is_empty() {
                c.regenerate()?;
            }
        }
        Self::union(components)
    }
}

#[derive(Serialize, Deserialize)]
struct CompactumDoc {
    components: Vec<SampledComponent>,
}

fn min_separation(components: &[SampledComponent]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (i, a) in components.iter().enumerate() {
        for b in &components[i + 1..] {
            let d = min_distance(&a.points, &b.points);
            best = Some(best.map_or(d, |x| x.min(d)));
        }
    }
    best
}

/// Brute-force minimum distance between two point sets.
pub fn min_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for p in a {
        for q in b {
            let d = (p - q).norm_sqr();
            if d < best {
                best = d;
            }
        }
    }
    best.sqrt()
}

/// Distance from `p` to the polyline through `curve`.
pub fn distance_to_polyline(p: Complex64, curve: &[Complex64]) -> f64 {
    if curve.len() == 1 {
        return (p - curve[0]).norm();
    }
    curve
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let len2 = d.norm_sqr();
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((p - w[0]) * d.conj()).re / len2).clamp(0.0, 1.0)
            };
            (p - (w[0] + d * t)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `max |f(point) − target|` over the samples of `set`.
pub fn sup_distance<F>(set: &SampledComponent, f: F) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let target = set.target.as_ref().ok_or(Error::MissingTarget)?;
    let mut sup = 0.0_f64;
    for (z, t) in set.points.iter().zip(target) {
        sup = sup.max((f(*z)? - t).norm());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dilated_arc_examples() {
        let half = UnitCircleArc::new(0.0, PI).unwrap();
        let s = sample_dilated_arc(&half, 0.5, 3).unwrap();
        let expect = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0)];
        for (p, e) in s.points.iter().zip(expect) {
            assert!((p - e).norm() < 1e-15);
        }
        let quarter = UnitCircleArc::new(0.0, PI / 2.0).unwrap();
        let s = sample_dilated_arc(&quarter, 0.9, 91).unwrap();
        assert_eq!(s.points.len(), 91);
        let step = 0.9 * (PI / 2.0) / 90.0;
        for w in s.points.windows(2) {
            // chord vs arc length: relative gap ~ step²/24
            assert!(((w[1] - w[0]).norm() - step).abs() < 1e-5);
        }
        let long = UnitCircleArc::new(0.0, TAU - 1e-3).unwrap();
        let s = sample_dilated_arc(&long, 0.99, 2000).unwrap();
        assert!((s.max_modulus() - 0.99).abs() < 1e-15);
    }

    #[test]
    fn disc_constraint_examples() {
        let s = sample_disc_constraint(0.5, 4).unwrap();
        let expect = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
        for (p, e) in s.points.iter().zip(expect) {
            assert!((p - e).norm() < 1e-15);
        }
        assert!(s.target.as_ref().unwrap().iter().all(|t| t.norm() == 0.0));
        assert_eq!(sample_disc_constraint(0.875, 1024).unwrap().points.len(), 1024);
    }

    #[test]
    fn radial_curve_examples() {
        let id = DiscAutomorphism::mobius(c(0.0, 0.0)).unwrap();
        let s = sample_radial_curve(&id, c(1.0, 0.0), 0.0, 0.9, 10).unwrap();
        for (j, p) in s.points.iter().enumerate() {
            let r = 0.9 * j as f64 / 9.0;
            assert!((p - c(-r, 0.0)).norm() < 1e-15);
        }
        let phi = DiscAutomorphism::mobius(c(0.5, 0.0)).unwrap();
        let s = sample_radial_curve(&phi, c(1.0, 0.0), 0.5, 0.99, 50).unwrap();
        for w in s.points.windows(2) {
            assert!(w[1].norm() >= w[0].norm());
        }
        let s = sample_radial_curve(&phi, c(0.0, 1.0), 0.0, 0.99, 50).unwrap();
        assert!((s.points[0] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn union_separation() {
        let quarter = UnitCircleArc::new(0.0, PI / 2.0).unwrap();
        let arc = sample_dilated_arc(&quarter, 0.9, 64).unwrap();
        let single = CompoundCompactum::union(vec![arc.clone()]).unwrap();
        assert_eq!(single.separation, None);
        assert!(!single.has_overlap());

        let disc = sample_disc_constraint(0.5, 128).unwrap();
        let u = CompoundCompactum::union(vec![disc.clone(), arc.clone()]).unwrap();
        assert_eq!(u.separation, Some(min_distance(&disc.points, &arc.points)));
        assert!((u.separation.unwrap() - 0.4).abs() < 1e-12);
        let swapped = CompoundCompactum::union(vec![arc.clone(), disc]).unwrap();
        assert_eq!(u.separation, swapped.separation);

        let next = UnitCircleArc::new(PI / 2.0, PI).unwrap();
        let touching = sample_dilated_arc(&next, 0.9, 64).unwrap();
        let u = CompoundCompactum::union(vec![arc, touching]).unwrap();
        assert!(u.has_overlap());
    }

    #[test]
    fn sup_distance_examples() {
        let quarter = UnitCircleArc::new(0.0, PI / 2.0).unwrap();
        let arc = sample_dilated_arc(&quarter, 0.9, 64).unwrap();
        let exact = arc.clone().with_target_fn(|z| z * z).unwrap();
        assert_eq!(sup_distance(&exact, |z| Ok(z * z)).unwrap(), 0.0);
        let zero = arc.clone().with_target_fn(|_| c(0.0, 0.0)).unwrap();
        assert_eq!(sup_distance(&zero, |_| Ok(c(3.0, 4.0))).unwrap(), 5.0);
        let unit = arc.clone().with_target_fn(|z| z / z.norm()).unwrap();
        assert!((sup_distance(&unit, Ok).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(sup_distance(&arc, Ok), Err(Error::MissingTarget)));
    }

    #[test]
    fn rejects_mismatched_target() {
        let quarter = UnitCircleArc::new(0.0, PI / 2.0).unwrap();
        let arc = sample_dilated_arc(&quarter, 0.9, 8).unwrap();
        assert!(arc.with_target(vec![c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn json_regenerates_points() {
        let quarter = UnitCircleArc::new(0.0, PI / 2.0).unwrap();
        let arc = sample_dilated_arc(&quarter, 0.9, 33).unwrap();
        let phi = DiscAutomorphism::mobius(c(0.5, 0.0)).unwrap();
        let curve = sample_radial_curve(&phi, c(0.0, 1.0), 0.1, 0.95, 40).unwrap();
        let disc = sample_disc_constraint(0.3, 16).unwrap();
        let set = CompoundCompactum::union(vec![arc, curve, disc]).unwrap();
        let bare = set.to_json(false).unwrap();
        assert!(bare.contains("\"kind\": \"dilated_arc\""));
        let back = CompoundCompactum::from_json(&bare).unwrap();
        assert_eq!(back.components.len(), 3);
        for (x, y) in back.components.iter().zip(&set.components) {
            assert_eq!(x.points, y.points);
            assert_eq!(x.target, y.target);
        }
        let full = CompoundCompactum::from_json(&set.to_json(true).unwrap()).unwrap();
        for (x, y) in full.components.iter().zip(&set.components) {
            assert_eq!(x.params, y.params, "{}", x.label);
            assert_eq!(x.points, y.points, "{}", x.label);
            assert_eq!(x.target, y.target, "{}", x.label);
        }
        assert_eq!(full, set);
    }
}
