//! Möbius automorphisms of the unit disc, circle images and the shifted-origin
//! dilations `Ψ_w`.
//!
//! Every automorphism is stored as `z ↦ e^{iθ}(a − z)/(1 − āz)`; the plain
//! involution `Φ_a` is the `θ = 0` case and rotations are the `a = 0` case.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compacta::{ComponentParams, CompoundCompactum, SampledComponent};
use crate::error::{Error, Result};

/// Smallest admissible modulus of `1 − āz` before the map is considered undefined.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

pub(crate) fn check_finite(z: Complex64, name: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} is not finite")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscAutomorphism {
    a: Complex64,
    theta: f64,
}

impl DiscAutomorphism {
    pub fn new(a: Complex64, theta: f64) -> Result<Self> {
        check_finite(a, "a")?;
        if !theta.is_finite() {
            return Err(Error::InvalidParameter("theta is not finite".into()));
        }
        if a.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "automorphism parameter must satisfy |a| < 1, got |a| = {}",
                a.norm()
            )));
        }
        Ok(Self {
            a,
            theta: theta.rem_euclid(TAU),
        })
    }

    /// The involution `Φ_a(z) = (a − z)/(1 − āz)`.
    pub fn mobius(a: Complex64) -> Result<Self> {
        Self::new(a, 0.0)
    }

    /// `z ↦ e^{iθ}(−z)`, i.e. rotation by `θ + π`.
    pub fn rotation(theta: f64) -> Self {
        Self {
            a: Complex64::new(0.0, 0.0),
            theta: theta.rem_euclid(TAU),
        }
    }

    /// `z ↦ (z + w)/(1 + w̄z)`, the automorphism sending 0 to `w` without rotation.
    pub fn translation(w: Complex64) -> Result<Self> {
        Self::new(-w, PI)
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_rotation(&self) -> bool {
        self.a.norm() == 0.0
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        let den = Complex64::new(1.0, 0.0) - self.a.conj() * z;
        let m = den.norm();
        if m < DENOMINATOR_FLOOR {
            return Err(Error::DegenerateDenominator {
                what: "1 - conj(a) z",
                modulus: m,
            });
        }
        Ok(Complex64::from_polar(1.0, self.theta) * (self.a - z) / den)
    }

    /// Inverse map: `w ↦ Φ_a(e^{−iθ}w)`.
    pub fn inverse(&self) -> Self {
        // Solving w = e^{iθ}(a − z)/(1 − āz) for z gives z = Φ_a(e^{−iθ}w),
        // which is again of the stored form with a' = e^{iθ}a and angle −θ.
        let rot = Complex64::from_polar(1.0, self.theta);
        Self {
            a: self.a * rot,
            theta: (-self.theta).rem_euclid(TAU),
        }
    }

    pub fn apply_inverse(&self, w: Complex64) -> Result<Complex64> {
        self.inverse().apply(w)
    }

    /// `|Φ(rζ)|`; the rotation factor drops out.
    pub fn radial_modulus(&self, zeta: Complex64, r: f64) -> f64 {
        let z = zeta * r;
        ((self.a - z) / (Complex64::new(1.0, 0.0) - self.a.conj() * z)).norm()
    }
}

/// `|(1 − |Φ_a(z)|²) − (1 − |a|²)(1 − |z|²)/|1 − āz|²|`, with the left side
/// computed through [`DiscAutomorphism::apply`].
pub fn modulus_identity_residual(a: Complex64, z: Complex64) -> Result<f64> {
    let phi = DiscAutomorphism::mobius(a)?;
    let image = phi.apply(z)?;
    let lhs = 1.0 - image.norm_sqr();
    let den = (Complex64::new(1.0, 0.0) - a.conj() * z).norm_sqr();
    let rhs = (1.0 - a.norm_sqr()) * (1.0 - z.norm_sqr()) / den;
    Ok((lhs - rhs).abs())
}

fn check_unimodular(zeta: Complex64) -> Result<()> {
    check_finite(zeta, "zeta")?;
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "zeta must lie on the unit circle, |zeta| = {}",
            zeta.norm()
        )));
    }
    Ok(())
}

/// Smallest `r₀ ∈ [0, 1)` such that `r ↦ |Φ(rζ)|` is nondecreasing on `(r₀, 1)`.
///
/// `1 − |Φ(rζ)|² = (1 − r²)/(r²|a|² − 2r·Re(āζ) + 1)`, and the numerator of its
/// derivative is proportional to `c r² − (1 + |a|²) r + c` with `c = Re(āζ)`.
/// That quadratic is negative at `r = 1` and changes sign at most once on
/// `[0, 1]`, so the threshold is found by bisecting its sign.
pub fn radial_monotone_threshold(phi: &DiscAutomorphism, zeta: Complex64) -> Result<f64> {
    check_unimodular(zeta)?;
    let c = (phi.a.conj() * zeta).re;
    let s = 1.0 + phi.a.norm_sqr();
    let slope_sign = |r: f64| c * r * r - s * r + c;
    if slope_sign(0.0) <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope_sign(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Radius `R ∈ [r_low, 1)` with `|Φ(Rζ)| = t`, by bisection on the monotone tail.
pub fn solve_level_radius(phi: &DiscAutomorphism, zeta: Complex64, t: f64, r_low: f64) -> Result<f64> {
    check_unimodular(zeta)?;
    if !(0.0..1.0).contains(&r_low) || !(t < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= r_low < 1 and t < 1, got r_low = {r_low}, t = {t}"
        )));
    }
    let floor = phi.radial_modulus(zeta, r_low);
    if t < floor {
        return Err(Error::TargetBelowRange { target: t, floor });
    }
    let (mut lo, mut hi) = (r_low, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gap = phi.radial_modulus(zeta, mid) - t;
        if gap.abs() <= 1e-12 || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if gap < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence { steps: 200 })
}

/// Serialized as the pair `[alpha, beta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct UnitCircleArc {
    pub alpha: f64,
    pub beta: f64,
}

impl UnitCircleArc {
    /// `{e^{it} : t ∈ [α, β]}` with `α ∈ [0, 2π)` and `0 < β − α < 2π`.
    ///
    /// `β` may exceed `2π`; such arcs wrap through angle 0.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter("arc endpoints must be finite".into()));
        }
        let len = beta - alpha;
        if !(len > 0.0 && len < TAU) {
            return Err(Error::InvalidParameter(format!(
                "arc [{alpha}, {beta}] must satisfy 0 < beta - alpha < 2π"
            )));
        }
        let start = alpha.rem_euclid(TAU);
        Ok(Self {
            alpha: start,
            beta: start + len,
        })
    }

    pub fn length(&self) -> f64 {
        self.beta - self.alpha
    }

    /// Arc of angular width `width` centred at angle `center`.
    pub fn around(center: f64, width: f64) -> Result<Self> {
        Self::new(center - 0.5 * width, center + 0.5 * width)
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let start = (self.alpha + angle).rem_euclid(TAU);
        Self {
            alpha: start,
            beta: start + self.length(),
        }
    }

    /// Whether `e^{it}` lies on the arc.
    pub fn contains_angle(&self, t: f64) -> bool {
        let off = (t - self.alpha).rem_euclid(TAU);
        off <= self.length() + 1e-15
    }

    /// `density` equally spaced parameters with both endpoints included.
    pub fn parameters(&self, density: usize) -> Vec<f64> {
        linspace(self.alpha, self.beta, density)
    }
}

impl TryFrom<[f64; 2]> for UnitCircleArc {
    type Error = Error;

    fn try_from([alpha, beta]: [f64; 2]) -> Result<Self> {
        Self::new(alpha, beta)
    }
}

impl From<UnitCircleArc> for [f64; 2] {
    fn from(arc: UnitCircleArc) -> Self {
        [arc.alpha, arc.beta]
    }
}

pub(crate) fn linspace(from: f64, to: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![from],
        _ => {
            let step = (to - from) / (count - 1) as f64;
            (0..count)
                .map(|j| if j + 1 == count { to } else { from + step * j as f64 })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclideanCircle {
    pub center: Complex64,
    pub radius: f64,
}

impl EuclideanCircle {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        check_finite(center, "center")?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn point_at(&self, t: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, t)
    }
}

/// Image of `C(0, R)` under any automorphism sending 0 to `a`.
pub fn image_circle(a: Complex64, radius: f64) -> Result<EuclideanCircle> {
    check_finite(a, "a")?;
    if a.norm() >= 1.0 || !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "image_circle needs |a| < 1 and 0 < R < 1, got |a| = {}, R = {radius}",
            a.norm()
        )));
    }
    let a2 = a.norm_sqr();
    let r2 = radius * radius;
    let den = 1.0 - a2 * r2;
    EuclideanCircle::new(a * ((1.0 - r2) / den), (1.0 - a2) * radius / den)
}

/// Algebraic least-squares circle `x² + y² + Dx + Ey + F = 0` through `points`.
pub fn fit_circle(points: &[Complex64]) -> Result<EuclideanCircle> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(
            "a circle fit needs at least three points".into(),
        ));
    }
    // Centred coordinates keep the normal equations well scaled.
    let mean = points.iter().sum::<Complex64>() / points.len() as f64;
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    for p in points {
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
        let piv = (k..3)
            .max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs()))
            .expect("non-empty range");
        m.swap(k, piv);
        v.swap(k, piv);
        if m[k][k].abs() < 1e-300 {
            return Err(Error::DuplicatePoints);
        }
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
    let center = Complex64::new(-0.5 * x[0], -0.5 * x[1]);
    EuclideanCircle::new(center + mean, (center.norm_sqr() - x[2]).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollinearLine {
    pub point: Complex64,
    /// Unit direction.
    pub direction: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CircleOrLine {
    Circle(EuclideanCircle),
    Line(CollinearLine),
}

/// The unique circle through three pairwise distinct points, or the line
/// through them when they are collinear.
pub fn circle_through_three(p1: Complex64, p2: Complex64, p3: Complex64) -> Result<CircleOrLine> {
    for (z, name) in [(p1, "p1"), (p2, "p2"), (p3, "p3")] {
        check_finite(z, name)?;
    }
    let d12 = (p1 - p2).norm();
    let d13 = (p1 - p3).norm();
    let d23 = (p2 - p3).norm();
    if d12 <= 1e-12 || d13 <= 1e-12 || d23 <= 1e-12 {
        return Err(Error::DuplicatePoints);
    }
    let u = p2 - p1;
    let v = p3 - p1;
    let cross = u.re * v.im - u.im * v.re;
    let dmax = d12.max(d13).max(d23);
    if (0.5 * cross).abs() < 1e-14 * dmax * dmax {
        let (a, b) = if d12 >= d13 && d12 >= d23 {
            (p1, p2)
        } else if d13 >= d23 {
            (p1, p3)
        } else {
            (p2, p3)
        };
        return Ok(CircleOrLine::Line(CollinearLine {
            point: a,
            direction: (b - a) / (b - a).norm(),
        }));
    }
    // Centre c = p1 + x with |x|² = 2 Re(x ū) ... solved in the frame of p1.
    let uu = u.norm_sqr();
    let vv = v.norm_sqr();
    let ox = (v.im * uu - u.im * vv) / (2.0 * cross);
    let oy = (u.re * vv - v.re * uu) / (2.0 * cross);
    let offset = Complex64::new(ox, oy);
    let center = p1 + offset;
    let radius = (offset.norm() + (center - p2).norm() + (center - p3).norm()) / 3.0;
    Ok(CircleOrLine::Circle(EuclideanCircle::new(center, radius)?))
}

/// The shifted-origin dilation `Ψ_w : ζ ↦ w + r(ζ − w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginShiftDilation {
    w: Complex64,
}

impl OriginShiftDilation {
    pub fn new(w: Complex64) -> Result<Self> {
        check_finite(w, "w")?;
        if w.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "shift centre must satisfy |w| < 1, got {}",
                w.norm()
            )));
        }
        Ok(Self { w })
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn apply(&self, r: f64, zeta: Complex64) -> Complex64 {
        self.w + (zeta - self.w) * r
    }

    /// `Ψ_w(C(0, r))`, which is the circle `C((1 − r)w, r)`.
    pub fn image_of_centered_circle(&self, r: f64) -> Result<EuclideanCircle> {
        EuclideanCircle::new(self.w * (1.0 - r), r)
    }

    /// `Some(r)` when `circle` is `C((1 − r)w, r)` up to `tol` in the centre.
    pub fn circle_radius_of(&self, circle: &EuclideanCircle, tol: f64) -> Option<f64> {
        is_origin_shift_circle(circle, self.w, tol)
    }
}

/// Returns the radius `r` if `c` is of the form `C((1 − r)w, r)` within `tol`.
pub fn is_origin_shift_circle(c: &EuclideanCircle, w: Complex64, tol: f64) -> Option<f64> {
    let r = c.radius;
    if (c.center - w * (1.0 - r)).norm() <= tol {
        Some(r)
    } else {
        None
    }
}

/// `(w − a)/(a − |a|²w)`: the only radius for which the automorphism sending 0
/// to `a` could map `C(0, R)` onto some `C_w(·)`. A value that is not a real
/// number in `(0, 1)` certifies that no such radius exists.
pub fn fixed_point_radius(w: Complex64, a: Complex64) -> Result<Complex64> {
    check_finite(w, "w")?;
    check_finite(a, "a")?;
    if a.norm() <= 1e-14 {
        return Err(Error::ZeroParameter);
    }
    let den = a - w * a.norm_sqr();
    if den.norm() <= 1e-14 {
        return Err(Error::DegenerateDenominator {
            what: "a - |a|^2 w",
            modulus: den.norm(),
        });
    }
    Ok((w - a) / den)
}

/// A sampled union `⋃_τ Φ_τ(r_k K)` over parameters `τ` in a closed disc,
/// with `Φ_τ(z) = (z + τ)/(1 + τ̄z)`.
#[derive(Debug, Clone)]
pub struct ParamUnion {
    pub compactum: CompoundCompactum,
    pub params: Vec<Complex64>,
    pub max_modulus: f64,
}

/// Polar grid on the closed disc `D̄(center, delta)`: `density` radii from the
/// centre out to the boundary circle times `density` angles. A zero radius
/// collapses to the centre alone.
pub fn polar_disc_grid(center: Complex64, delta: f64, density: usize) -> Vec<Complex64> {
    if delta == 0.0 || density < 2 {
        return vec![center];
    }
    let mut out = vec![center];
    for j in 1..density {
        let rho = delta * j as f64 / (density - 1) as f64;
        for k in 0..density {
            let t = TAU * k as f64 / density as f64;
            out.push(center + Complex64::from_polar(rho, t));
        }
    }
    out
}

pub fn build_f_compactum(
    w_center: Complex64,
    delta: f64,
    r_k: f64,
    arc: &UnitCircleArc,
    param_density: usize,
    arc_density: usize,
) -> Result<ParamUnion> {
    check_finite(w_center, "w_center")?;
    if !(delta >= 0.0) || !(r_k > 0.0 && r_k < 1.0) || arc_density < 2 {
        return Err(Error::InvalidParameter(format!(
            "need delta >= 0, 0 < r_k < 1, arc_density >= 2 (delta = {delta}, r_k = {r_k})"
        )));
    }
    if w_center.norm() + delta >= 1.0 {
        return Err(Error::EscapesDisc {
            max_modulus: w_center.norm() + delta,
        });
    }
    let params = ComponentParams::ParamUnion {
        w_center,
        delta,
        r_k,
        alpha: arc.alpha,
        beta: arc.beta,
        param_density,
    };
    let component = SampledComponent::from_params("F", params, arc_density, None)?;
    let max_modulus = component.points.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if max_modulus >= 1.0 - 1e-9 {
        return Err(Error::EscapesDisc { max_modulus });
    }
    let taus = polar_disc_grid(w_center, delta, param_density);
    Ok(ParamUnion {
        compactum: CompoundCompactum::union(vec![component])?,
        params: taus,
        max_modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn apply_examples() {
        let id = DiscAutomorphism::mobius(c(0.0, 0.0)).unwrap();
        assert_eq!(id.apply(c(0.3, 0.4)).unwrap(), c(-0.3, -0.4));
        let phi = DiscAutomorphism::mobius(c(0.5, 0.0)).unwrap();
        assert!((phi.apply(c(0.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        // (0.5 − 0.5i)(1 + 0.25i)/1.0625
        let expect = c(0.5, -0.5) * c(1.0, 0.25) / 1.0625;
        let got = phi.apply(c(0.0, 0.5)).unwrap();
        assert!((got - expect).norm() < 1e-15);
        assert!((got - c(0.588235294117647, -0.352941176470588)).norm() < 1e-12);
    }

    #[test]
    fn rejects_parameter_outside_disc() {
        assert!(DiscAutomorphism::mobius(c(1.0, 0.0)).is_err());
        assert!(DiscAutomorphism::mobius(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn degenerate_denominator_is_reported() {
        let phi = DiscAutomorphism::mobius(c(1.0 - 1e-15, 0.0)).unwrap();
        assert!(matches!(
            phi.apply(c(1.0, 0.0)),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn inverse_and_translation() {
        let phi = DiscAutomorphism::new(c(0.3, -0.2), 1.1).unwrap();
        let z = c(0.1, 0.6);
        let back = phi.apply_inverse(phi.apply(z).unwrap()).unwrap();
        assert!((back - z).norm() < 1e-14);
        let t = DiscAutomorphism::translation(c(0.2, 0.1)).unwrap();
        let z = c(-0.4, 0.3);
        let expect = (z + c(0.2, 0.1)) / (c(1.0, 0.0) + c(0.2, -0.1) * z);
        assert!((t.apply(z).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn identity_residual_examples() {
        assert!(modulus_identity_residual(c(0.0, 0.0), c(0.7, 0.0)).unwrap() <= 1e-12);
        assert!(modulus_identity_residual(c(0.5, 0.0), c(0.0, 0.5)).unwrap() <= 1e-12);
        let phi = DiscAutomorphism::mobius(c(0.5, 0.0)).unwrap();
        let lhs = 1.0 - phi.apply(c(0.0, 0.5)).unwrap().norm_sqr();
        assert!((lhs - 0.529411764705882).abs() < 1e-12);
        let z = Complex64::from_polar(0.99, 2.1);
        assert!(modulus_identity_residual(c(0.0, 0.9), z).unwrap() <= 1e-10);
    }

    /// Sign scan of a centred difference of `|Φ(rζ)|` on a fine grid.
    fn scanned_threshold(phi: &DiscAutomorphism, zeta: Complex64) -> f64 {
        let n = 100_000;
        let mut last_decrease = 0.0;
        for j in 1..n {
            let r = j as f64 / n as f64;
            let h = 1e-7;
            let d = phi.radial_modulus(zeta, r + h) - phi.radial_modulus(zeta, r - h);
            if d < 0.0 {
                last_decrease = r;
            }
        }
        last_decrease
    }

    #[test]
    fn threshold_examples() {
        let id = DiscAutomorphism::mobius(c(0.0, 0.0)).unwrap();
        assert_eq!(radial_monotone_threshold(&id, c(1.0, 0.0)).unwrap(), 0.0);
        let phi = DiscAutomorphism::mobius(c(0.5, 0.0)).unwrap();
        let t = radial_monotone_threshold(&phi, c(1.0, 0.0)).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        assert!((scanned_threshold(&phi, c(1.0, 0.0)) - 0.5).abs() < 2e-5);
        assert_eq!(radial_monotone_threshold(&phi, c(0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(scanned_threshold(&phi, c(0.0, 1.0)), 0.0);
    }

    #[test]
    fn threshold_matches_scan_off_axis() {
        let phi = DiscAutomorphism::new(c(0.3, 0.6), 0.4).unwrap();
        for t in [0.2, 1.0, 2.0, 4.0] {
            let zeta = Complex64::from_polar(1.0, t);
            let got = radial_monotone_threshold(&phi, zeta).unwrap();
            assert!((got - scanned_threshold(&phi, zeta)).abs() < 2e-5, "angle {t}");
        }
    }

    #[test]
    fn level_radius_examples() {
        let id = DiscAutomorphism::mobius(c(0.0, 0.0)).unwrap();
        let r = solve_level_radius(&id, c(1.0, 0.0), 0.9, 0.0).unwrap();
        assert!((r - 0.9).abs() < 1e-11);
        let phi = DiscAutomorphism::mobius(c(0.5, 0.0)).unwrap();
        let r = solve_level_radius(&phi, c(1.0, 0.0), 0.9, 0.5).unwrap();
        assert!((r - 1.4 / 1.45).abs() < 1e-11);
        let r = solve_level_radius(&phi, c(0.0, 1.0), 0.9, 0.0).unwrap();
        // 0.75(1 − R²)/(1 + 0.25R²) = 0.19  ⇒  R² = 0.56/0.7975
        assert!((r - (0.56_f64 / 0.7975).sqrt()).abs() < 1e-11);
        assert!((r - 0.837972).abs() < 5e-6);
    }

    #[test]
    fn level_radius_below_range() {
        let phi = DiscAutomorphism::mobius(c(0.5, 0.0)).unwrap();
        // |Φ(0.9)| = 0.4/0.55 ≈ 0.727
        assert!(matches!(
            solve_level_radius(&phi, c(1.0, 0.0), 0.5, 0.9),
            Err(Error::TargetBelowRange { .. })
        ));
    }

    #[test]
    fn image_circle_examples() {
        let circle = image_circle(c(0.0, 0.0), 0.7).unwrap();
        assert!(circle.center.norm() < 1e-15 && (circle.radius - 0.7).abs() < 1e-15);
        let circle = image_circle(c(0.5, 0.0), 0.5).unwrap();
        assert!((circle.center - c(0.4, 0.0)).norm() < 1e-15);
        assert!((circle.radius - 0.4).abs() < 1e-15);
    }

    #[test]
    fn three_point_examples() {
        match circle_through_three(c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)).unwrap() {
            CircleOrLine::Circle(k) => {
                assert!(k.center.norm() < 1e-15 && (k.radius - 1.0).abs() < 1e-15)
            }
            other => panic!("expected circle, got {other:?}"),
        }
        match circle_through_three(c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)).unwrap() {
            CircleOrLine::Line(l) => {
                assert!(l.direction.im.abs() < 1e-15);
                assert!(l.point.im.abs() < 1e-15);
            }
            other => panic!("expected line, got {other:?}"),
        }
        match circle_through_three(c(0.8, 0.0), c(0.4, 0.4), c(0.0, 0.0)).unwrap() {
            CircleOrLine::Circle(k) => {
                assert!((k.center - c(0.4, 0.0)).norm() < 1e-15);
                assert!((k.radius - 0.4).abs() < 1e-15);
            }
            other => panic!("expected circle, got {other:?}"),
        }
        assert!(matches!(
            circle_through_three(c(0.1, 0.0), c(0.1, 0.0), c(0.3, 0.2)),
            Err(Error::DuplicatePoints)
        ));
    }

    #[test]
    fn origin_shift_examples() {
        let k = EuclideanCircle::new(c(0.0, 0.0), 0.6).unwrap();
        assert_eq!(is_origin_shift_circle(&k, c(0.0, 0.0), 1e-12), Some(0.6));
        let k = EuclideanCircle::new(c(0.25, 0.0), 0.5).unwrap();
        assert_eq!(is_origin_shift_circle(&k, c(0.5, 0.0), 1e-12), Some(0.5));
        let k = EuclideanCircle::new(c(0.0, 0.25), 0.5).unwrap();
        assert_eq!(is_origin_shift_circle(&k, c(0.5, 0.0), 1e-9), None);
        let psi = OriginShiftDilation::new(c(0.3, -0.2)).unwrap();
        let img = psi.image_of_centered_circle(0.4).unwrap();
        assert_eq!(psi.circle_radius_of(&img, 1e-12), Some(0.4));
    }

    #[test]
    fn fixed_point_radius_examples() {
        assert_eq!(fixed_point_radius(c(0.3, 0.0), c(0.3, 0.0)).unwrap(), c(0.0, 0.0));
        let r = fixed_point_radius(c(0.5, 0.0), c(0.25, 0.0)).unwrap();
        assert!((r - c(0.25 / 0.21875, 0.0)).norm() < 1e-15);
        let r = fixed_point_radius(c(0.8, 0.0), c(0.5, 0.0)).unwrap();
        assert!((r - c(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            fixed_point_radius(c(0.5, 0.0), c(0.0, 0.0)),
            Err(Error::ZeroParameter)
        ));
    }

    #[test]
    fn f_compactum_examples() {
        let quarter = UnitCircleArc::new(0.0, PI / 2.0).unwrap();
        let single = build_f_compactum(c(0.0, 0.0), 0.0, 0.5, &quarter, 8, 64).unwrap();
        assert_eq!(single.params.len(), 1);
        assert!((single.max_modulus - 0.5).abs() < 1e-15);
        let pts = &single.compactum.components[0].points;
        assert_eq!(pts.len(), 64);
        assert!((pts[0] - c(0.5, 0.0)).norm() < 1e-15);

        let coarse = build_f_compactum(c(0.2, 0.0), 0.05, 0.5, &quarter, 8, 64).unwrap();
        let fine = build_f_compactum(c(0.2, 0.0), 0.05, 0.5, &quarter, 80, 640).unwrap();
        assert!(coarse.max_modulus < 1.0);
        assert!((coarse.max_modulus - fine.max_modulus).abs() < 1e-3);

        assert!(matches!(
            build_f_compactum(c(0.9, 0.0), 0.2, 0.5, &quarter, 8, 64),
            Err(Error::EscapesDisc { .. })
        ));
    }
}
