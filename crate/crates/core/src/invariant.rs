//! A single stage of the construction invariant under every automorphism
//! `Φ_w(z) = (z + w)/(1 + w̄z)`: fit `φ_m ∘ Φ_w⁻¹` on the parameter union
//! `⋃_{τ ∈ D̄(w, δ)} Φ_τ(r_k K)` while staying small on a disc away from it.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compacta::{sample_disc_constraint, CompoundCompactum};
use crate::error::{Error, Result};
use crate::fit::{fit_until_with, FitOptions, FitReport};
use crate::geometry::{build_f_compactum, DiscAutomorphism, UnitCircleArc};
use crate::poly::ComplexPolynomial;

/// Taylor polynomial of `exp` of degree `m`; the target family `φ_m`.
pub fn exp_taylor(m: usize) -> ComplexPolynomial {
    let mut coeffs = Vec::with_capacity(m + 1);
    let mut c = 1.0;
    for k in 0..=m {
        if k > 0 {
            c /= k as f64;
        }
        coeffs.push(Complex64::new(c, 0.0));
    }
    ComplexPolynomial::new(coeffs)
}

/// `count` points spread over the closed disc `D̄(center, radius)` on a sunflower spiral.
pub fn sunflower(center: Complex64, radius: f64, count: usize) -> Vec<Complex64> {
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    (0..count)
        .map(|j| {
            let rho = radius * ((j as f64 + 0.5) / count as f64).sqrt();
            center + Complex64::from_polar(rho, golden * j as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantConfig {
    pub w_center: Complex64,
    pub delta: f64,
    pub r_k: f64,
    pub arc: UnitCircleArc,
    pub m: usize,
    pub tol: f64,
    pub param_density: usize,
    pub arc_density: usize,
    pub disc_density: usize,
    pub max_degree: usize,
    /// Parameters `τ` sampled for the oscillation check and the chain probe.
    pub probe_params: usize,
    /// Samples of the unit circle in the oscillation check.
    pub circle_density: usize,
    pub fit: FitOptions,
}

impl InvariantConfig {
    /// Starts from `δ = (1 − |w|)/2`, fits to `1/(2m)`.
    pub fn new(w_center: Complex64, r_k: f64, arc: UnitCircleArc, m: usize) -> Self {
        Self {
            w_center,
            delta: 0.5 * (1.0 - w_center.norm()),
            r_k,
            arc,
            m,
            tol: 0.5 / m as f64,
            param_density: 8,
            arc_density: 256,
            disc_density: 512,
            max_degree: 512,
            probe_params: 50,
            circle_density: 512,
            fit: FitOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        if !(self.tol > 0.0) || self.probe_params == 0 || self.circle_density == 0 {
            return Err(Error::InvalidParameter(
                "tol, probe_params and circle_density must be positive".into(),
            ));
        }
        if !(self.r_k > 0.0 && self.r_k < 1.0) || !(self.delta >= 0.0) || self.w_center.norm() + self.delta >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "need 0 < r_k < 1 and |w| + delta < 1 (r_k = {}, delta = {})",
                self.r_k, self.delta
            )));
        }
        Ok(())
    }
}

/// `max_{τ, |z| = 1} |φ_m(Φ_w⁻¹(Φ_τ(r_k z))) − φ_m(r_k z)|` over sampled `τ`.
/// Sampling `|z| = 1` suffices by the maximum principle.
pub fn parameter_oscillation(cfg: &InvariantConfig, delta: f64) -> Result<f64> {
    let phi_m = exp_taylor(cfg.m);
    let inv = DiscAutomorphism::translation(cfg.w_center)?.inverse();
    let circle: Vec<Complex64> = (0..cfg.circle_density)
        .map(|j| Complex64::from_polar(cfg.r_k, TAU * j as f64 / cfg.circle_density as f64))
        .collect();
    let mut worst = 0.0_f64;
    for tau in sunflower(cfg.w_center, delta, cfg.probe_params) {
        let map = DiscAutomorphism::translation(tau)?;
        for z in &circle {
            let moved = inv.apply(map.apply(*z)?)?;
            worst = worst.max((phi_m.eval(moved) - phi_m.eval(*z)).norm());
        }
    }
    Ok(worst)
}

/// Halves `cfg.delta` until the oscillation drops below `1/m`.
pub fn choose_delta(cfg: &InvariantConfig) -> Result<(f64, usize)> {
    cfg.validate()?;
    let bound = 1.0 / cfg.m as f64;
    let mut delta = cfg.delta;
    for halvings in 0..60 {
        if parameter_oscillation(cfg, delta)? < bound {
            return Ok((delta, halvings));
        }
        delta *= 0.5;
    }
    Err(Error::ConditionIiiViolated {
        oscillation: parameter_oscillation(cfg, delta)?,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub samples: usize,
    /// `max |P(Φ_τ(r_k z)) − φ_m(Φ_w⁻¹(Φ_τ(r_k z)))|`.
    pub fit_term: f64,
    /// `max |φ_m(Φ_w⁻¹(Φ_τ(r_k z))) − φ_m(r_k z)|`.
    pub oscillation_term: f64,
    /// `max |φ_m(r_k z) − exp(r_k z)|`.
    pub substitution_term: f64,
    /// `max |P(Φ_τ(r_k z)) − exp(r_k z)|`.
    pub total: f64,
    pub term_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantStage {
    pub config: InvariantConfig,
    pub phi_m: ComplexPolynomial,
    pub oscillation: f64,
    pub disc_radius: f64,
    pub max_modulus: f64,
    pub fit: FitReport,
    pub coeffs: ComplexPolynomial,
    pub chain: ChainReport,
}

/// Fits `P` on a small-target disc and the parameter union with target
/// `φ_m ∘ Φ_w⁻¹`, after checking the oscillation condition at `cfg.delta`.
/// The disc has radius half the smallest modulus on the union.
pub fn build_invariant_stage(cfg: &InvariantConfig) -> Result<InvariantStage> {
    cfg.validate()?;
    let bound = 1.0 / cfg.m as f64;
    let oscillation = parameter_oscillation(cfg, cfg.delta)?;
    if !(oscillation < bound) {
        return Err(Error::ConditionIiiViolated { oscillation, bound });
    }
    let phi_m = exp_taylor(cfg.m);
    let inv = DiscAutomorphism::translation(cfg.w_center)?.inverse();
    let union = build_f_compactum(
        cfg.w_center,
        cfg.delta,
        cfg.r_k,
        &cfg.arc,
        cfg.param_density,
        cfg.arc_density,
    )?;
    let mut f_comp = union.compactum.components.into_iter().next().expect("one component");
    let target = f_comp
        .points
        .iter()
        .map(|z| inv.apply(*z).map(|u| phi_m.eval(u)))
        .collect::<Result<Vec<_>>>()?;
    f_comp = f_comp.with_target(target)?;
    let min_modulus = f_comp.points.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let disc_radius = 0.5 * min_modulus;
    let set = CompoundCompactum::union(vec![sample_disc_constraint(disc_radius, cfg.disc_density)?, f_comp])?;
    let fit = fit_until_with(&set, cfg.tol, cfg.max_degree, &cfg.fit)?;
    let chain = probe_chain(cfg, &fit.poly, &phi_m)?;
    Ok(InvariantStage {
        config: cfg.clone(),
        phi_m,
        oscillation,
        disc_radius,
        max_modulus: union.max_modulus,
        fit: fit.report,
        coeffs: fit.poly,
        chain,
    })
}

/// Measures the three terms bounding `|P ∘ Φ_τ(r_k z) − exp(r_k z)|` on the
/// arc grid for sampled `τ`.
pub fn probe_chain(cfg: &InvariantConfig, p: &ComplexPolynomial, phi_m: &ComplexPolynomial) -> Result<ChainReport> {
    let inv = DiscAutomorphism::translation(cfg.w_center)?.inverse();
    let arc: Vec<Complex64> = cfg
        .arc
        .parameters(cfg.arc_density)
        .into_iter()
        .map(|t| Complex64::from_polar(cfg.r_k, t))
        .collect();
    let (mut fit_term, mut osc, mut subst, mut total) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let taus = sunflower(cfg.w_center, cfg.delta, cfg.probe_params);
    for tau in &taus {
        let map = DiscAutomorphism::translation(*tau)?;
        for z in &arc {
            let image = map.apply(*z)?;
            let pulled = phi_m.eval(inv.apply(image)?);
            let value = p.eval(image);
            let exact = z.exp();
            fit_term = fit_term.max((value - pulled).norm());
            osc = osc.max((pulled - phi_m.eval(*z)).norm());
            subst = subst.max((phi_m.eval(*z) - exact).norm());
            total = total.max((value - exact).norm());
        }
    }
    let term_bound = 1.0 / cfg.m as f64;
    Ok(ChainReport {
        samples: taus.len() * arc.len(),
        fit_term,
        oscillation_term: osc,
        substitution_term: subst,
        total,
        term_bound,
        holds: fit_term < term_bound && osc < term_bound && subst < term_bound && total < 3.0 * term_bound,
    })
}
