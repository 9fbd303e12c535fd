use thiserror::Error;

use crate::fit::Fit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate denominator (|{what}| = {modulus:e})")]
    DegenerateDenominator { what: &'static str, modulus: f64 },

    #[error("target level {target} is below the reachable range (|Φ(r_low ζ)| = {floor})")]
    TargetBelowRange { target: f64, floor: f64 },

    #[error("bisection did not converge after {steps} steps")]
    NonConvergence { steps: usize },

    #[error("points are not pairwise distinct")]
    DuplicatePoints,

    #[error("fixed-point radius formula requires a ≠ 0")]
    ZeroParameter,

    #[error("compactum escapes the disc (max modulus {max_modulus})")]
    EscapesDisc { max_modulus: f64 },

    #[error("component has no target values")]
    MissingTarget,

    #[error("underdetermined fit: {samples} samples for degree {degree}")]
    Underdetermined { samples: usize, degree: usize },

    #[error("orthogonal basis broke down at degree {degree}")]
    BasisBreakdown { degree: usize },

    #[error("tolerance {tol:e} unreachable; best sup error {:e} at degree {}", best.report.sup_error, best.report.degree)]
    ToleranceUnreachable { tol: f64, best: Box<Fit> },

    #[error("ζ₁ and ζ₂ lie on a common level set: Re(āζ₁) = Re(āζ₂)")]
    CriterionViolated,

    #[error("witness radii collide: {0}")]
    InterleavingViolated(String),

    #[error("no admissible η found at stage {stage}: {detail}")]
    EtaNotFound { stage: usize, detail: String },

    #[error("parameter-oscillation condition violated: oscillation {oscillation:e} ≥ {bound:e}")]
    ConditionIiiViolated { oscillation: f64, bound: f64 },

    #[error("reciprocal certificate failed: min modulus {min_modulus:e}")]
    ReciprocalCertificate { min_modulus: f64 },

    #[error("no non-critical node found near {0}")]
    NodeSearchFailure(String),

    #[error("lift failed: {0}")]
    LiftFailed(String),

    #[error("eigenvalue iteration failed to converge")]
    EigenNonConvergence,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
