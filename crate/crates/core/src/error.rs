//! Shared error type for the library.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum McsError {
    #[error("invalid basis label (2j={two_j}, 2k={two_k}, 2m={two_m}): range or parity violated")]
    InvalidLabel { two_j: u32, two_k: i32, two_m: i32 },

    #[error("label (2j={two_j}, 2k={two_k}, 2m={two_m}) outside space with 2j_max={two_j_max}")]
    LabelOutsideSpace {
        two_j: u32,
        two_k: i32,
        two_m: i32,
        two_j_max: u32,
    },

    #[error("states live in different spaces")]
    SpaceMismatch,

    #[error("bi-spinor components shift j by 1/2 and need the half-integer tower")]
    SpinorOnIntegerTower,

    #[error("Euler angle out of range: {0}")]
    AngleOutOfRange(String),

    #[error("argument {x} outside the convergence domain (|z|^2 < {radius_sqr})")]
    DomainViolation { x: f64, radius_sqr: f64 },

    #[error("series did not converge: measured term ratio {ratio} >= 1 after {terms} terms")]
    NonConvergentSeries { ratio: f64, terms: usize },

    #[error("family has no closed-form measure")]
    MissingMeasure,

    #[error("quadrature failed to reach tolerance {tol} (estimate {estimate}, error {error})")]
    QuadratureFailure { tol: f64, estimate: f64, error: f64 },

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("Moebius denominator vanished (rotation pole at this parameter)")]
    MoebiusPole,

    #[error("coefficient c_j vanishes on the state's support (2j={two_j})")]
    VanishingCoefficient { two_j: u32 },

    #[error("monomial exponents ({zeta_pow}, {zl_pow}, {zm_pow}) outside the physical subspace")]
    ExponentOutOfRange {
        zeta_pow: u32,
        zl_pow: i64,
        zm_pow: i64,
    },

    #[error("Riccati flow passed near a pole (|zeta| = {abs_zeta:.3e} at t = {t})")]
    PolePassage { abs_zeta: f64, t: f64 },

    #[error("rotor constants must differ for the decoherence demonstration")]
    SphericalConstants,

    #[error("family tower {family} incompatible with space tower {space}")]
    TowerMismatch { family: String, space: String },

    #[error("parse error: {0}")]
    Parse(String),
}
