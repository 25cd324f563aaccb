//! Two-outcome measurement model with per-k asymmetry and contrast.
//!
//! An outcome `ξ = ±1` after `k` applications of the unitary and control phase
//! `α` occurs with probability
//!
//! ```text
//! P_ξ(α, kφ) = ½ (1 + ξ ((1 − λ_k) + λ_k ζ_k cos(α − kφ)))
//! ```
//!
//! `λ_k < 1` biases towards `ξ = +1`, `ζ_k < 1` reduces the fringe contrast.

use serde::{Deserialize, Serialize};

use crate::density::FourierDensity;
use crate::error::{Result, TapeError};

/// Binary measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    #[inline]
    pub fn flipped(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

/// Control parameters of a single shot in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSettings {
    /// Control phase in `[0, 2π)`.
    pub alpha: f64,
    /// Number of coherent applications of the unitary, `k ≥ 1`.
    pub k: u64,
}

impl ControlSettings {
    pub fn new(alpha: f64, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(TapeError::InvalidArgument("k must be at least 1".into()));
        }
        Ok(ControlSettings {
            alpha: alpha.rem_euclid(std::f64::consts::TAU),
            k,
        })
    }
}

/// Per-k asymmetry `λ_k` and contrast `ζ_k` of the estimator's outcome model.
///
/// Parameters are evaluated lazily per `k`, so no table up to some `k_max` is
/// ever built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum NoiseModel {
    /// `λ_k = λ`, `ζ_k = ζ` for all `k`.
    Constant { lambda: f64, zeta: f64 },
    /// `λ_k = 1`, `ζ_k = exp(−(1 − η) k)`.
    Dephasing { eta: f64 },
    /// `λ_k = ζ_k = 1 − p`.
    FlatError { p: f64 },
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::ideal()
    }
}

impl NoiseModel {
    /// Noise-free model, `λ_k = ζ_k = 1`.
    pub fn ideal() -> Self {
        NoiseModel::Constant {
            lambda: 1.0,
            zeta: 1.0,
        }
    }

    pub fn constant(lambda: f64, zeta: f64) -> Result<Self> {
        check_unit("lambda", lambda)?;
        check_unit("zeta", zeta)?;
        Ok(NoiseModel::Constant { lambda, zeta })
    }

    pub fn dephasing(eta: f64) -> Result<Self> {
        check_unit("eta", eta)?;
        Ok(NoiseModel::Dephasing { eta })
    }

    pub fn flat_error(p: f64) -> Result<Self> {
        check_unit("p", p)?;
        Ok(NoiseModel::FlatError { p })
    }

    /// Re-check the parameters (useful after deserialization).
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Constant { lambda, zeta } => {
                check_unit("lambda", lambda)?;
                check_unit("zeta", zeta)
            }
            NoiseModel::Dephasing { eta } => check_unit("eta", eta),
            NoiseModel::FlatError { p } => check_unit("p", p),
        }
    }

    /// `(λ_k, ζ_k)` for a lab-frame `k`.
    #[inline]
    pub fn params(&self, k: u64) -> (f64, f64) {
        match *self {
            NoiseModel::Constant { lambda, zeta } => (lambda, zeta),
            NoiseModel::Dephasing { eta } => (1.0, (-(1.0 - eta) * k as f64).exp()),
            NoiseModel::FlatError { p } => (1.0 - p, 1.0 - p),
        }
    }

    #[inline]
    pub fn lambda(&self, k: u64) -> f64 {
        self.params(k).0
    }

    #[inline]
    pub fn zeta(&self, k: u64) -> f64 {
        self.params(k).1
    }

    /// True when `λ_k = 1` for every `k`, which makes the gains π-periodic in α.
    pub fn is_symmetric(&self) -> bool {
        match *self {
            NoiseModel::Constant { lambda, .. } => lambda == 1.0,
            NoiseModel::Dephasing { .. } => true,
            NoiseModel::FlatError { p } => p == 0.0,
        }
    }
}

pub(crate) fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(TapeError::InvalidArgument(format!(
            "{name} = {v} is outside [0, 1]"
        )))
    }
}

/// Probability of `outcome` given the fringe phase `k·φ`.
pub fn outcome_prob(outcome: Outcome, alpha: f64, k_phi: f64, lambda: f64, zeta: f64) -> Result<f64> {
    check_unit("lambda", lambda)?;
    check_unit("zeta", zeta)?;
    let xi = outcome.sign();
    let p = 0.5 * (1.0 + xi * ((1.0 - lambda) + lambda * zeta * (alpha - k_phi).cos()));
    Ok(p.clamp(0.0, 1.0))
}

/// Prior-predictive probability `Π_ξ(α, k) = ∫ P_ξ p dφ/2π`.
pub fn posterior_outcome_prob(
    density: &FourierDensity,
    outcome: Outcome,
    alpha: f64,
    k: u64,
    lambda: f64,
    zeta: f64,
) -> Result<f64> {
    if k == 0 {
        return Err(TapeError::InvalidArgument("k must be at least 1".into()));
    }
    check_unit("lambda", lambda)?;
    check_unit("zeta", zeta)?;
    let pi = predictive_prob(density, outcome, alpha, k, lambda, zeta);
    if !(-1e-12..=1.0 + 1e-12).contains(&pi) {
        return Err(TapeError::InvalidDensity(format!(
            "outcome probability {pi} outside [0, 1]"
        )));
    }
    Ok(pi)
}

/// Unchecked `Π_ξ` used on hot paths.
#[inline]
pub(crate) fn predictive_prob(
    density: &FourierDensity,
    outcome: Outcome,
    alpha: f64,
    k: u64,
    lambda: f64,
    zeta: f64,
) -> f64 {
    let xi = outcome.sign();
    let ck = density.coeff(k as i64);
    let re = ck.re * alpha.cos() - ck.im * alpha.sin();
    0.5 * (1.0 + xi * (1.0 - lambda)) + xi * 0.5 * lambda * zeta * re
}
