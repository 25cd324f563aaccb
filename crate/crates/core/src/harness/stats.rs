use serde::{Deserialize, Serialize};

use super::trial::TrialResult;
use crate::error::{Result, TapeError};

/// Mean sharpness below this leaves the uncertainty undefined.
pub const MIN_SHARPNESS: f64 = 1e-12;

/// Aggregate accuracy of a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    /// Trials that produced an estimate.
    pub n_trials: usize,
    /// Trials excluded because no estimate was available.
    pub failed: usize,
    /// `S = ⟨cos(φ̂ − φ)⟩`.
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_stderr")]
    pub s_stderr: f64,
    /// `⟨sin(φ̂ − φ)⟩`, a bias diagnostic.
    pub mean_sin: f64,
    /// `√(S⁻² − 1)`.
    pub delta_phi: f64,
    pub delta_phi_err: f64,
    pub mean_shots: f64,
    pub mean_time: f64,
    pub mean_contractions: f64,
}

/// Sum after sorting, so the result does not depend on input order.
fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn sorted_mean(v: Vec<f64>) -> f64 {
    let n = v.len() as f64;
    sorted_sum(v) / n
}

impl BatchStats {
    pub fn from_trials(trials: &[TrialResult], failed: usize) -> Result<Self> {
        let errors: Vec<f64> = trials.iter().map(|t| t.phi_hat - t.phi_true).collect();
        let mut stats = BatchStats::from_errors(&errors, failed)?;
        stats.mean_shots = sorted_mean(trials.iter().map(|t| t.shots as f64).collect());
        stats.mean_time = sorted_mean(trials.iter().map(|t| t.elapsed_time).collect());
        stats.mean_contractions = sorted_mean(trials.iter().map(|t| t.contractions_performed as f64).collect());
        Ok(stats)
    }

    /// Statistics from the estimation errors `φ̂ − φ` alone.
    pub fn from_errors(errors: &[f64], failed: usize) -> Result<Self> {
        let n = errors.len();
        if n < 2 {
            return Err(TapeError::InvalidArgument(format!(
                "need at least 2 successful trials, got {n}"
            )));
        }
        let cos: Vec<f64> = errors.iter().map(|e| e.cos()).collect();
        let s = sorted_mean(cos.clone());
        let var = sorted_sum(cos.iter().map(|c| (c - s).powi(2)).collect()) / (n as f64 - 1.0);
        let s_stderr = (var / n as f64).sqrt();
        let mean_sin = sorted_mean(errors.iter().map(|e| e.sin()).collect());
        if !(s > MIN_SHARPNESS) {
            return Err(TapeError::UncertaintyUndefined(s));
        }
        let delta_phi = (1.0 / (s * s) - 1.0).max(0.0).sqrt();
        // d√(S⁻² − 1)/dS = −S⁻³ / √(S⁻² − 1)
        let delta_phi_err = if s_stderr == 0.0 {
            0.0
        } else {
            s_stderr / (s * s * s * delta_phi)
        };
        Ok(BatchStats {
            n_trials: n,
            failed,
            s,
            s_stderr,
            mean_sin,
            delta_phi,
            delta_phi_err,
            mean_shots: 0.0,
            mean_time: 0.0,
            mean_contractions: 0.0,
        })
    }
}
