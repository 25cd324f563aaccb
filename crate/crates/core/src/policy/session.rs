use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::multistep::{multi_step_choice, SearchUpVariant};
use super::rate::{rate_choice, KSearch};
use super::resource::{KSubset, ResourceTable, TimeModel};
use crate::density::{Contraction, FourierDensity};
use crate::error::{Result, TapeError};
use crate::gain::{AlphaDomain, GainKind};
use crate::model::{ControlSettings, NoiseModel, Outcome};

/// Slack when comparing shot times with the remaining budget.
const BUDGET_TOL: f64 = 1e-9;

/// Knowledge measure a strategy optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Sharpness,
    Entropy,
    /// Entropy during the first half of the budget, sharpness afterwards.
    Hybrid,
}

impl std::str::FromStr for Method {
    type Err = TapeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sharpness" | "sharpening" => Ok(Method::Sharpness),
            "entropy" => Ok(Method::Entropy),
            "hybrid" => Ok(Method::Hybrid),
            other => Err(TapeError::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    #[default]
    GainRate,
    MultiStep,
}

/// When and how far to zoom into the posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContractionConfig {
    pub enabled: bool,
    /// Contract once `√V[q] < π/2^c`. `None` picks 13, or 14 with a
    /// restricted `k` subset.
    pub threshold_exponent: Option<u32>,
    pub factor: u64,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        ContractionConfig {
            enabled: true,
            threshold_exponent: None,
            factor: 2,
        }
    }
}

/// Everything that determines how a session picks its shots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub method: Method,
    pub search: KSearch,
    pub time_model: TimeModel,
    pub k_subset: KSubset,
    /// Optional cap on lab-frame `k`.
    pub k_max: Option<u64>,
    /// Total time budget `N`.
    pub budget: f64,
    pub contraction: ContractionConfig,
    pub alpha_domain: AlphaDomain,
    pub search_up: SearchUpVariant,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            kind: StrategyKind::GainRate,
            method: Method::Sharpness,
            search: KSearch::Fibonacci,
            time_model: TimeModel::Metrology,
            k_subset: KSubset::All,
            k_max: None,
            budget: 1.0,
            contraction: ContractionConfig::default(),
            alpha_domain: AlphaDomain::Half,
            search_up: SearchUpVariant::AsPrinted,
        }
    }
}

impl StrategyConfig {
    pub fn new(method: Method, budget: f64) -> Self {
        StrategyConfig {
            method,
            budget,
            ..StrategyConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(TapeError::InvalidArgument(format!(
                "budget must be positive, got {}",
                self.budget
            )));
        }
        self.time_model.validate()?;
        if self.threshold_exponent() < 1 {
            return Err(TapeError::InvalidArgument("threshold exponent must be at least 1".into()));
        }
        if self.contraction.factor < 2 {
            return Err(TapeError::InvalidArgument("contraction factor must be at least 2".into()));
        }
        if self.k_max == Some(0) {
            return Err(TapeError::InvalidArgument("k_max must be at least 1".into()));
        }
        Ok(())
    }

    pub fn threshold_exponent(&self) -> u32 {
        self.contraction.threshold_exponent.unwrap_or(match self.k_subset {
            KSubset::All => 13,
            KSubset::PowersOfTwo => 14,
        })
    }

    /// Window-frame Holevo deviation below which a contraction is scheduled.
    pub fn contraction_threshold(&self) -> f64 {
        PI / 2f64.powi(self.threshold_exponent() as i32)
    }
}

/// Settings chosen for the next shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Lab-frame control.
    pub settings: ControlSettings,
    /// Window-frame `j = k/M` and phase `β = α − k·φ₀`.
    pub window_k: u64,
    pub window_alpha: f64,
    pub objective: GainKind,
    /// Time the shot consumes.
    pub time: f64,
}

/// Mutable state of one estimation run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionState {
    contraction: Contraction,
    elapsed: f64,
    shots: u64,
    pending_contraction: bool,
    contractions: u32,
    k_history: Vec<u64>,
}

impl SessionState {
    /// Fresh session with a uniform prior.
    pub fn new() -> Self {
        SessionState::default()
    }

    pub fn contraction(&self) -> &Contraction {
        &self.contraction
    }

    pub fn density(&self) -> &FourierDensity {
        self.contraction.density()
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn pending_contraction(&self) -> bool {
        self.pending_contraction
    }

    pub fn contractions(&self) -> u32 {
        self.contractions
    }

    pub fn k_history(&self) -> &[u64] {
        &self.k_history
    }

    pub fn remaining(&self, cfg: &StrategyConfig) -> f64 {
        cfg.budget - self.elapsed
    }

    /// Lab-frame phase estimate.
    pub fn estimate(&self) -> Result<f64> {
        self.contraction.lab_estimate()
    }

    /// Gain to optimize on the next shot.
    pub fn objective(&self, cfg: &StrategyConfig) -> GainKind {
        if self.pending_contraction {
            return GainKind::Sharpness;
        }
        match cfg.method {
            Method::Sharpness => GainKind::Sharpness,
            Method::Entropy => GainKind::Entropy,
            Method::Hybrid if self.elapsed < 0.5 * cfg.budget => GainKind::Entropy,
            Method::Hybrid => GainKind::Sharpness,
        }
    }

    /// Window-frame candidates `j` with their lab shot times.
    ///
    /// All admissible `j ≤ Γ` are kept plus the smallest admissible `j > Γ`:
    /// beyond Γ every referenced coefficient vanishes, so larger `j` cannot
    /// gain more and take at least as long.
    pub fn candidates(&self, cfg: &StrategyConfig) -> Result<ResourceTable> {
        let mag = self.contraction.magnification();
        let gamma = self.density().gamma() as u64;
        let remaining = self.remaining(cfg) + BUDGET_TOL;
        let (mut ks, mut times) = (Vec::new(), Vec::new());
        let mut j = 1u64;
        loop {
            let Some(k) = mag.checked_mul(j) else { break };
            if cfg.k_max.is_some_and(|m| k > m) {
                break;
            }
            let t = cfg.time_model.time(k);
            if t > remaining {
                break;
            }
            if cfg.k_subset.admits(k) {
                ks.push(j);
                times.push(t);
                if j > gamma {
                    break;
                }
            }
            j = match cfg.k_subset {
                KSubset::All => j + 1,
                KSubset::PowersOfTwo => match j.checked_mul(2) {
                    Some(n) => n,
                    None => break,
                },
            };
        }
        ResourceTable::new(ks, times)
    }

    /// Choose the next shot's settings.
    pub fn next_settings<R: Rng + ?Sized>(
        &self,
        cfg: &StrategyConfig,
        model: &NoiseModel,
        rng: &mut R,
    ) -> Result<Decision> {
        let table = self.candidates(cfg)?;
        if table.is_empty() {
            return Err(TapeError::BudgetExhausted {
                remaining: self.remaining(cfg),
            });
        }
        let objective = self.objective(cfg);
        let mag = self.contraction.magnification();
        let params = |j: u64| model.params(mag * j);

        let (index, beta) = if self.shots == 0 && self.density().is_uniform() {
            (0, rng.gen::<f64>() * PI)
        } else {
            match cfg.kind {
                StrategyKind::GainRate => {
                    let c = rate_choice(self.density(), &table, objective, params, cfg.search, cfg.alpha_domain)?;
                    (c.index, c.alpha)
                }
                StrategyKind::MultiStep => {
                    multi_step_choice(self.density(), &table, objective, params, cfg.search_up, cfg.alpha_domain)?
                }
            }
        };
        let j = table.k(index);
        let settings = self.contraction.lab_settings(beta, j)?;
        Ok(Decision {
            settings,
            window_k: j,
            window_alpha: beta.rem_euclid(TAU),
            objective,
            time: table.t(index),
        })
    }

    /// Fold a measured outcome into the state and run any due contraction.
    pub fn record(
        &mut self,
        cfg: &StrategyConfig,
        model: &NoiseModel,
        decision: &Decision,
        outcome: Outcome,
    ) -> Result<()> {
        let (lambda, zeta) = model.params(decision.settings.k);
        let (post, _) = self
            .density()
            .update(outcome, decision.window_alpha, decision.window_k, lambda, zeta)?;
        self.contraction.set_density(post);
        self.elapsed += decision.time;
        self.shots += 1;
        self.k_history.push(decision.settings.k);

        if self.pending_contraction {
            self.pending_contraction = false;
            match self.contraction.contract(cfg.contraction.factor) {
                Ok(c) => {
                    self.contraction = c;
                    self.contractions += 1;
                }
                Err(TapeError::Precondition(_) | TapeError::EstimateUndefined) => {}
                Err(e) => return Err(e),
            }
        }
        if cfg.contraction.enabled {
            if let Ok(v) = self.density().holevo_variance() {
                if v.sqrt() < cfg.contraction_threshold() {
                    self.pending_contraction = true;
                }
            }
        }
        Ok(())
    }
}

/// Free-function form of [`SessionState::next_settings`].
pub fn next_settings<R: Rng + ?Sized>(
    state: &SessionState,
    cfg: &StrategyConfig,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<Decision> {
    state.next_settings(cfg, model, rng)
}
