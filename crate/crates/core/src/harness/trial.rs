use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TapeError};
use crate::model::NoiseModel;
use crate::policy::{SessionState, StrategyConfig};
use crate::simqubit::{Channel, Scenario};

/// Per-trial random stream derived from the master seed and the trial index.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// True phase of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "PhiRepr", into = "PhiRepr")]
pub enum PhiSpec {
    /// Uniform on `[0, 2π)`, drawn afresh for every trial.
    #[default]
    Random,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PhiRepr {
    Value(f64),
    Name(String),
}

impl TryFrom<PhiRepr> for PhiSpec {
    type Error = String;

    fn try_from(r: PhiRepr) -> std::result::Result<Self, String> {
        match r {
            PhiRepr::Value(v) if v.is_finite() => Ok(PhiSpec::Fixed(v)),
            PhiRepr::Value(v) => Err(format!("phase {v} is not finite")),
            PhiRepr::Name(s) if s == "random" => Ok(PhiSpec::Random),
            PhiRepr::Name(s) => Err(format!("phi must be \"random\" or a number, got \"{s}\"")),
        }
    }
}

impl From<PhiSpec> for PhiRepr {
    fn from(p: PhiSpec) -> Self {
        match p {
            PhiSpec::Random => PhiRepr::Name("random".into()),
            PhiSpec::Fixed(v) => PhiRepr::Value(v),
        }
    }
}

impl PhiSpec {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            PhiSpec::Random => rng.gen::<f64>() * TAU,
            PhiSpec::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Noiseless,
    Dephasing,
    BitflipSpont,
}

/// Simulated experiment as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub phi: PhiSpec,
    #[serde(default)]
    pub flip_outcomes: bool,
}

impl ScenarioSpec {
    pub fn noiseless() -> Self {
        ScenarioSpec {
            scenario: ScenarioKind::Noiseless,
            eta: None,
            p: None,
            phi: PhiSpec::Random,
            flip_outcomes: false,
        }
    }

    pub fn dephasing(eta: f64) -> Self {
        ScenarioSpec {
            scenario: ScenarioKind::Dephasing,
            eta: Some(eta),
            ..ScenarioSpec::noiseless()
        }
    }

    pub fn bitflip_spont(p: f64) -> Self {
        ScenarioSpec {
            scenario: ScenarioKind::BitflipSpont,
            p: Some(p),
            ..ScenarioSpec::noiseless()
        }
    }

    pub fn channel(&self) -> Result<Channel> {
        let missing = |name: &str| TapeError::Config(format!("scenario {:?} needs '{name}'", self.scenario));
        let ch = match self.scenario {
            ScenarioKind::Noiseless => Channel::Noiseless,
            ScenarioKind::Dephasing => Channel::Dephasing {
                eta: self.eta.ok_or_else(|| missing("eta"))?,
            },
            ScenarioKind::BitflipSpont => Channel::bitflip_spont(self.p.ok_or_else(|| missing("p"))?)?,
        };
        ch.validate()?;
        Ok(ch)
    }
}

impl FromStr for ScenarioSpec {
    type Err = TapeError;

    /// Parses `noiseless`, `dephasing:η` or `bitflip-spont:p`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let value = |what: &str| -> Result<f64> {
            arg.ok_or_else(|| TapeError::InvalidArgument(format!("scenario '{name}' needs ':{what}'")))?
                .parse::<f64>()
                .map_err(|e| TapeError::InvalidArgument(format!("bad {what} in '{s}': {e}")))
        };
        let spec = match name {
            "noiseless" => ScenarioSpec::noiseless(),
            "dephasing" => ScenarioSpec::dephasing(value("eta")?),
            "bitflip-spont" => ScenarioSpec::bitflip_spont(value("p")?),
            other => return Err(TapeError::InvalidArgument(format!("unknown scenario '{other}'"))),
        };
        spec.channel()?;
        Ok(spec)
    }
}

impl fmt::Display for ScenarioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scenario {
            ScenarioKind::Noiseless => write!(f, "noiseless"),
            ScenarioKind::Dephasing => write!(f, "dephasing:{}", self.eta.unwrap_or(f64::NAN)),
            ScenarioKind::BitflipSpont => write!(f, "bitflip-spont:{}", self.p.unwrap_or(f64::NAN)),
        }
    }
}

/// One complete estimation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub phi_true: f64,
    pub phi_hat: f64,
    pub elapsed_time: f64,
    pub shots: u64,
    pub k_history: Vec<u64>,
    pub contractions_performed: u32,
}

/// Run one estimation until the budget admits no further shot.
pub fn run_trial_with_rng<R: Rng + ?Sized>(
    cfg: &StrategyConfig,
    spec: &ScenarioSpec,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<TrialResult> {
    cfg.validate()?;
    model.validate()?;
    let phi = spec.phi.draw(rng);
    let sim = Scenario::new(spec.channel()?, phi)?.with_flipped_outcomes(spec.flip_outcomes);
    let mut state = SessionState::new();
    loop {
        let decision = match state.next_settings(cfg, model, rng) {
            Ok(d) => d,
            Err(TapeError::BudgetExhausted { .. }) if state.shots() > 0 => break,
            Err(e) => return Err(e),
        };
        let outcome = sim.sample(decision.settings.alpha, decision.settings.k, rng)?;
        state.record(cfg, model, &decision, outcome)?;
    }
    Ok(TrialResult {
        phi_true: phi,
        phi_hat: state.estimate()?,
        elapsed_time: state.elapsed(),
        shots: state.shots(),
        k_history: state.k_history().to_vec(),
        contractions_performed: state.contractions(),
    })
}

/// Run trial `index` of the campaign seeded with `seed`.
pub fn run_trial(
    cfg: &StrategyConfig,
    spec: &ScenarioSpec,
    model: &NoiseModel,
    seed: u64,
    index: u64,
) -> Result<TrialResult> {
    run_trial_with_rng(cfg, spec, model, &mut trial_rng(seed, index))
}

/// True for errors that end a single trial without invalidating the batch.
pub fn is_trial_failure(e: &TapeError) -> bool {
    matches!(
        e,
        TapeError::EstimateUndefined | TapeError::InfiniteVariance | TapeError::ImpossibleOutcome(_)
    )
}

/// Completed trials plus the number that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub trials: Vec<TrialResult>,
    pub failed: usize,
}

/// Run `n_trials` independent trials in parallel. Results are in trial order.
pub fn run_trials(
    cfg: &StrategyConfig,
    spec: &ScenarioSpec,
    model: &NoiseModel,
    n_trials: usize,
    seed: u64,
) -> Result<TrialSet> {
    let results: Vec<Result<TrialResult>> = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| run_trial(cfg, spec, model, seed, i))
        .collect();
    let mut trials = Vec::with_capacity(n_trials);
    let mut failed = 0;
    for r in results {
        match r {
            Ok(t) => trials.push(t),
            Err(e) if is_trial_failure(&e) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(TrialSet { trials, failed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Method;

    #[test]
    fn single_unit_budget_is_one_shot() {
        let cfg = StrategyConfig::new(Method::Sharpness, 1.0);
        let t = run_trial(&cfg, &ScenarioSpec::noiseless(), &NoiseModel::ideal(), 7, 0).unwrap();
        assert_eq!(t.shots, 1);
        assert_eq!(t.k_history, vec![1]);
        assert_eq!(t.elapsed_time, 1.0);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let cfg = StrategyConfig::new(Method::Hybrid, 64.0);
        let a = run_trial(&cfg, &ScenarioSpec::noiseless(), &NoiseModel::ideal(), 11, 3).unwrap();
        let b = run_trial(&cfg, &ScenarioSpec::noiseless(), &NoiseModel::ideal(), 11, 3).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = run_trial(&cfg, &ScenarioSpec::noiseless(), &NoiseModel::ideal(), 11, 4).unwrap();
        assert_ne!(a.phi_true, c.phi_true);
    }

    #[test]
    fn budget_is_never_exceeded() {
        for method in [Method::Sharpness, Method::Entropy, Method::Hybrid] {
            let cfg = StrategyConfig::new(method, 100.0);
            for i in 0..5 {
                let t = run_trial(&cfg, &ScenarioSpec::noiseless(), &NoiseModel::ideal(), 1, i).unwrap();
                let total: u64 = t.k_history.iter().sum();
                assert!(total as f64 <= 100.0);
                assert_eq!(total as f64, t.elapsed_time);
                assert_eq!(t.shots as usize, t.k_history.len());
            }
        }
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!("noiseless".parse::<ScenarioSpec>().unwrap(), ScenarioSpec::noiseless());
        assert_eq!("dephasing:0.995".parse::<ScenarioSpec>().unwrap(), ScenarioSpec::dephasing(0.995));
        assert_eq!("bitflip-spont:0.1".parse::<ScenarioSpec>().unwrap(), ScenarioSpec::bitflip_spont(0.1));
        assert!("dephasing".parse::<ScenarioSpec>().is_err());
        assert!("dephasing:2".parse::<ScenarioSpec>().is_err());
        assert!("cosmic-rays".parse::<ScenarioSpec>().is_err());
    }

    #[test]
    fn scenario_json() {
        let s: ScenarioSpec =
            serde_json::from_str(r#"{"scenario":"bitflip-spont","p":0.1,"phi":"random"}"#).unwrap();
        assert_eq!(s.channel().unwrap(), Channel::BitflipSpont { p_b: 0.05, p_s: 0.1 });
        let s: ScenarioSpec = serde_json::from_str(r#"{"scenario":"dephasing","eta":0.9,"phi":1.5}"#).unwrap();
        assert_eq!(s.phi, PhiSpec::Fixed(1.5));
        assert!(serde_json::from_str::<ScenarioSpec>(r#"{"scenario":"noiseless","phi":"fixed"}"#).is_err());
        let round: ScenarioSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(round, s);
    }
}
