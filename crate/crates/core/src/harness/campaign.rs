use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stats::BatchStats;
use super::trial::{run_trials, ScenarioSpec};
use crate::error::{Result, TapeError};
use crate::model::NoiseModel;
use crate::policy::StrategyConfig;

/// A campaign as stored in a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// `budget` inside is overridden by each entry of `budgets`.
    #[serde(default)]
    pub strategy: StrategyConfig,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub noise_model: NoiseModel,
    pub budgets: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TapeError::Io(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() {
            return Err(TapeError::Config("no budgets given".into()));
        }
        if self.trials < 2 {
            return Err(TapeError::Config(format!("need at least 2 trials, got {}", self.trials)));
        }
        for &b in &self.budgets {
            StrategyConfig { budget: b, ..self.strategy }.validate()?;
        }
        self.scenario.channel()?;
        self.noise_model.validate()
    }
}

/// One CSV row per budget point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub budget: f64,
    pub trials: usize,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_stderr")]
    pub s_stderr: f64,
    pub delta_phi: f64,
    pub delta_phi_err: f64,
    pub mean_shots: f64,
    pub mean_time: f64,
    pub failed: usize,
}

impl BatchRow {
    pub fn new(budget: f64, stats: &BatchStats) -> Self {
        BatchRow {
            budget,
            trials: stats.n_trials,
            s: stats.s,
            s_stderr: stats.s_stderr,
            delta_phi: stats.delta_phi,
            delta_phi_err: stats.delta_phi_err,
            mean_shots: stats.mean_shots,
            mean_time: stats.mean_time,
            failed: stats.failed,
        }
    }
}

/// Run `n_trials` trials and summarize them.
pub fn run_batch(
    cfg: &StrategyConfig,
    spec: &ScenarioSpec,
    model: &NoiseModel,
    n_trials: usize,
    seed: u64,
) -> Result<BatchStats> {
    if n_trials < 2 {
        return Err(TapeError::InvalidArgument(format!("need at least 2 trials, got {n_trials}")));
    }
    let set = run_trials(cfg, spec, model, n_trials, seed)?;
    BatchStats::from_trials(&set.trials, set.failed)
}

/// Run every budget point. Point `i` uses master seed `seed + i`.
pub fn run_campaign(cfg: &RunConfig) -> Result<Vec<BatchRow>> {
    cfg.validate()?;
    cfg.budgets
        .iter()
        .enumerate()
        .map(|(i, &budget)| {
            let strategy = StrategyConfig { budget, ..cfg.strategy };
            let stats = run_batch(&strategy, &cfg.scenario, &cfg.noise_model, cfg.trials, cfg.seed.wrapping_add(i as u64))?;
            Ok(BatchRow::new(budget, &stats))
        })
        .collect()
}

fn csv_err(e: csv::Error) -> TapeError {
    TapeError::Io(e.to_string())
}

pub fn write_rows<W: Write>(w: W, rows: &[BatchRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<BatchRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<std::result::Result<Vec<BatchRow>, _>>()
        .map_err(csv_err)
}

/// `(budget, delta_phi)` pairs for fitting.
pub fn scaling_points(rows: &[BatchRow]) -> Vec<(f64, f64)> {
    rows.iter().map(|r| (r.budget, r.delta_phi)).collect()
}
