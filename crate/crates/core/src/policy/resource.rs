use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TapeError};

/// Largest consecutive time ratio the multi-step comparison ladder covers.
pub const MAX_STEP_RATIO: f64 = 32.0 / 7.0;

/// Duration of a shot as a function of `k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TimeModel {
    /// `t(k) = k`: the unitary dominates.
    #[default]
    Metrology,
    /// `t(k) = 1`: preparation and readout dominate.
    Shots,
    /// `t(k) = (a·k + b)/(a + b)`, normalized so that `t(1) = 1`.
    Affine { a: f64, b: f64 },
}

impl TimeModel {
    /// The intermediate model with `t(k) = (k + 100)/101`.
    pub fn default_affine() -> Self {
        TimeModel::Affine { a: 1.0, b: 100.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let TimeModel::Affine { a, b } = *self {
            if !(a >= 0.0 && b >= 0.0 && a + b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(TapeError::InvalidArgument(format!(
                    "affine time model needs a, b ≥ 0 with a + b > 0, got a = {a}, b = {b}"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn time(&self, k: u64) -> f64 {
        match *self {
            TimeModel::Metrology => k as f64,
            TimeModel::Shots => 1.0,
            TimeModel::Affine { a, b } => (a * k as f64 + b) / (a + b),
        }
    }
}

impl FromStr for TimeModel {
    type Err = TapeError;

    /// Parses `metrology`, `shots`, `affine` or `affine:a,b`.
    fn from_str(s: &str) -> Result<Self> {
        let model = match s.trim() {
            "metrology" => TimeModel::Metrology,
            "shots" => TimeModel::Shots,
            "affine" => TimeModel::default_affine(),
            other => {
                let params = other.strip_prefix("affine:").ok_or_else(|| {
                    TapeError::InvalidArgument(format!("unknown time model '{other}'"))
                })?;
                let (a, b) = params.split_once(',').ok_or_else(|| {
                    TapeError::InvalidArgument(format!("expected affine:a,b, got '{other}'"))
                })?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| TapeError::InvalidArgument(format!("bad affine parameter '{v}': {e}")))
                };
                TimeModel::Affine {
                    a: parse(a)?,
                    b: parse(b)?,
                }
            }
        };
        model.validate()?;
        Ok(model)
    }
}

impl fmt::Display for TimeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeModel::Metrology => write!(f, "metrology"),
            TimeModel::Shots => write!(f, "shots"),
            TimeModel::Affine { a, b } => write!(f, "affine:{a},{b}"),
        }
    }
}

/// Restriction on the lab-frame `k` values a strategy may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSubset {
    #[default]
    All,
    /// `k ∈ {1, 2, 4, 8, …}`.
    #[serde(alias = "pow2")]
    PowersOfTwo,
}

impl KSubset {
    #[inline]
    pub fn admits(self, k: u64) -> bool {
        match self {
            KSubset::All => k >= 1,
            KSubset::PowersOfTwo => k.is_power_of_two(),
        }
    }
}

impl FromStr for KSubset {
    type Err = TapeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "all" => Ok(KSubset::All),
            "pow2" | "powers-of-two" => Ok(KSubset::PowersOfTwo),
            other => Err(TapeError::InvalidArgument(format!("unknown k subset '{other}'"))),
        }
    }
}

/// Candidate `k` values with their shot times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResourceTable {
    ks: Vec<u64>,
    times: Vec<f64>,
}

impl ResourceTable {
    /// `ks` must be strictly increasing and positive, `times` positive and
    /// nondecreasing.
    pub fn new(ks: Vec<u64>, times: Vec<f64>) -> Result<Self> {
        if ks.len() != times.len() {
            return Err(TapeError::InvalidArgument(format!(
                "{} k values but {} times",
                ks.len(),
                times.len()
            )));
        }
        if ks.first().is_some_and(|&k| k == 0) {
            return Err(TapeError::InvalidArgument("k values must be positive".into()));
        }
        if ks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TapeError::InvalidArgument("k values must be strictly increasing".into()));
        }
        if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(TapeError::InvalidArgument("times must be positive and finite".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(TapeError::InvalidArgument(
                "times must not decrease as k increases".into(),
            ));
        }
        Ok(ResourceTable { ks, times })
    }

    pub fn from_time_model(ks: Vec<u64>, model: &TimeModel) -> Result<Self> {
        model.validate()?;
        let times = ks.iter().map(|&k| model.time(k)).collect();
        ResourceTable::new(ks, times)
    }

    /// Check the consecutive time-ratio bound required by the multi-step
    /// comparison ladder.
    pub fn check_multi_step(&self) -> Result<()> {
        for (i, w) in self.times.windows(2).enumerate() {
            if w[1] / w[0] >= MAX_STEP_RATIO {
                return Err(TapeError::Precondition(format!(
                    "time ratio t[{}]/t[{}] = {} is not below 32/7",
                    i + 1,
                    i,
                    w[1] / w[0]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    #[inline]
    pub fn k(&self, i: usize) -> u64 {
        self.ks[i]
    }

    #[inline]
    pub fn t(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn ks(&self) -> &[u64] {
        &self.ks
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}
