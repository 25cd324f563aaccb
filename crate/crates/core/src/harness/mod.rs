//! Monte Carlo estimation campaigns, accuracy statistics and scaling fits.

pub mod campaign;
pub mod fit;
pub mod stats;
pub mod trial;

pub use campaign::{read_rows, run_batch, run_campaign, scaling_points, write_rows, BatchRow, RunConfig};
pub use fit::{filter_range, fit, fit_exponential, fit_power, FitModel, FitResult};
pub use stats::BatchStats;
pub use trial::{
    is_trial_failure, run_trial, run_trial_with_rng, run_trials, trial_rng, PhiSpec, ScenarioKind, ScenarioSpec,
    TrialResult, TrialSet,
};
