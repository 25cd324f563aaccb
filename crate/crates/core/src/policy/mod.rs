//! Adaptive choice of the control phase and the number of unitary
//! applications for each shot.

pub mod multistep;
pub mod rate;
pub mod resource;
pub mod search;
pub mod session;
pub mod threshold;

pub use multistep::{
    compare, compare_steps, intervals, multi_step_gain, multi_step_select, search_interval, search_up,
    DensityStepGain, SearchUpVariant, StepGain,
};
pub use rate::{gain_rate_select, rate_choice, KSearch, RateChoice};
pub use resource::{KSubset, ResourceTable, TimeModel};
pub use search::{exceeds, fibonacci_search, TIE_TOLERANCE};
pub use session::{
    next_settings, ContractionConfig, Decision, Method, SessionState, StrategyConfig, StrategyKind,
};
pub use threshold::{contraction_sigma_threshold, erfc_inv};
