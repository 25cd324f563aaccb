//! Time-adaptive Bayesian phase estimation.
//!
//! Phase knowledge is held as a truncated Fourier series on the circle and
//! updated exactly after each binary measurement. Measurement settings are
//! chosen adaptively by maximizing the expected sharpness or entropy gain per
//! unit time, optionally looking several shots ahead.

pub mod density;
pub mod error;
pub mod gain;
pub mod harness;
pub mod model;
pub mod policy;
pub mod simqubit;

pub use density::{Contraction, FourierDensity};
pub use error::{Result, TapeError};
pub use gain::{AlphaDomain, AlphaOptimum, GainKind};
pub use model::{ControlSettings, NoiseModel, Outcome};
