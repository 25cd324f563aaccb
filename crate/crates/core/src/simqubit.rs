//! Single-qubit density-matrix simulator that produces the measurement
//! outcomes seen by the estimator.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TapeError};
use crate::model::{check_unit, Outcome};

pub type Mat2 = Matrix2<Complex64>;

const STATE_TOL: f64 = 1e-12;
const KRAUS_TOL: f64 = 1e-14;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn real(m: [[f64; 2]; 2]) -> Mat2 {
    Mat2::new(c(m[0][0]), c(m[0][1]), c(m[1][0]), c(m[1][1]))
}

/// Physical noise acting in the simulated experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Channel {
    Noiseless,
    /// Phase damping after every application of the unitary; coherence is
    /// multiplied by `η` each time.
    Dephasing { eta: f64 },
    /// Bit flip with probability `p_b`, then spontaneous emission with
    /// probability `p_s`, each applied once after the `k` unitaries.
    BitflipSpont { p_b: f64, p_s: f64 },
}

impl Channel {
    /// Bit-flip plus spontaneous-emission noise with `p_b = p/2`, `p_s = p`.
    pub fn bitflip_spont(p: f64) -> Result<Self> {
        check_unit("p", p)?;
        Ok(Channel::BitflipSpont { p_b: 0.5 * p, p_s: p })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Channel::Noiseless => Ok(()),
            Channel::Dephasing { eta } => check_unit("eta", eta),
            Channel::BitflipSpont { p_b, p_s } => {
                check_unit("p_b", p_b)?;
                check_unit("p_s", p_s)
            }
        }
    }
}

/// A complete set of Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Kraus(Vec<Mat2>);

impl Kraus {
    /// Checks `Σ K†K = I` to `1e−14`.
    pub fn new(ops: Vec<Mat2>) -> Result<Self> {
        let sum: Mat2 = ops.iter().map(|k| k.adjoint() * k).sum();
        let err = (sum - Mat2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err > KRAUS_TOL {
            return Err(TapeError::InvalidState(format!(
                "Kraus operators are not trace preserving (deviation {err:e})"
            )));
        }
        Ok(Kraus(ops))
    }

    pub fn dephasing(eta: f64) -> Result<Self> {
        check_unit("eta", eta)?;
        Kraus::new(vec![
            Mat2::identity() * c(((1.0 + eta) / 2.0).sqrt()),
            real([[1.0, 0.0], [0.0, -1.0]]) * c(((1.0 - eta) / 2.0).sqrt()),
        ])
    }

    pub fn bit_flip(p: f64) -> Result<Self> {
        check_unit("p_b", p)?;
        Kraus::new(vec![
            Mat2::identity() * c((1.0 - p).sqrt()),
            real([[0.0, 1.0], [1.0, 0.0]]) * c(p.sqrt()),
        ])
    }

    pub fn spontaneous_emission(p: f64) -> Result<Self> {
        check_unit("p_s", p)?;
        Kraus::new(vec![
            real([[1.0, 0.0], [0.0, (1.0 - p).sqrt()]]),
            real([[0.0, p.sqrt()], [0.0, 0.0]]),
        ])
    }

    pub fn ops(&self) -> &[Mat2] {
        &self.0
    }
}

/// Qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Mat2,
}

impl QubitState {
    pub fn from_matrix(rho: Mat2) -> Result<Self> {
        let s = QubitState { rho };
        s.validate()?;
        Ok(s)
    }

    /// Pure state `|ψ⟩⟨ψ|`.
    pub fn pure(a: Complex64, b: Complex64) -> Result<Self> {
        let v = nalgebra::Vector2::new(a, b);
        QubitState::from_matrix(v * v.adjoint())
    }

    pub fn zero() -> Self {
        QubitState {
            rho: real([[1.0, 0.0], [0.0, 0.0]]),
        }
    }

    pub fn plus() -> Self {
        QubitState {
            rho: real([[0.5, 0.5], [0.5, 0.5]]),
        }
    }

    pub fn rho(&self) -> &Mat2 {
        &self.rho
    }

    /// Unit trace, Hermitian and positive semidefinite, each to `1e−12`.
    pub fn validate(&self) -> Result<()> {
        let r = &self.rho;
        let tr = r[(0, 0)] + r[(1, 1)];
        if (tr - c(1.0)).norm() > STATE_TOL {
            return Err(TapeError::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let herm = (r - r.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > STATE_TOL {
            return Err(TapeError::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let half_gap = ((0.5 * (r[(0, 0)].re - r[(1, 1)].re)).powi(2) + r[(0, 1)].norm_sqr()).sqrt();
        let min_eig = 0.5 * tr.re - half_gap;
        if min_eig < -STATE_TOL {
            return Err(TapeError::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    pub fn apply_unitary(&self, u: &Mat2) -> Self {
        QubitState {
            rho: u * self.rho * u.adjoint(),
        }
    }

    pub fn apply_channel(&self, kraus: &Kraus) -> Self {
        QubitState {
            rho: kraus.ops().iter().map(|k| k * self.rho * k.adjoint()).sum(),
        }
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized `|ψ⟩ = (a, b)`.
    pub fn overlap(&self, a: Complex64, b: Complex64) -> f64 {
        let v = nalgebra::Vector2::new(a, b);
        (v.adjoint() * self.rho * v)[(0, 0)].re
    }
}

/// `e^{−iZθ/2}`
pub fn z_rotation(theta: f64) -> Mat2 {
    Mat2::new(
        Complex64::from_polar(1.0, -0.5 * theta),
        c(0.0),
        c(0.0),
        Complex64::from_polar(1.0, 0.5 * theta),
    )
}

/// `e^{iYθ/2} = [[cos θ/2, sin θ/2], [−sin θ/2, cos θ/2]]`
pub fn y_rotation(theta: f64) -> Mat2 {
    let (s, co) = (0.5 * theta).sin_cos();
    real([[co, s], [-s, co]])
}

/// The simulated experiment: noise channel, true phase and outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    channel: Channel,
    phi: f64,
    flip_outcomes: bool,
    kraus: Vec<Kraus>,
}

impl Scenario {
    pub fn new(channel: Channel, phi: f64) -> Result<Self> {
        channel.validate()?;
        if !phi.is_finite() {
            return Err(TapeError::InvalidArgument(format!("phase {phi} is not finite")));
        }
        let kraus = match channel {
            Channel::Noiseless => vec![],
            Channel::Dephasing { eta } => vec![Kraus::dephasing(eta)?],
            Channel::BitflipSpont { p_b, p_s } => {
                vec![Kraus::bit_flip(p_b)?, Kraus::spontaneous_emission(p_s)?]
            }
        };
        Ok(Scenario {
            channel,
            phi,
            flip_outcomes: false,
            kraus,
        })
    }

    /// Swap the labels of the two outcomes.
    pub fn with_flipped_outcomes(mut self, flip: bool) -> Self {
        self.flip_outcomes = flip;
        self
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// State just before readout after `k` applications of the unitary.
    pub fn evolve(&self, alpha: f64, k: u64) -> Result<QubitState> {
        if k == 0 {
            return Err(TapeError::InvalidArgument("k must be at least 1".into()));
        }
        let kphi = k as f64 * self.phi;
        let state = match self.channel {
            Channel::Noiseless => QubitState::plus().apply_unitary(&z_rotation(kphi)),
            // Phase damping commutes with Z rotations, so k rounds compose
            // into one rotation followed by damping with η^k.
            Channel::Dephasing { eta } => QubitState::plus()
                .apply_unitary(&z_rotation(kphi))
                .apply_channel(&Kraus::dephasing(eta.powf(k as f64))?),
            Channel::BitflipSpont { .. } => {
                let mut s = QubitState::zero().apply_unitary(&y_rotation(kphi));
                for kr in &self.kraus {
                    s = s.apply_channel(kr);
                }
                s.apply_unitary(&y_rotation(-alpha))
            }
        };
        state.validate()?;
        Ok(state)
    }

    /// Probability of `ξ = +1` for control `(α, k)`.
    pub fn outcome_distribution(&self, alpha: f64, k: u64) -> Result<f64> {
        let state = self.evolve(alpha, k)?;
        let p = match self.channel {
            Channel::Noiseless | Channel::Dephasing { .. } => {
                state.overlap(c(FRAC_1_SQRT_2), Complex64::from_polar(FRAC_1_SQRT_2, alpha))
            }
            Channel::BitflipSpont { .. } => state.rho()[(0, 0)].re,
        };
        let p = p.clamp(0.0, 1.0);
        Ok(if self.flip_outcomes { 1.0 - p } else { p })
    }

    /// Draw an outcome.
    pub fn sample<R: Rng + ?Sized>(&self, alpha: f64, k: u64, rng: &mut R) -> Result<Outcome> {
        let p = self.outcome_distribution(alpha, k)?;
        Ok(if rng.gen::<f64>() < p { Outcome::Plus } else { Outcome::Minus })
    }
}
