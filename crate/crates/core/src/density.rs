//! Fourier-series representation of a circular phase density.
//!
//! A density is stored as `c_0..c_Γ` with
//!
//! ```text
//! p(φ) = Σ_n c_n e^{inφ} = 1 + 2 Σ_{n≥1} Re{c_n e^{inφ}},   c_{−n} = conj(c_n)
//! ```
//!
//! and normalized w.r.t. the measure `dφ/2π`, so `c_0 = 1`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TapeError};
use crate::model::{check_unit, Outcome};

/// Default hard cap on the number of stored coefficients.
pub const DEFAULT_MAX_GAMMA: usize = 1 << 20;

/// Trailing coefficients below this magnitude are dropped after an update.
pub const TAIL_CUTOFF: f64 = 1e-15;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct FourierDensity {
    coeffs: Vec<Complex64>,
}

impl Default for FourierDensity {
    fn default() -> Self {
        Self::uniform()
    }
}

impl FourierDensity {
    /// The uniform density `p(φ) = 1`.
    pub fn uniform() -> Self {
        FourierDensity { coeffs: vec![ONE] }
    }

    /// Build from `c_0..c_Γ`. `c_0` must be 1 (to 1e−12) and every `|c_n| ≤ 1`.
    pub fn from_coeffs(mut coeffs: Vec<Complex64>) -> Result<Self> {
        let Some(c0) = coeffs.first() else {
            return Err(TapeError::InvalidDensity("no coefficients".into()));
        };
        if (c0 - ONE).norm() > 1e-12 {
            return Err(TapeError::InvalidDensity(format!("c_0 = {c0} is not 1")));
        }
        if let Some((n, c)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !c.re.is_finite() || !c.im.is_finite() || c.norm() > 1.0 + 1e-12)
        {
            return Err(TapeError::InvalidDensity(format!("|c_{n}| = {} exceeds 1", c.norm())));
        }
        coeffs[0] = ONE;
        Ok(FourierDensity { coeffs })
    }

    /// Wrapped normal density with mean `mean` and `c_n = e^{−n²σ²/2}` magnitude,
    /// truncated where the coefficients fall below `1e−17`.
    pub fn wrapped_normal(mean: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(TapeError::InvalidArgument(format!("sigma = {sigma} must be positive")));
        }
        let gamma = ((2.0 * (1e17f64).ln()).sqrt() / sigma).ceil() as usize;
        if gamma > DEFAULT_MAX_GAMMA {
            return Err(TapeError::CoefficientCap {
                needed: gamma,
                cap: DEFAULT_MAX_GAMMA,
            });
        }
        let coeffs = (0..=gamma)
            .map(|n| {
                let n = n as f64;
                Complex64::from_polar((-0.5 * n * n * sigma * sigma).exp(), -n * mean)
            })
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// Largest stored index Γ.
    #[inline]
    pub fn gamma(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Stored coefficients `c_0..c_Γ`.
    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `c_n` for any integer `n`; zero beyond Γ.
    #[inline]
    pub fn coeff(&self, n: i64) -> Complex64 {
        let idx = n.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            Some(&c) if n >= 0 => c,
            Some(&c) => c.conj(),
            None => ZERO,
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// `p(φ)`; integrates to 1 against `dφ/2π`.
    pub fn evaluate(&self, phi: f64) -> f64 {
        let tail: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| (c * Complex64::from_polar(1.0, n as f64 * phi)).re)
            .sum();
        1.0 + 2.0 * tail
    }

    /// Density values on the uniform grid `φ_j = 2πj/points`.
    ///
    /// `points` must exceed `2Γ` so the synthesis is exact.
    pub fn sample_grid(&self, points: usize) -> Result<Vec<f64>> {
        let gamma = self.gamma();
        if points <= 2 * gamma {
            return Err(TapeError::InvalidArgument(format!(
                "{points} grid points cannot resolve {gamma} harmonics"
            )));
        }
        let mut buf = vec![ZERO; points];
        buf[0] = ONE;
        for (n, &c) in self.coeffs.iter().enumerate().skip(1) {
            buf[n] = c;
            buf[points - n] = c.conj();
        }
        // The inverse transform computes Σ_n X_n e^{+2πi nj/points}.
        let fft = FftPlanner::new().plan_fft_inverse(points);
        fft.process(&mut buf);
        Ok(buf.into_iter().map(|z| z.re).collect())
    }

    /// Minimum of `p` on a `4Γ`-point grid (at least 64 points).
    pub fn grid_minimum(&self) -> f64 {
        let points = (4 * self.gamma()).max(64) + 1;
        self.sample_grid(points)
            .map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NAN)
    }

    /// Bayesian update with outcome `ξ` of a shot with control `(α, k)`.
    ///
    /// Returns the posterior and the prior-predictive probability `Π_ξ(α, k)`.
    pub fn update(
        &self,
        outcome: Outcome,
        alpha: f64,
        k: u64,
        lambda: f64,
        zeta: f64,
    ) -> Result<(FourierDensity, f64)> {
        self.update_capped(outcome, alpha, k, lambda, zeta, DEFAULT_MAX_GAMMA)
    }

    /// [`update`](Self::update) with an explicit cap on Γ.
    pub fn update_capped(
        &self,
        outcome: Outcome,
        alpha: f64,
        k: u64,
        lambda: f64,
        zeta: f64,
        max_gamma: usize,
    ) -> Result<(FourierDensity, f64)> {
        if k == 0 {
            return Err(TapeError::InvalidArgument("k must be at least 1".into()));
        }
        check_unit("lambda", lambda)?;
        check_unit("zeta", zeta)?;
        let k = k as usize;
        let gamma = self.gamma();
        let new_gamma = gamma + k;
        if new_gamma > max_gamma {
            return Err(TapeError::CoefficientCap {
                needed: new_gamma,
                cap: max_gamma,
            });
        }
        let xi = outcome.sign();
        let a = 0.5 * (1.0 + xi * (1.0 - lambda));
        let b = xi * lambda * zeta * 0.25;
        let up = Complex64::from_polar(b, alpha);
        let down = up.conj();
        let c = &self.coeffs;

        let mut out = vec![ZERO; new_gamma + 1];
        for (o, &cn) in out.iter_mut().zip(c) {
            *o = cn * a;
        }
        // e^{iα} c_{n+k}
        if gamma >= k {
            for (o, &cn) in out.iter_mut().zip(&c[k..]) {
                *o += up * cn;
            }
        }
        // e^{−iα} c_{n−k}: negative indices come from conjugation.
        for n in 0..k.min(new_gamma + 1) {
            let idx = k - n;
            if idx <= gamma {
                out[n] += down * c[idx].conj();
            }
        }
        for (o, &cn) in out[k..].iter_mut().zip(c) {
            *o += down * cn;
        }

        let norm = out[0].re;
        if !(norm > 0.0) {
            return Err(TapeError::ImpossibleOutcome(norm));
        }
        let inv = 1.0 / norm;
        for o in out.iter_mut() {
            *o *= inv;
        }
        out[0] = ONE;
        while out.len() > 1 && out.last().is_some_and(|c| c.norm_sqr() < TAIL_CUTOFF * TAIL_CUTOFF) {
            out.pop();
        }
        Ok((FourierDensity { coeffs: out }, norm))
    }

    /// `c_{−1} = ∫ p e^{iφ} dφ/2π`.
    #[inline]
    pub fn first_moment(&self) -> Complex64 {
        self.coeff(-1)
    }

    /// Circular-mean estimator `arg(c_{−1})` in `[0, 2π)`.
    pub fn estimate(&self) -> Result<f64> {
        let m = self.first_moment();
        if m.norm() == 0.0 {
            return Err(TapeError::EstimateUndefined);
        }
        Ok(m.arg().rem_euclid(TAU))
    }

    /// Sharpness `|c_1|`.
    #[inline]
    pub fn sharpness(&self) -> f64 {
        self.coeff(1).norm()
    }

    /// Holevo variance `|c_1|^{−2} − 1`.
    pub fn holevo_variance(&self) -> Result<f64> {
        let s = self.sharpness();
        if s == 0.0 {
            return Err(TapeError::InfiniteVariance);
        }
        Ok((1.0 / (s * s) - 1.0).max(0.0))
    }

    /// Differential entropy `H = −∫ (dφ/2π) p ln(p/2π)` by the trapezoid rule on
    /// `max(8Γ + 64, 4096)` points.
    pub fn entropy_numeric(&self) -> Result<f64> {
        self.entropy_numeric_with_points((8 * self.gamma() + 64).max(4096))
    }

    /// [`entropy_numeric`](Self::entropy_numeric) on a caller-chosen grid.
    pub fn entropy_numeric_with_points(&self, points: usize) -> Result<f64> {
        let points = points.max(8 * self.gamma() + 64);
        let values = self.sample_grid(points)?;
        let mut acc = 0.0;
        for p in values {
            if p < -1e-9 {
                return Err(TapeError::NumericalDomain(format!(
                    "density is negative ({p:e}) on the quadrature grid"
                )));
            }
            if p > 0.0 {
                acc += p * p.ln();
            }
        }
        Ok(TAU.ln() - acc / points as f64)
    }
}

/// Magnified window representation `(M, φ₀, q)` of a phase density.
///
/// The lab-frame phase is `φ = φ₀ + θ/M` for window coordinate `θ ∈ [0, 2π)`,
/// and the density is taken to vanish outside `[φ₀, φ₀ + 2π/M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    magnification: u64,
    offset: f64,
    density: FourierDensity,
}

impl Default for Contraction {
    fn default() -> Self {
        Contraction::identity(FourierDensity::uniform())
    }
}

impl Contraction {
    /// The trivial window `M = 1`, `φ₀ = 0`.
    pub fn identity(density: FourierDensity) -> Self {
        Contraction {
            magnification: 1,
            offset: 0.0,
            density,
        }
    }

    pub fn new(magnification: u64, offset: f64, density: FourierDensity) -> Result<Self> {
        if magnification == 0 {
            return Err(TapeError::InvalidArgument("magnification must be at least 1".into()));
        }
        if !offset.is_finite() {
            return Err(TapeError::InvalidArgument("offset must be finite".into()));
        }
        Ok(Contraction {
            magnification,
            offset: offset.rem_euclid(TAU),
            density,
        })
    }

    #[inline]
    pub fn magnification(&self) -> u64 {
        self.magnification
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn density(&self) -> &FourierDensity {
        &self.density
    }

    pub fn set_density(&mut self, density: FourierDensity) {
        self.density = density;
    }

    /// Zoom in by an integer factor `m ≥ 2`, re-centering the window on the
    /// current estimate. Harmonics that are not multiples of `m` are dropped.
    pub fn contract(&self, m: u64) -> Result<Contraction> {
        if m < 2 {
            return Err(TapeError::InvalidArgument(format!(
                "contraction factor {m} must be at least 2"
            )));
        }
        let q = &self.density;
        let theta_hat = q.estimate()?;
        let mu = m as usize;
        if q.gamma() < mu {
            return Err(TapeError::Precondition(format!(
                "density has Γ = {} < m = {m} harmonics",
                q.gamma()
            )));
        }
        let new_mag = self
            .magnification
            .checked_mul(m)
            .ok_or_else(|| TapeError::InvalidArgument("magnification overflow".into()))?;
        let shift = m as f64 * theta_hat - PI;
        let coeffs: Vec<Complex64> = (0..=q.gamma() / mu)
            .map(|n| q.coeffs[n * mu] * Complex64::from_polar(1.0, n as f64 * shift))
            .collect();
        let offset = self.offset + theta_hat / self.magnification as f64 - PI / new_mag as f64;
        Ok(Contraction {
            magnification: new_mag,
            offset: offset.rem_euclid(TAU),
            density: FourierDensity::from_coeffs(coeffs)?,
        })
    }

    /// Map window-frame settings `(β, j)` to lab-frame `(α, k)`:
    /// `k = M·j`, `α = β + k·φ₀ (mod 2π)`.
    pub fn lab_settings(&self, beta: f64, j: u64) -> Result<crate::model::ControlSettings> {
        if j == 0 {
            return Err(TapeError::InvalidArgument("j must be at least 1".into()));
        }
        let k = self
            .magnification
            .checked_mul(j)
            .ok_or_else(|| TapeError::InvalidArgument("k overflow".into()))?;
        let kphi = (k as f64 * self.offset).rem_euclid(TAU);
        crate::model::ControlSettings::new(beta + kphi, k)
    }

    /// Lab-frame estimate `φ₀ + arg(c_{−1})/M (mod 2π)`.
    pub fn lab_estimate(&self) -> Result<f64> {
        let theta = self.density.estimate()?;
        Ok((self.offset + theta / self.magnification as f64).rem_euclid(TAU))
    }

    /// Lab-frame density at `φ` (zero outside the window). Values are with
    /// respect to `dφ/2π`.
    pub fn lab_density(&self, phi: f64) -> f64 {
        let m = self.magnification as f64;
        let theta = (phi - self.offset).rem_euclid(TAU) * m;
        if theta >= TAU {
            0.0
        } else {
            m * self.density.evaluate(theta)
        }
    }

    /// Portable JSON form `{"M": .., "phi0": .., "coeffs": [[re, im], ..]}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ContractionRecord::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: ContractionRecord = serde_json::from_str(text)?;
        rec.try_into()
    }
}

/// Serialized shape of a [`Contraction`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionRecord {
    #[serde(rename = "M")]
    pub magnification: u64,
    pub phi0: f64,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&Contraction> for ContractionRecord {
    fn from(c: &Contraction) -> Self {
        ContractionRecord {
            magnification: c.magnification,
            phi0: c.offset,
            coeffs: c.density.coeffs.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<ContractionRecord> for Contraction {
    type Error = TapeError;

    fn try_from(rec: ContractionRecord) -> Result<Self> {
        let coeffs = rec
            .coeffs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Contraction::new(rec.magnification, rec.phi0, FourierDensity::from_coeffs(coeffs)?)
    }
}
