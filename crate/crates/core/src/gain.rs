//! Expected knowledge gains of a single shot and their maximization over the
//! control phase.
//!
//! Both gains are closed-form functions of a handful of Fourier coefficients
//! of the prior:
//!
//! * sharpness gain needs `c_{−1}`, `c_{k−1}` and `c_{−1−k}`;
//! * entropy gain (the expected KL divergence of posterior from prior) needs
//!   `c_{nk}` for `n = 1..⌊Γ/k⌋`.

use std::f64::consts::{LN_2, PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::FourierDensity;
use crate::error::{Result, TapeError};
use crate::model::check_unit;

/// Which expected knowledge gain to maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainKind {
    Sharpness,
    Entropy,
}

/// Search domain for the control phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaDomain {
    /// `[0, π)`.
    #[default]
    Half,
    /// `[0, 2π)`, for strongly asymmetric models where the gains are not
    /// π-periodic.
    Full,
}

impl AlphaDomain {
    fn length(self) -> f64 {
        match self {
            AlphaDomain::Half => PI,
            AlphaDomain::Full => TAU,
        }
    }
}

/// Maximizer of a gain over the control phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaOptimum {
    pub alpha_star: f64,
    pub gain_star: f64,
}

/// Coarse grid spacing is π/64 in both domains.
const GRID_PER_HALF_TURN: usize = 64;
const FOLD: usize = 2 * GRID_PER_HALF_TURN;
const ALPHA_TOL: f64 = 1e-6;

fn check_args(k: u64, lambda: f64, zeta: f64) -> Result<()> {
    if k == 0 {
        return Err(TapeError::InvalidArgument("k must be at least 1".into()));
    }
    check_unit("lambda", lambda)?;
    check_unit("zeta", zeta)
}

/// Expected sharpness gain `Σ_ξ Π_ξ (S[p_ξ] − S[p])`.
pub fn sharpness_gain(d: &FourierDensity, alpha: f64, k: u64, lambda: f64, zeta: f64) -> Result<f64> {
    check_args(k, lambda, zeta)?;
    Ok(SharpnessObjective::new(d, k, lambda, zeta).eval(alpha))
}

/// Expected differential-entropy gain `Σ_ξ Π_ξ (H[p] − H[p_ξ])` in nats.
pub fn entropy_gain(d: &FourierDensity, alpha: f64, k: u64, lambda: f64, zeta: f64) -> Result<f64> {
    check_args(k, lambda, zeta)?;
    Ok(EntropyObjective::new(d, k, lambda, zeta).eval(alpha))
}

pub fn gain(kind: GainKind, d: &FourierDensity, alpha: f64, k: u64, lambda: f64, zeta: f64) -> Result<f64> {
    match kind {
        GainKind::Sharpness => sharpness_gain(d, alpha, k, lambda, zeta),
        GainKind::Entropy => entropy_gain(d, alpha, k, lambda, zeta),
    }
}

/// Maximize a gain over α on the chosen domain.
///
/// A 64-points-per-π grid brackets the optimum, which is then refined by
/// golden-section search to `1e−6` in α. Flat objectives resolve to the
/// smallest grid α.
pub fn maximize_over_alpha(
    kind: GainKind,
    d: &FourierDensity,
    k: u64,
    lambda: f64,
    zeta: f64,
    domain: AlphaDomain,
) -> Result<AlphaOptimum> {
    check_args(k, lambda, zeta)?;
    Ok(optimize_unchecked(kind, d, k, lambda, zeta, domain))
}

pub(crate) fn optimize_unchecked(
    kind: GainKind,
    d: &FourierDensity,
    k: u64,
    lambda: f64,
    zeta: f64,
    domain: AlphaDomain,
) -> AlphaOptimum {
    // For λ = 1 both gains are π-periodic so the half domain wraps.
    let wrap = domain == AlphaDomain::Full || lambda == 1.0;
    match kind {
        GainKind::Sharpness => {
            let obj = SharpnessObjective::new(d, k, lambda, zeta);
            if obj.is_flat() {
                return AlphaOptimum {
                    alpha_star: 0.0,
                    gain_star: obj.eval(0.0),
                };
            }
            let tw = twiddles();
            let values: Vec<f64> = (0..grid_len(domain)).map(|l| obj.eval_at(tw[l])).collect();
            refine(|a| obj.eval(a), &values, domain, wrap)
        }
        GainKind::Entropy => {
            let obj = EntropyObjective::new(d, k, lambda, zeta);
            if obj.is_flat() {
                return AlphaOptimum {
                    alpha_star: 0.0,
                    gain_star: obj.eval(0.0),
                };
            }
            let values = obj.eval_grid(domain);
            refine(|a| obj.eval(a), &values, domain, wrap)
        }
    }
}

/// Upper bound on the α-maximized gain, used to prune exhaustive k searches.
pub(crate) fn gain_upper_bound(kind: GainKind, d: &FourierDensity, k: u64, lambda: f64, zeta: f64) -> f64 {
    if lambda == 0.0 || zeta == 0.0 {
        return 0.0;
    }
    match kind {
        // |u₊ + b| + |u₋ − b| ≤ |c_{−1}| + 2|b|, and no posterior is sharper than 1.
        GainKind::Sharpness => {
            let split = 0.5
                * lambda
                * zeta
                * (d.coeff(k as i64 - 1).norm_sqr().sqrt() + d.coeff(k as i64 + 1).norm_sqr().sqrt());
            split.min(1.0 - d.sharpness()).max(0.0)
        }
        // Bound each α-dependent part of the closed form separately.
        GainKind::Entropy => {
            let k = k as usize;
            let n_max = d.gamma() / k;
            let series = EntropySeries::new(lambda, zeta, n_max);
            let c = d.coeffs();
            let tail: f64 = series
                .weights
                .iter()
                .enumerate()
                .map(|(i, w)| w.abs() * c[(i + 1) * k].norm_sqr().sqrt())
                .sum();
            let centre = 0.5 * (2.0 - lambda);
            let reach = 0.5 * lambda * zeta * d.coeff(k as i64).norm();
            let p = 0.5f64.clamp(centre - reach, centre + reach);
            let h = -(xlnx(p) + xlnx(1.0 - p));
            // Slack covers rounding in the closed form.
            (series.constant + tail + h + 1e-12).min(LN_2)
        }
    }
}

fn grid_points(domain: AlphaDomain) -> Vec<f64> {
    let n = grid_len(domain);
    let step = PI / GRID_PER_HALF_TURN as f64;
    (0..n).map(|l| l as f64 * step).collect()
}

fn grid_len(domain: AlphaDomain) -> usize {
    match domain {
        AlphaDomain::Half => GRID_PER_HALF_TURN,
        AlphaDomain::Full => 2 * GRID_PER_HALF_TURN,
    }
}

fn refine<F: Fn(f64) -> f64>(f: F, values: &[f64], domain: AlphaDomain, wrap: bool) -> AlphaOptimum {
    let step = PI / GRID_PER_HALF_TURN as f64;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let grid_alpha = best as f64 * step;
    let grid_value = values[best];

    let span = domain.length();
    let (mut lo, mut hi) = (grid_alpha - step, grid_alpha + step);
    if !wrap {
        lo = lo.max(0.0);
        hi = hi.min(span);
    }
    let (x, fx) = golden_max(&f, lo, hi, ALPHA_TOL);
    if fx > grid_value + 1e-14 * grid_value.abs().max(1.0) {
        let mut alpha = x.rem_euclid(span);
        if alpha >= span {
            alpha = 0.0;
        }
        AlphaOptimum {
            alpha_star: alpha,
            gain_star: fx,
        }
    } else {
        AlphaOptimum {
            alpha_star: grid_alpha,
            gain_star: grid_value,
        }
    }
}

/// Golden-section maximization on `[lo, hi]` until the bracket is below `tol`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `Σ_ξ |½(1 + ξ(1−λ)) c_{−1} + ξ(λζ/4)(e^{iα} c_{k−1} + e^{−iα} c_{−1−k})| − |c_{−1}|`
struct SharpnessObjective {
    u_plus: Complex64,
    u_minus: Complex64,
    up: Complex64,
    down: Complex64,
    base: f64,
    trivial: bool,
}

impl SharpnessObjective {
    fn new(d: &FourierDensity, k: u64, lambda: f64, zeta: f64) -> Self {
        let c = d.first_moment();
        let w = 0.25 * lambda * zeta;
        SharpnessObjective {
            u_plus: c * (0.5 * (2.0 - lambda)),
            u_minus: c * (0.5 * lambda),
            up: d.coeff(k as i64 - 1) * w,
            down: d.coeff(-1 - k as i64) * w,
            base: c.norm(),
            trivial: lambda == 0.0 || zeta == 0.0,
        }
    }

    fn is_flat(&self) -> bool {
        self.trivial || (self.up.norm_sqr() == 0.0 && self.down.norm_sqr() == 0.0)
    }

    #[inline]
    fn eval(&self, alpha: f64) -> f64 {
        let (s, c) = alpha.sin_cos();
        self.eval_at(Complex64::new(c, s))
    }

    /// Gain at `z = e^{iα}`.
    #[inline]
    fn eval_at(&self, z: Complex64) -> f64 {
        if self.trivial {
            return 0.0;
        }
        let b = self.up * z + self.down * z.conj();
        (self.u_plus + b).norm_sqr().sqrt() + (self.u_minus - b).norm_sqr().sqrt() - self.base
    }
}

/// Closed-form entropy gain, prepared for repeated evaluation in α.
///
/// `ΔH(α) = C(λ, ζ) + Re Σ_{n≥1} D_n e^{inα} c_{nk} − Σ_ξ Π_ξ ln Π_ξ`, where
/// `D_{2m} = A_m` and `D_{2m−1} = B_m`.
struct EntropyObjective {
    constant: f64,
    /// `D_n c_{nk}` for `n = 1..`.
    terms: Vec<Complex64>,
    ck: Complex64,
    lambda: f64,
    lz_half: f64,
    trivial: bool,
}

impl EntropyObjective {
    fn new(d: &FourierDensity, k: u64, lambda: f64, zeta: f64) -> Self {
        let trivial = lambda == 0.0 || zeta == 0.0;
        let k = k as usize;
        let n_max = if trivial { 0 } else { d.gamma() / k };
        let series = EntropySeries::new(lambda, zeta, n_max);
        let c = d.coeffs();
        let terms = series
            .weights
            .iter()
            .enumerate()
            .map(|(i, &w)| c[(i + 1) * k] * w)
            .collect();
        EntropyObjective {
            constant: series.constant,
            terms,
            ck: d.coeff(k as i64),
            lambda,
            lz_half: 0.5 * lambda * zeta,
            trivial,
        }
    }

    fn is_flat(&self) -> bool {
        self.trivial || self.terms.is_empty()
    }

    #[inline]
    fn outcome_term(&self, alpha: f64) -> f64 {
        let r = (self.ck * Complex64::from_polar(1.0, alpha)).re;
        let plus = 0.5 * (2.0 - self.lambda) + self.lz_half * r;
        let minus = 0.5 * self.lambda - self.lz_half * r;
        -(xlnx(plus) + xlnx(minus))
    }

    fn eval(&self, alpha: f64) -> f64 {
        if self.trivial {
            return 0.0;
        }
        let z = Complex64::from_polar(1.0, alpha);
        let mut acc = Complex64::new(0.0, 0.0);
        for &t in self.terms.iter().rev() {
            acc = acc * z + t;
        }
        let series = (acc * z).re;
        self.constant + series + self.outcome_term(alpha)
    }

    /// Values on the coarse grid `α_l = lπ/64`.
    fn eval_grid(&self, domain: AlphaDomain) -> Vec<f64> {
        let grid = grid_points(domain);
        if self.terms.len() <= FOLD {
            return grid.iter().map(|&a| self.eval(a)).collect();
        }
        // e^{inα_l} is periodic in n with period 128, so fold the series first.
        let mut folded = [Complex64::new(0.0, 0.0); FOLD];
        for (i, &t) in self.terms.iter().enumerate() {
            folded[(i + 1) % FOLD] += t;
        }
        let tw = twiddles();
        grid.iter()
            .enumerate()
            .map(|(l, &a)| {
                let series: f64 = folded
                    .iter()
                    .enumerate()
                    .map(|(r, f)| (f * tw[(l * r) % FOLD]).re)
                    .sum();
                self.constant + series + self.outcome_term(a)
            })
            .collect()
    }
}

fn twiddles() -> &'static [Complex64; FOLD] {
    static TABLE: OnceLock<[Complex64; FOLD]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [Complex64::new(0.0, 0.0); FOLD];
        for (r, v) in t.iter_mut().enumerate() {
            *v = Complex64::from_polar(1.0, TAU * r as f64 / FOLD as f64);
        }
        t
    })
}

#[inline]
fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// α-independent constant and series weights of the closed-form entropy gain.
#[derive(Debug, Clone)]
pub(crate) struct EntropySeries {
    pub constant: f64,
    /// `weights[n − 1] = D_n`.
    pub weights: Vec<f64>,
}

impl EntropySeries {
    pub fn new(lambda: f64, zeta: f64, n_max: usize) -> Self {
        if lambda == 0.0 || zeta == 0.0 {
            return EntropySeries {
                constant: 0.0,
                weights: vec![0.0; n_max],
            };
        }
        let mut weights = vec![0.0; n_max];
        if lambda == 1.0 {
            let (g0, g1) = g_pair(zeta);
            let r2 = (zeta / g1).powi(2);
            let mut pow = 1.0;
            for m in 1..=n_max / 2 {
                pow *= r2;
                weights[2 * m - 1] = g_coeff(g0, m, pow);
            }
            return EntropySeries {
                constant: -2.0 * LN_2 + f_fn(zeta),
                weights,
            };
        }

        let delta = lambda * zeta / (2.0 - lambda);
        let (g0z, g1z) = g_pair(zeta);
        let (g0d, g1d) = g_pair(delta);
        let r2z = (zeta / g1z).powi(2);
        let r2d = (delta / g1d).powi(2);
        let wl = 1.0 - 0.5 * lambda;
        let wr = 0.5 * lambda;

        let constant = -2.0 * LN_2
            + xlnx(lambda) * 0.5
            + wl * (2.0 - lambda).ln()
            + wl * f_fn(delta)
            + wr * f_fn(zeta);

        // A_m at n = 2m, B_m at n = 2m − 1.
        let (mut pz, mut pd) = (1.0, 1.0);
        for m in 1..=(n_max + 1) / 2 {
            // B_m uses (x/g₁)^{2(m−1)}; pz, pd hold that power here.
            let b = if m == 1 {
                0.5 * lambda * zeta
                    * (((2.0 - lambda) / lambda).ln() + l_fn(g1d) - l_fn(g1z))
            } else {
                0.25 * lambda * zeta * (j_coeff(g0z, g1z, m, pz) - j_coeff(g0d, g1d, m, pd))
            };
            weights[2 * m - 2] = b;
            pz *= r2z;
            pd *= r2d;
            if 2 * m <= n_max {
                weights[2 * m - 1] = wl * g_coeff(g0d, m, pd) + wr * g_coeff(g0z, m, pz);
            }
        }
        EntropySeries { constant, weights }
    }
}

/// `(g₀(x), g₁(x)) = (√(1 − x²), 1 + √(1 − x²))`
#[inline]
fn g_pair(x: f64) -> (f64, f64) {
    let g0 = if x >= 1.0 { 0.0 } else { (1.0 - x * x).sqrt() };
    (g0, 1.0 + g0)
}

/// `F(x) = x²/g₁ + ln g₁`
fn f_fn(x: f64) -> f64 {
    let (_, g1) = g_pair(x);
    x * x / g1 + g1.ln()
}

/// `L(x) = 1/g₁ + ln g₁`
fn l_fn(g1: f64) -> f64 {
    1.0 / g1 + g1.ln()
}

/// `G(x, m)` given `g₀(x)` and `(x/g₁)^{2m}`.
#[inline]
fn g_coeff(g0: f64, m: usize, pow: f64) -> f64 {
    let m = m as f64;
    (1.0 + 2.0 * m * g0) / (m * (4.0 * m * m - 1.0)) * pow
}

/// `J(x, m)` for `m > 1` given `g₀`, `g₁` and `(x/g₁)^{2(m−1)}`.
#[inline]
fn j_coeff(g0: f64, g1: f64, m: usize, pow: f64) -> f64 {
    let m = m as f64;
    (1.0 + (2.0 * m - 1.0) * g0) / ((m - 1.0) * m * (2.0 * m - 1.0) * g1) * pow
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Outcome;

    fn cos_harmonic(n: usize, amp: f64) -> FourierDensity {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[0] = Complex64::new(1.0, 0.0);
        c[n] = Complex64::new(amp, 0.0);
        FourierDensity::from_coeffs(c).unwrap()
    }

    #[test]
    fn sharpness_gain_uniform() {
        let u = FourierDensity::uniform();
        for &a in &[0.0, 0.3, 2.9] {
            assert!((sharpness_gain(&u, a, 1, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
            assert_eq!(sharpness_gain(&u, a, 2, 1.0, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn four_peak_prior_has_no_sharpness_gain_at_even_k() {
        let d = cos_harmonic(4, 0.5);
        for k in [2, 4] {
            for &a in &[0.0, 1.0, 2.5] {
                assert!(sharpness_gain(&d, a, k, 1.0, 1.0).unwrap().abs() < 1e-15);
            }
        }
        assert!(sharpness_gain(&d, 0.0, 3, 1.0, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn gains_vanish_without_information() {
        let d = FourierDensity::wrapped_normal(1.0, 0.4).unwrap();
        for k in 1..6 {
            for &(l, z) in &[(0.0, 0.7), (0.6, 0.0), (0.0, 0.0)] {
                assert_eq!(sharpness_gain(&d, 0.4, k, l, z).unwrap(), 0.0);
                assert_eq!(entropy_gain(&d, 0.4, k, l, z).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn entropy_gain_uniform_prior() {
        let u = FourierDensity::uniform();
        for k in [1, 2, 7] {
            for &a in &[0.0, 1.3] {
                let g = entropy_gain(&u, a, k, 1.0, 1.0).unwrap();
                assert!((g - (1.0 - LN_2)).abs() < 1e-12, "{g}");
            }
        }
    }

    #[test]
    fn noise_free_entropy_reduction() {
        let d = FourierDensity::wrapped_normal(0.8, 0.35).unwrap();
        let k = 2u64;
        let alpha = 0.9;
        let mut series = 0.0;
        let mut m = 1;
        while 2 * m * k as usize <= d.gamma() {
            let mf = m as f64;
            series += (Complex64::from_polar(1.0, 2.0 * mf * alpha) * d.coeff(2 * m as i64 * k as i64)).re
                / (mf * (4.0 * mf * mf - 1.0));
            m += 1;
        }
        let pp = crate::model::posterior_outcome_prob(&d, Outcome::Plus, alpha, k, 1.0, 1.0).unwrap();
        let pm = 1.0 - pp;
        let expected = -2.0 * LN_2 + 1.0 + series - pp * pp.ln() - pm * pm.ln();
        let got = entropy_gain(&d, alpha, k, 1.0, 1.0).unwrap();
        assert!((got - expected).abs() < 1e-13);
    }

    #[test]
    fn lambda_one_branch_is_continuous() {
        let d = FourierDensity::wrapped_normal(2.0, 0.3).unwrap();
        let exact = entropy_gain(&d, 0.7, 3, 1.0, 0.6).unwrap();
        let near = entropy_gain(&d, 0.7, 3, 1.0 - 1e-9, 0.6).unwrap();
        assert!((exact - near).abs() < 1e-7);
        let exact = entropy_gain(&d, 0.7, 1, 0.8, 1.0).unwrap();
        let near = entropy_gain(&d, 0.7, 1, 0.8, 1.0 - 1e-12).unwrap();
        assert!((exact - near).abs() < 1e-5);
    }

    #[test]
    fn alpha_optimum_on_flat_objectives() {
        let u = FourierDensity::uniform();
        let s = maximize_over_alpha(GainKind::Sharpness, &u, 1, 1.0, 1.0, AlphaDomain::Half).unwrap();
        assert_eq!(s.alpha_star, 0.0);
        assert!((s.gain_star - 0.5).abs() < 1e-15);
        let e = maximize_over_alpha(GainKind::Entropy, &u, 4, 1.0, 1.0, AlphaDomain::Half).unwrap();
        assert_eq!(e.alpha_star, 0.0);
        assert!((e.gain_star - (1.0 - LN_2)).abs() < 1e-12);
    }

    #[test]
    fn alpha_optimum_matches_dense_grid() {
        let d = cos_harmonic(1, 0.5);
        let opt = maximize_over_alpha(GainKind::Sharpness, &d, 1, 1.0, 1.0, AlphaDomain::Half).unwrap();
        let brute = (0..100_000)
            .map(|i| sharpness_gain(&d, PI * i as f64 / 100_000.0, 1, 1.0, 1.0).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(opt.gain_star >= brute - 1e-9, "{} vs {brute}", opt.gain_star);
        let at = sharpness_gain(&d, opt.alpha_star, 1, 1.0, 1.0).unwrap();
        assert!((at - opt.gain_star).abs() < 1e-15);
        assert!((0.0..PI).contains(&opt.alpha_star));
    }

    #[test]
    fn entropy_grid_fold_matches_direct_evaluation() {
        let mut d = FourierDensity::wrapped_normal(1.1, 0.004).unwrap();
        d = d.update(Outcome::Plus, 0.2, 3, 0.9, 0.8).unwrap().0;
        let obj = EntropyObjective::new(&d, 1, 0.9, 0.8);
        assert!(obj.terms.len() > FOLD);
        let folded = obj.eval_grid(AlphaDomain::Full);
        for (l, v) in folded.iter().enumerate() {
            let direct = obj.eval(l as f64 * PI / 64.0);
            assert!((v - direct).abs() < 1e-10, "{l}: {v} vs {direct}");
        }
    }

    #[test]
    fn sharpness_bound_holds() {
        let mut d = FourierDensity::wrapped_normal(0.3, 0.2).unwrap();
        d = d.update(Outcome::Minus, 1.0, 5, 0.9, 0.95).unwrap().0;
        for k in 1..40 {
            let g = maximize_over_alpha(GainKind::Sharpness, &d, k, 0.9, 0.95, AlphaDomain::Full)
                .unwrap()
                .gain_star;
            assert!(g <= gain_upper_bound(GainKind::Sharpness, &d, k, 0.9, 0.95) + 1e-15);
        }
    }
}
