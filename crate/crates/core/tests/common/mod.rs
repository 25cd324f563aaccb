#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tape::gain::GainKind;
use tape::model::Outcome;
use tape::{Contraction, FourierDensity};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A valid density built by applying a few random noisy updates to the
/// uniform prior, optionally followed by noiseless ones.
pub fn random_density<R: Rng>(rng: &mut R, max_shots: usize, max_k: u64) -> FourierDensity {
    let mut d = FourierDensity::uniform();
    let shots = rng.gen_range(0..=max_shots);
    for _ in 0..shots {
        let k = rng.gen_range(1..=max_k);
        let alpha = rng.gen::<f64>() * TAU;
        let (lambda, zeta) = if rng.gen_bool(0.3) {
            (1.0, 1.0)
        } else {
            (rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0))
        };
        let outcome = if rng.gen_bool(0.5) { Outcome::Plus } else { Outcome::Minus };
        if let Ok((post, _)) = d.update(outcome, alpha, k, lambda, zeta) {
            d = post;
        }
    }
    d
}

/// `λ` or `ζ` drawn from the edge values half of the time.
pub fn edge_or_random<R: Rng>(rng: &mut R) -> f64 {
    const EDGES: [f64; 4] = [0.0, 1e-6, 0.5, 1.0];
    if rng.gen_bool(0.5) {
        EDGES[rng.gen_range(0..4)]
    } else {
        rng.gen::<f64>()
    }
}

/// `p(φ_j)` on `points` equispaced nodes by direct summation.
pub fn density_on_grid(d: &FourierDensity, points: usize) -> Vec<f64> {
    let c = d.coeffs();
    (0..points)
        .map(|j| {
            let phi = TAU * j as f64 / points as f64;
            let step = Complex64::from_polar(1.0, phi);
            let mut z = step;
            let mut acc = 0.0;
            for cn in &c[1..] {
                acc += (cn * z).re;
                z *= step;
            }
            1.0 + 2.0 * acc
        })
        .collect()
}

pub fn likelihood(outcome: Outcome, alpha: f64, k: u64, phi: f64, lambda: f64, zeta: f64) -> f64 {
    let xi = outcome.sign();
    0.5 * (1.0 + xi * ((1.0 - lambda) + lambda * zeta * (alpha - k as f64 * phi).cos()))
}

/// `−∫ (dφ/2π) p ln(p/2π)` by the trapezoid rule.
pub fn entropy_of(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    -values
        .iter()
        .map(|&p| if p > 0.0 { p * (p / TAU).ln() } else { 0.0 })
        .sum::<f64>()
        / n
}

/// Expected entropy gain by enumerating both outcomes and integrating the
/// prior and posterior entropies on a fine grid.
pub fn entropy_gain_oracle(d: &FourierDensity, alpha: f64, k: u64, lambda: f64, zeta: f64, points: usize) -> f64 {
    let prior = density_on_grid(d, points);
    let h0 = entropy_of(&prior);
    let mut expected_post = 0.0;
    for outcome in [Outcome::Plus, Outcome::Minus] {
        let joint: Vec<f64> = prior
            .iter()
            .enumerate()
            .map(|(j, p)| p * likelihood(outcome, alpha, k, TAU * j as f64 / points as f64, lambda, zeta))
            .collect();
        let pi = joint.iter().sum::<f64>() / points as f64;
        if pi <= 0.0 {
            continue;
        }
        let post: Vec<f64> = joint.iter().map(|v| v / pi).collect();
        expected_post += pi * entropy_of(&post);
    }
    h0 - expected_post
}

/// Grid size that resolves `d` after a shot with `k` comfortably.
pub fn oracle_points(d: &FourierDensity, k: u64) -> usize {
    let need = 8 * (d.gamma() + k as usize) + 64;
    need.max(1 << 17).next_power_of_two()
}

/// Expected sharpness gain through explicit Bayesian updates.
pub fn sharpness_gain_oracle(d: &FourierDensity, alpha: f64, k: u64, lambda: f64, zeta: f64) -> f64 {
    let s0 = d.sharpness();
    let mut g = 0.0;
    for outcome in [Outcome::Plus, Outcome::Minus] {
        if let Ok((post, pi)) = d.update(outcome, alpha, k, lambda, zeta) {
            g += pi * (post.sharpness() - s0);
        }
    }
    g
}

/// Dense-grid maximum of `f` over `[0, len)`.
pub fn dense_max<F: Fn(f64) -> f64>(f: F, len: f64, points: usize) -> f64 {
    (0..points).map(|i| f(len * i as f64 / points as f64)).fold(f64::NEG_INFINITY, f64::max)
}

pub fn wrap_diff(a: f64, b: f64) -> f64 {
    (a - b + PI).rem_euclid(TAU) - PI
}

/// Strictly increasing up to a random peak, strictly decreasing after it.
pub fn unimodal<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let peak = rng.gen_range(0..len);
    let mut v = vec![0.0; len];
    v[peak] = rng.gen_range(10.0..20.0);
    for i in (0..peak).rev() {
        v[i] = v[i + 1] - rng.gen_range(0.01..1.0);
    }
    for i in peak + 1..len {
        v[i] = v[i - 1] - rng.gen_range(0.01..1.0);
    }
    v
}

pub fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

/// Grid values of the prior, the likelihood-weighted posteriors and the gain
/// of one shot, all without Fourier bookkeeping.
pub struct GridOracle {
    pub points: usize,
    pub kind: GainKind,
    pub k: u64,
    pub lambda: f64,
    pub zeta: f64,
}

impl GridOracle {
    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.points as f64
    }

    pub fn mean(&self, v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / self.points as f64
    }

    pub fn knowledge(&self, p: &[f64]) -> f64 {
        match self.kind {
            GainKind::Entropy => -entropy_of(p),
            GainKind::Sharpness => {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, v) in p.iter().enumerate() {
                    re += v * self.phi(j).cos();
                    im += v * self.phi(j).sin();
                }
                (re * re + im * im).sqrt() / self.points as f64
            }
        }
    }

    pub fn branches(&self, p: &[f64], alpha: f64) -> Vec<(f64, Vec<f64>)> {
        [Outcome::Plus, Outcome::Minus]
            .iter()
            .filter_map(|&o| {
                let joint: Vec<f64> = p
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * likelihood(o, alpha, self.k, self.phi(j), self.lambda, self.zeta))
                    .collect();
                let pi = self.mean(&joint);
                (pi > 0.0).then(|| (pi, joint.iter().map(|v| v / pi).collect()))
            })
            .collect()
    }

    pub fn gain(&self, p: &[f64], alpha: f64) -> f64 {
        let before = self.knowledge(p);
        self.branches(p, alpha).iter().map(|(pi, q)| pi * (self.knowledge(q) - before)).sum()
    }

    /// Dense scan over `[0, π)` followed by golden-section polishing.
    pub fn best_gain(&self, p: &[f64]) -> f64 {
        let n = 360;
        let step = PI / n as f64;
        let vals: Vec<f64> = (0..n).map(|i| self.gain(p, i as f64 * step)).collect();
        let best = argmax(&vals);
        let (mut lo, mut hi) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);
        let g = |a: f64| self.gain(p, a.clamp(0.0, PI));
        let r = 0.618_033_988_749_895;
        let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        let (mut f1, mut f2) = (g(x1), g(x2));
        while hi - lo > 1e-9 {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - r * (hi - lo);
                f1 = g(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + r * (hi - lo);
                f2 = g(x2);
            }
        }
        f1.max(f2).max(vals[best])
    }
}

/// Largest relative deviation between the lab densities of `a` and `b` where
/// `a` is not negligible.
pub fn lab_mismatch(a: &Contraction, b: &Contraction, points: usize) -> f64 {
    let width = TAU / a.magnification() as f64;
    let values: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let phi = a.offset() + width * (i as f64 + 0.5) / points as f64;
            (phi, a.lab_density(phi))
        })
        .collect();
    let peak = values.iter().map(|v| v.1).fold(0.0, f64::max);
    values
        .iter()
        .filter(|(_, p)| *p > 1e-6 * peak)
        .map(|&(phi, p)| ((b.lab_density(phi) - p) / p).abs())
        .fold(0.0, f64::max)
}
