//! Multi-step gain method: compare `k` values by the expected gain of short
//! fixed-`k` measurement sequences of (approximately) equal total time.
//!
//! Indices are 0-based throughout; interval bounds are inclusive.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::resource::{ResourceTable, MAX_STEP_RATIO};
use crate::density::FourierDensity;
use crate::error::{Result, TapeError};
use crate::gain::{optimize_unchecked, AlphaDomain, GainKind};
use crate::model::{check_unit, ControlSettings, NoiseModel, Outcome};

/// Longest lookahead supported by the comparison ladder.
pub const MAX_STEPS: u32 = 5;

/// Behaviour of the multi-element branch of the upward search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchUpVariant {
    /// `compare(n₁, n₂ + 1)` and return `n₁` when it wins.
    #[default]
    AsPrinted,
    /// `compare(n, n₂ + 1)` with the in-interval argmax `n`, returning `n`.
    Corrected,
}

/// Expected gain of `steps` consecutive shots at the table entry `index`.
pub trait StepGain {
    fn gain(&mut self, index: usize, steps: u32) -> Result<f64>;
}

/// Expected gain of `j` shots with the same `k`, re-optimizing α on every
/// branch of the outcome tree.
pub fn multi_step_gain(
    d: &FourierDensity,
    k: u64,
    j: u32,
    kind: GainKind,
    lambda: f64,
    zeta: f64,
    domain: AlphaDomain,
) -> Result<f64> {
    if !(1..=MAX_STEPS).contains(&j) {
        return Err(TapeError::InvalidArgument(format!(
            "number of steps {j} outside 1..={MAX_STEPS}"
        )));
    }
    if k == 0 {
        return Err(TapeError::InvalidArgument("k must be at least 1".into()));
    }
    check_unit("lambda", lambda)?;
    check_unit("zeta", zeta)?;
    lookahead(d, k, j, kind, lambda, zeta, domain)
}

fn lookahead(
    d: &FourierDensity,
    k: u64,
    j: u32,
    kind: GainKind,
    lambda: f64,
    zeta: f64,
    domain: AlphaDomain,
) -> Result<f64> {
    let opt = optimize_unchecked(kind, d, k, lambda, zeta, domain);
    if j == 1 {
        return Ok(opt.gain_star);
    }
    let mut total = opt.gain_star;
    for outcome in Outcome::BOTH {
        match d.update(outcome, opt.alpha_star, k, lambda, zeta) {
            Ok((post, pi)) => total += pi * lookahead(&post, k, j - 1, kind, lambda, zeta, domain)?,
            // A branch that cannot occur carries no weight.
            Err(TapeError::ImpossibleOutcome(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}

/// [`StepGain`] backed by a density and a candidate table, memoized.
pub struct DensityStepGain<'a, P> {
    density: &'a FourierDensity,
    table: &'a ResourceTable,
    kind: GainKind,
    params: P,
    domain: AlphaDomain,
    memo: HashMap<(usize, u32), f64>,
}

impl<'a, P: Fn(u64) -> (f64, f64)> DensityStepGain<'a, P> {
    pub fn new(
        density: &'a FourierDensity,
        table: &'a ResourceTable,
        kind: GainKind,
        params: P,
        domain: AlphaDomain,
    ) -> Self {
        DensityStepGain {
            density,
            table,
            kind,
            params,
            domain,
            memo: HashMap::new(),
        }
    }
}

impl<P: Fn(u64) -> (f64, f64)> StepGain for DensityStepGain<'_, P> {
    fn gain(&mut self, index: usize, steps: u32) -> Result<f64> {
        if let Some(&g) = self.memo.get(&(index, steps)) {
            return Ok(g);
        }
        let k = self.table.k(index);
        let (lambda, zeta) = (self.params)(k);
        let g = multi_step_gain(self.density, k, steps, self.kind, lambda, zeta, self.domain)?;
        self.memo.insert((index, steps), g);
        Ok(g)
    }
}

/// Group consecutive indices whose times stay within a factor 8/7 of the
/// group's first time.
pub fn intervals(times: &[f64]) -> Result<Vec<(usize, usize)>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(TapeError::InvalidArgument("times must be sorted increasing".into()));
    }
    let n_total = times.len();
    let mut out = Vec::new();
    let mut n = 0;
    while n < n_total {
        let m = n;
        n += 1;
        while n < n_total && times[n] / times[m] < 8.0 / 7.0 {
            n += 1;
        }
        out.push((m, n - 1));
    }
    Ok(out)
}

/// Numbers of shots `(j₁, j₂)` at the shorter and longer time so that both
/// sequences take about the same total time.
pub fn compare_steps(ratio: f64) -> Result<(u32, u32)> {
    const LADDER: [(f64, u32, u32); 7] = [
        (8.0 / 7.0, 1, 1),
        (24.0 / 17.0, 4, 3),
        (12.0 / 7.0, 3, 2),
        (20.0 / 9.0, 2, 1),
        (30.0 / 11.0, 5, 2),
        (24.0 / 7.0, 3, 1),
        (MAX_STEP_RATIO, 4, 1),
    ];
    if !(ratio >= 1.0) {
        return Err(TapeError::Precondition(format!(
            "time ratio {ratio} must be at least 1"
        )));
    }
    LADDER
        .iter()
        .find(|(bound, _, _)| ratio < *bound)
        .map(|&(_, j1, j2)| (j1, j2))
        .ok_or_else(|| TapeError::Precondition(format!("time ratio {ratio} is not below 32/7")))
}

/// Return whichever of `n1 < n2` has the larger multi-step gain over
/// sequences of comparable time; ties go to `n2`.
pub fn compare<G: StepGain>(table: &ResourceTable, n1: usize, n2: usize, g: &mut G) -> Result<usize> {
    if n1 >= n2 || n2 >= table.len() {
        return Err(TapeError::Precondition(format!(
            "compare needs n1 < n2 < {}, got ({n1}, {n2})",
            table.len()
        )));
    }
    let (j1, j2) = compare_steps(table.t(n2) / table.t(n1))?;
    let g1 = g.gain(n1, j1)?;
    let g2 = g.gain(n2, j2)?;
    Ok(if g1 > g2 { n1 } else { n2 })
}

/// Best index in the inclusive interval `[n1, n2]`; a singleton defers to
/// [`compare`] with its right neighbour.
pub fn search_interval<G: StepGain>(table: &ResourceTable, n1: usize, n2: usize, g: &mut G) -> Result<usize> {
    if n1 > n2 || n2 >= table.len() {
        return Err(TapeError::Precondition(format!(
            "search_interval needs n1 ≤ n2 < {}, got ({n1}, {n2})",
            table.len()
        )));
    }
    if n1 == n2 {
        if n1 == table.len() - 1 {
            return Ok(n1);
        }
        return compare(table, n1, n1 + 1, g);
    }
    let mut best = n1;
    let mut max = g.gain(n1, 1)?;
    for m in n1 + 1..=n2 {
        let v = g.gain(m, 1)?;
        if v > max {
            max = v;
            best = m;
        }
    }
    Ok(best)
}

/// Walk the intervals upwards from the one containing `start` until a local
/// optimum is found.
pub fn search_up<G: StepGain>(
    table: &ResourceTable,
    ivs: &[(usize, usize)],
    start: usize,
    g: &mut G,
    variant: SearchUpVariant,
) -> Result<usize> {
    let mut i = ivs
        .iter()
        .position(|&(a, b)| a <= start && start <= b)
        .ok_or_else(|| TapeError::Precondition(format!("index {start} lies in no interval")))?;
    loop {
        let (n1, n2) = ivs[i];
        let n = search_interval(table, n1, n2, g)?;
        if n1 == n2 {
            if n == n1 {
                return Ok(n);
            }
        } else {
            if n < n2 {
                return Ok(n);
            }
            if i == ivs.len() - 1 {
                return Ok(n);
            }
            match variant {
                SearchUpVariant::AsPrinted => {
                    if compare(table, n1, n2 + 1, g)? == n1 {
                        return Ok(n1);
                    }
                }
                SearchUpVariant::Corrected => {
                    if compare(table, n, n2 + 1, g)? == n {
                        return Ok(n);
                    }
                }
            }
        }
        i += 1;
    }
}

/// Multi-step selection over a candidate table with per-`k` noise
/// parameters; returns the table index and the single-shot optimal α there.
pub fn multi_step_choice<P: Fn(u64) -> (f64, f64)>(
    d: &FourierDensity,
    table: &ResourceTable,
    kind: GainKind,
    params: P,
    variant: SearchUpVariant,
    domain: AlphaDomain,
) -> Result<(usize, f64)> {
    if table.is_empty() {
        return Err(TapeError::InvalidArgument("candidate table is empty".into()));
    }
    table.check_multi_step()?;
    let ivs = intervals(table.times())?;
    let mut g = DensityStepGain::new(d, table, kind, &params, domain);
    let n = search_up(table, &ivs, 0, &mut g, variant)?;
    let k = table.k(n);
    let (lambda, zeta) = params(k);
    let opt = optimize_unchecked(kind, d, k, lambda, zeta, domain);
    Ok((n, opt.alpha_star))
}

/// Multi-step gain method: intervals, then an upward search from the first
/// candidate.
pub fn multi_step_select(
    d: &FourierDensity,
    table: &ResourceTable,
    kind: GainKind,
    model: &NoiseModel,
    variant: SearchUpVariant,
) -> Result<ControlSettings> {
    model.validate()?;
    let (n, alpha) = multi_step_choice(d, table, kind, |k| model.params(k), variant, AlphaDomain::Half)?;
    ControlSettings::new(alpha, table.k(n))
}
