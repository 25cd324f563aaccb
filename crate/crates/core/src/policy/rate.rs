use serde::{Deserialize, Serialize};

use super::resource::ResourceTable;
use super::search::{exceeds, fibonacci_search};
use crate::density::FourierDensity;
use crate::error::{Result, TapeError};
use crate::gain::{gain_upper_bound, optimize_unchecked, AlphaDomain, AlphaOptimum, GainKind};
use crate::model::{check_unit, ControlSettings, NoiseModel};

/// How the gain-rate selector scans the candidate table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSearch {
    #[default]
    Fibonacci,
    BruteForce,
}

/// Tables at least this long are split into three Fibonacci segments.
const SEGMENT_SPLIT_LEN: usize = 48;

/// Outcome of a gain-rate selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateChoice {
    /// Index into the candidate table.
    pub index: usize,
    pub alpha: f64,
    pub gain: f64,
    pub rate: f64,
}

/// Pick the `(α, k)` maximizing expected gain per unit time.
pub fn gain_rate_select(
    d: &FourierDensity,
    table: &ResourceTable,
    kind: GainKind,
    model: &NoiseModel,
    search: KSearch,
) -> Result<ControlSettings> {
    model.validate()?;
    let choice = rate_choice(d, table, kind, |k| model.params(k), search, AlphaDomain::Half)?;
    ControlSettings::new(choice.alpha, table.k(choice.index))
}

/// Gain-rate selection with per-candidate noise parameters.
///
/// `params(k)` returns `(λ, ζ)` for the table's `k` value. Brute force is an
/// exhaustive argmax with rates equal within the tie tolerance going to the
/// smallest index; candidates whose gain upper bound cannot win are skipped.
pub fn rate_choice<P: Fn(u64) -> (f64, f64)>(
    d: &FourierDensity,
    table: &ResourceTable,
    kind: GainKind,
    params: P,
    search: KSearch,
    domain: AlphaDomain,
) -> Result<RateChoice> {
    if table.is_empty() {
        return Err(TapeError::InvalidArgument("candidate table is empty".into()));
    }
    let eval = |i: usize| -> Result<(AlphaOptimum, f64)> {
        let k = table.k(i);
        let (lambda, zeta) = params(k);
        check_unit("lambda", lambda)?;
        check_unit("zeta", zeta)?;
        let opt = optimize_unchecked(kind, d, k, lambda, zeta, domain);
        Ok((opt, opt.gain_star / table.t(i)))
    };
    match search {
        KSearch::BruteForce => brute_force(d, table, kind, &params, eval),
        KSearch::Fibonacci => fibonacci(table.len(), eval),
    }
}

fn brute_force<P, E>(
    d: &FourierDensity,
    table: &ResourceTable,
    kind: GainKind,
    params: &P,
    eval: E,
) -> Result<RateChoice>
where
    P: Fn(u64) -> (f64, f64),
    E: Fn(usize) -> Result<(AlphaOptimum, f64)>,
{
    let bounds: Vec<f64> = (0..table.len())
        .map(|i| {
            let k = table.k(i);
            let (lambda, zeta) = params(k);
            gain_upper_bound(kind, d, k, lambda, zeta) / table.t(i)
        })
        .collect();
    // Most promising first, so the running best prunes early.
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| bounds[b].total_cmp(&bounds[a]).then(a.cmp(&b)));

    let mut best: Option<RateChoice> = None;
    for i in order {
        if let Some(b) = &best {
            if exceeds(b.rate, bounds[i]) {
                break;
            }
            if i > b.index && !exceeds(bounds[i], b.rate) {
                continue;
            }
        }
        let (opt, rate) = eval(i)?;
        let better = match &best {
            None => true,
            Some(b) => exceeds(rate, b.rate) || (i < b.index && !exceeds(b.rate, rate)),
        };
        if better {
            best = Some(RateChoice {
                index: i,
                alpha: opt.alpha_star,
                gain: opt.gain_star,
                rate,
            });
        }
    }
    Ok(best.expect("table is nonempty"))
}

fn fibonacci<E>(len: usize, eval: E) -> Result<RateChoice>
where
    E: Fn(usize) -> Result<(AlphaOptimum, f64)>,
{
    let mut memo: Vec<Option<(AlphaOptimum, f64)>> = vec![None; len];
    let mut failure = None;
    let mut probe = |i: usize| -> f64 {
        if let Some((_, r)) = memo[i] {
            return r;
        }
        match eval(i) {
            Ok(v) => {
                memo[i] = Some(v);
                v.1
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        }
    };

    let segments = if len >= SEGMENT_SPLIT_LEN { 3 } else { 1 };
    let mut best: Option<usize> = None;
    let mut best_rate = f64::NEG_INFINITY;
    for s in 0..segments {
        let lo = s * len / segments;
        let hi = (s + 1) * len / segments - 1;
        let i = fibonacci_search(&mut probe, lo, hi);
        let r = probe(i);
        if best.is_none() || exceeds(r, best_rate) {
            best = Some(i);
            best_rate = r;
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let index = best.expect("at least one segment");
    let (opt, rate) = memo[index].expect("evaluated");
    Ok(RateChoice {
        index,
        alpha: opt.alpha_star,
        gain: opt.gain_star,
        rate,
    })
}
