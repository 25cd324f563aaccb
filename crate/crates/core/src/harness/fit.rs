use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TapeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `Δφ̂ = A·π·N^{−γ}`
    Power,
    /// `Δφ̂ = A·e^{−κt}`
    Exponential,
}

impl FromStr for FitModel {
    type Err = TapeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "power" => Ok(FitModel::Power),
            "exponential" | "exp" => Ok(FitModel::Exponential),
            other => Err(TapeError::InvalidArgument(format!("unknown fit model '{other}'"))),
        }
    }
}

/// Least-squares fit in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub a: f64,
    pub a_stderr: f64,
    /// `γ` for the power law, `κ` for the exponential.
    pub rate: f64,
    pub rate_stderr: f64,
    /// Log-space residuals in input order.
    pub residuals: Vec<f64>,
    pub n_points: usize,
}

struct Line {
    intercept: f64,
    slope: f64,
    intercept_se: f64,
    slope_se: f64,
    residuals: Vec<f64>,
}

fn ols(xs: &[f64], ys: &[f64]) -> Result<Line> {
    let n = xs.len();
    if n < 3 {
        return Err(TapeError::Fit(format!("need at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-300) || !(sxx > 1e-24 * xs.iter().map(|x| x * x).sum::<f64>()) {
        return Err(TapeError::Fit("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (nf - 2.0);
    Ok(Line {
        intercept,
        slope,
        intercept_se: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        slope_se: (s2 / sxx).sqrt(),
        residuals,
    })
}

fn check_positive(points: &[(f64, f64)], need_x: bool) -> Result<()> {
    for &(x, y) in points {
        if !(y > 0.0 && y.is_finite()) || !x.is_finite() || (need_x && !(x > 0.0)) {
            return Err(TapeError::InvalidArgument(format!(
                "fit point ({x}, {y}) is not positive and finite"
            )));
        }
    }
    Ok(())
}

/// Fit `Δφ̂ = A·π·N^{−γ}` to `(N, Δφ̂)` points by regressing `ln(Δφ̂/π)` on `ln N`.
pub fn fit_power(points: &[(f64, f64)]) -> Result<FitResult> {
    check_positive(points, true)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.1 / PI).ln()).collect();
    let line = ols(&xs, &ys)?;
    let a = line.intercept.exp();
    Ok(FitResult {
        model: FitModel::Power,
        a,
        a_stderr: a * line.intercept_se,
        rate: -line.slope,
        rate_stderr: line.slope_se,
        residuals: line.residuals,
        n_points: points.len(),
    })
}

/// Fit `Δφ̂ = A·e^{−κt}` to `(t, Δφ̂)` points by regressing `ln Δφ̂` on `t`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<FitResult> {
    check_positive(points, false)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = ols(&xs, &ys)?;
    let a = line.intercept.exp();
    Ok(FitResult {
        model: FitModel::Exponential,
        a,
        a_stderr: a * line.intercept_se,
        rate: -line.slope,
        rate_stderr: line.slope_se,
        residuals: line.residuals,
        n_points: points.len(),
    })
}

pub fn fit(model: FitModel, points: &[(f64, f64)]) -> Result<FitResult> {
    match model {
        FitModel::Power => fit_power(points),
        FitModel::Exponential => fit_exponential(points),
    }
}

/// Keep points with `min_x ≤ x ≤ max_x`.
pub fn filter_range(points: &[(f64, f64)], min_x: Option<f64>, max_x: Option<f64>) -> Vec<(f64, f64)> {
    points
        .iter()
        .copied()
        .filter(|&(x, _)| min_x.map_or(true, |m| x >= m) && max_x.map_or(true, |m| x <= m))
        .collect()
}
