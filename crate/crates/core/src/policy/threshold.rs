use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc;

use crate::error::{Result, TapeError};

/// Inverse complementary error function on `(0, 2)` by bisection.
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(TapeError::InvalidArgument(format!("erfc⁻¹ needs y in (0, 2), got {y}")));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    // erfc is decreasing and odd around (0, 1).
    let (target, sign) = if y < 1.0 { (y, 1.0) } else { (2.0 - y, -1.0) };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while erfc(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erfc(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(sign * 0.5 * (lo + hi))
}

/// Largest Gaussian standard deviation for which a contraction with `m = 2`
/// loses the true phase with probability below `ε`: `π / (2√2·erfc⁻¹(ε))`.
pub fn contraction_sigma_threshold(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(TapeError::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let x = erfc_inv(epsilon)?;
    Ok(PI / (2.0 * SQRT_2 * x))
}
