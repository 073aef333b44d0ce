use serde::Serialize;

use super::StatsError;

/// `y = a * n^(-b)` fitted by least squares on `ln y` against `ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    /// The log values were all equal; `b` is 0 and `r_squared` is reported as 0.
    pub zero_variance: bool,
}

/// Fits per-block values, where `ys[i]` belongs to block `i + 1`.
pub fn fit_power_law(ys: &[f64]) -> Result<PowerLawFit, StatsError> {
    if ys.len() < 3 {
        return Err(StatsError::InsufficientData { needed: 3, got: ys.len() });
    }
    if let Some(y) = ys.iter().find(|y| !(**y > 0.0 && y.is_finite())) {
        return Err(StatsError::Domain(format!("power law needs positive values, got {y}")));
    }
    let n = ys.len() as f64;
    let lx: Vec<f64> = (1..=ys.len()).map(|i| (i as f64).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if syy <= f64::EPSILON * my.abs().max(1.0) * n {
        return Ok(PowerLawFit { a: my.exp(), b: 0.0, r_squared: 0.0, zero_variance: true });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerLawFit { a: intercept.exp(), b: -slope, r_squared: 1.0 - ss_res / syy, zero_variance: false })
}
