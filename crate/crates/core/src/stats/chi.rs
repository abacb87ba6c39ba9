//! Scaled chi distribution `σ·χ_m`, fitted by matching the sample mean.

use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::stats::ks::ks_one_sample;

pub const MIN_SAMPLES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiFit {
    pub sigma: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
}

/// `E[χ_m] = √2 Γ((m+1)/2) / Γ(m/2)`
pub fn chi_mean(m: f64) -> f64 {
    std::f64::consts::SQRT_2 * (ln_gamma((m + 1.0) / 2.0) - ln_gamma(m / 2.0)).exp()
}

/// CDF of `sigma·χ_m` at `x`.
pub fn scaled_chi_cdf(x: f64, sigma: f64, m: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(m / 2.0, x * x / (2.0 * sigma * sigma))
    }
}

pub fn chi_fit(distances: &[f64], m: usize) -> Result<ChiFit> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "degrees of freedom must be positive".into(),
        ));
    }
    if distances.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "chi fit needs at least {MIN_SAMPLES} samples, got {}",
            distances.len()
        )));
    }
    if let Some(i) = distances.iter().position(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "sample {i} is not a positive distance: {}",
            distances[i]
        )));
    }
    let m = m as f64;
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    let sigma = mean / chi_mean(m);
    let ks = ks_one_sample(distances, |x| scaled_chi_cdf(x, sigma, m))?;
    Ok(ChiFit {
        sigma,
        ks_statistic: ks.statistic,
        p_value: ks.p_value,
    })
}
