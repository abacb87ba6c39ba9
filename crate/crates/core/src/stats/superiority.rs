//! Probability that a centroid estimate built from a wider neighbourhood is
//! farther from the true centroid than the query is.

use rand::Rng;
use rand_distr::FisherF;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};
use crate::stats::special::regularized_incomplete_beta;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperiorityParams {
    m: usize,
    r_ratio: f64,
}

impl SuperiorityParams {
    /// `m` is the local intrinsic dimension, `r_ratio` the radius of the
    /// true neighbourhood over the radius of the sampled one.
    pub fn new(m: usize, r_ratio: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "intrinsic dimension must be positive".into(),
            ));
        }
        if !(r_ratio > 0.0 && r_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "radius ratio must lie in (0, 1), got {r_ratio}"
            )));
        }
        Ok(Self { m, r_ratio })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r_ratio(&self) -> f64 {
        self.r_ratio
    }

    /// Threshold the `F(m, m)` ratio has to exceed.
    fn f_threshold(&self) -> f64 {
        1.0 / (1.0 - self.r_ratio)
    }
}

/// `1 - I_{1/(2-r)}(m/2, m/2)`, evaluated as `I_{(1-r)/(2-r)}(m/2, m/2)` so
/// the small tail keeps its relative precision.
pub fn superiority_probability(params: SuperiorityParams) -> f64 {
    let half = params.m as f64 / 2.0;
    let x = (1.0 - params.r_ratio) / (2.0 - params.r_ratio);
    regularized_incomplete_beta(x, half, half).expect("x lies in (0, 1/2)")
}

/// Monte-Carlo estimate of the same probability from `F(m, m)` draws, with
/// its standard error.
pub fn superiority_monte_carlo(
    params: SuperiorityParams,
    draws: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if draws == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let dof = params.m as f64;
    let dist = FisherF::new(dof, dof).expect("positive degrees of freedom");
    let threshold = params.f_threshold();
    const CHUNK: u64 = 1 << 18;
    let chunks = draws.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, streams::MONTE_CARLO + c);
            let n = CHUNK.min(draws - c * CHUNK);
            (0..n).filter(|_| rng.sample(dist) > threshold).count() as u64
        })
        .sum();
    let p = hits as f64 / draws as f64;
    Ok((p, (p * (1.0 - p) / draws as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(m: usize, r: f64) -> f64 {
        superiority_probability(SuperiorityParams::new(m, r).unwrap())
    }

    #[test]
    fn golden_value() {
        assert_abs_diff_eq!(p(20, 0.8), 0.00035, epsilon = 1e-4);
    }

    #[test]
    fn tail_form_matches_direct_form() {
        for (m, r) in [(20, 0.8), (3, 0.3), (50, 0.1)] {
            let half = m as f64 / 2.0;
            let direct = 1.0 - regularized_incomplete_beta(1.0 / (2.0 - r), half, half).unwrap();
            assert_abs_diff_eq!(p(m, r), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn small_ratio_limit() {
        assert_abs_diff_eq!(p(20, 1e-9), 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(p(3, 1e-9), 0.5, epsilon = 1e-8);
    }

    #[test]
    fn decreasing_in_both_arguments() {
        let ratios = [0.05, 0.2, 0.4, 0.6, 0.8, 0.95];
        for m in [1, 2, 5, 20, 100] {
            for w in ratios.windows(2) {
                assert!(p(m, w[1]) < p(m, w[0]));
            }
        }
        for r in ratios {
            for m in 1..60 {
                assert!(p(m + 1, r) < p(m, r), "m = {m}, r = {r}");
            }
        }
    }

    #[test]
    fn monte_carlo_agrees() {
        let params = SuperiorityParams::new(10, 0.6).unwrap();
        let (mc, se) = superiority_monte_carlo(params, 1_000_000, 1).unwrap();
        assert!((mc - superiority_probability(params)).abs() < 3.0 * se);
    }

    #[test]
    fn invalid_params() {
        assert!(SuperiorityParams::new(0, 0.5).is_err());
        assert!(SuperiorityParams::new(3, 0.0).is_err());
        assert!(SuperiorityParams::new(3, 1.0).is_err());
        assert!(SuperiorityParams::new(3, f64::NAN).is_err());
    }
}
