//! Kolmogorov-Smirnov tests with the asymptotic p-value.

use crate::error::{Error, Result};

const SERIES_TERMS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    // the alternating series is useless this close to zero, where the
    // survival function is 1 to double precision anyway
    if lambda < 0.2 {
        return 1.0;
    }
    let sum: f64 = (1..=SERIES_TERMS)
        .map(|j| {
            let j = j as f64;
            let sign = if j as u64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * j * j * lambda * lambda).exp()
        })
        .sum();
    (2.0 * sum).clamp(0.0, 1.0)
}

fn p_value(statistic: f64, effective_n: f64) -> f64 {
    let root = effective_n.sqrt();
    kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic)
}

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("KS test needs samples"));
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sided one-sample test of `samples` against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let v = sorted_finite(samples)?;
    let n = v.len() as f64;
    let statistic = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        p_value: p_value(statistic, n),
    })
}

/// Two-sided two-sample test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let (a, b) = (sorted_finite(a)?, sorted_finite(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut statistic: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        statistic = statistic.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic,
        p_value: p_value(statistic, na * nb / (na + nb)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;
    use statrs::function::erf::erf;

    fn normal_cdf(x: f64) -> f64 {
        0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
    }

    #[test]
    fn kolmogorov_reference_values() {
        // tabulated critical values of the limiting distribution
        assert_abs_diff_eq!(kolmogorov_survival(1.3581), 0.05, epsilon = 1e-4);
        assert_abs_diff_eq!(kolmogorov_survival(1.6276), 0.01, epsilon = 1e-4);
        assert_abs_diff_eq!(kolmogorov_survival(1.2238), 0.10, epsilon = 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(5.0) < 1e-20);
    }

    #[test]
    fn one_sample_statistic_by_hand() {
        // uniform cdf, samples 0.1 0.5 0.9: steps at 1/3, 2/3, 1
        let r = ks_one_sample(&[0.9, 0.1, 0.5], |x| x).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.2333333333333333, epsilon = 1e-12);
    }

    #[test]
    fn one_sample_accepts_and_rejects() {
        let mut rng = stream_rng(1, 0);
        let xs: Vec<f64> = (0..5000).map(|_| rng.sample(StandardNormal)).collect();
        assert!(ks_one_sample(&xs, normal_cdf).unwrap().p_value > 0.01);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.2).collect();
        assert!(ks_one_sample(&shifted, normal_cdf).unwrap().p_value < 1e-6);
    }

    #[test]
    fn two_sample_by_hand_and_identity() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5, 4.5]).unwrap();
        // after 3.0 the first sample is exhausted while the second sits at 2/4
        assert_abs_diff_eq!(r.statistic, 0.5, epsilon = 1e-12);
        let same = ks_two_sample(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
    }

    #[test]
    fn two_sample_power() {
        let mut rng = stream_rng(2, 0);
        let a: Vec<f64> = (0..3000).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..3000).map(|_| rng.sample(StandardNormal)).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
        let wide: Vec<f64> = b.iter().map(|x| 1.5 * x).collect();
        assert!(ks_two_sample(&a, &wide).unwrap().p_value < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ks_one_sample(&[], |x| x).is_err());
        assert!(ks_two_sample(&[1.0], &[f64::NAN]).is_err());
    }
}
