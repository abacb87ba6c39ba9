//! Empirical covariance of neighbour heights under planes nearly
//! perpendicular to a chosen direction.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::stats::moments::{check_neighbours, sample_conditioned_plane};
use crate::stats::Histogram;
use crate::vector::{dot, UnitVector};

pub const SAMPLING_BUDGET: u64 = 10_000_000;
pub const HISTOGRAM_BINS: usize = 50;

#[derive(Clone, Debug)]
pub struct HashCovarianceReport {
    pub covariance: DMatrix<f64>,
    pub correlation: DMatrix<f64>,
    /// Upper-triangle covariances, row by row.
    pub offdiag: Vec<f64>,
    pub offdiag_mean: f64,
    pub histogram: Histogram,
    /// Candidate planes drawn, accepted or not.
    pub draws: u64,
}

/// Draws Gaussian planes until `num_planes` satisfy `|u·w| < b_tol`, then
/// returns the covariance across planes of the heights `x_i·w`.
///
/// Only the component `u·w` decides acceptance and it is independent of the
/// rest of `w`, so the scalar is rejection-sampled and the orthogonal part
/// drawn once per accepted plane.
pub fn empirical_hash_covariance<R: Rng + ?Sized>(
    neighbours: &[UnitVector],
    u: &UnitVector,
    num_planes: usize,
    b_tol: f64,
    rng: &mut R,
) -> Result<HashCovarianceReport> {
    check_neighbours(neighbours, u.dim())?;
    if num_planes < 2 {
        return Err(Error::InvalidParameter("need at least two planes".into()));
    }
    if b_tol.is_nan() || b_tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {b_tol}"
        )));
    }
    let k = neighbours.len();
    let mut heights = DMatrix::<f64>::zeros(num_planes, k);
    let mut draws = 0u64;
    for p in 0..num_planes {
        let b = loop {
            if draws >= SAMPLING_BUDGET {
                return Err(Error::SamplingBudgetExceeded {
                    budget: SAMPLING_BUDGET,
                    accepted: p,
                });
            }
            draws += 1;
            let t: f64 = rng.sample(StandardNormal);
            if t.abs() < b_tol {
                break t;
            }
        };
        let w = sample_conditioned_plane(u, b, rng);
        for (i, x) in neighbours.iter().enumerate() {
            heights[(p, i)] = dot(&w, x);
        }
    }

    let n = num_planes as f64;
    let means = heights.row_mean();
    for mut row in heights.row_iter_mut() {
        row -= &means;
    }
    let covariance = heights.transpose() * &heights / (n - 1.0);
    let sd: Vec<f64> = (0..k).map(|i| covariance[(i, i)].sqrt()).collect();
    let correlation = DMatrix::from_fn(k, k, |i, j| {
        if sd[i] > 0.0 && sd[j] > 0.0 {
            covariance[(i, j)] / (sd[i] * sd[j])
        } else {
            0.0
        }
    });
    let offdiag: Vec<f64> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .map(|(i, j)| covariance[(i, j)])
        .collect();
    let offdiag_mean = if offdiag.is_empty() {
        0.0
    } else {
        offdiag.iter().sum::<f64>() / offdiag.len() as f64
    };
    let histogram = Histogram::auto(&offdiag, HISTOGRAM_BINS);
    Ok(HashCovarianceReport {
        covariance,
        correlation,
        offdiag,
        offdiag_mean,
        histogram,
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::stats::moments::conditional_plane_moments;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_neighbours_are_fully_correlated() {
        let x = UnitVector::new(vec![0.6, 0.8, 0.0, 0.0]).unwrap();
        let u = UnitVector::new(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let xs = vec![x; 5];
        let r = empirical_hash_covariance(&xs, &u, 200, 0.005, &mut stream_rng(1, 0)).unwrap();
        for v in r.correlation.iter() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
        assert_eq!(r.offdiag.len(), 10);
        assert!(r.draws > 200);
    }

    #[test]
    fn matches_the_model_covariance() {
        let mut rng = stream_rng(2, 0);
        let xs: Vec<UnitVector> = (0..6)
            .map(|_| {
                let g: Vec<f64> = (0..8).map(|_| rng.sample(StandardNormal)).collect();
                crate::vector::l2_normalize(&g).unwrap()
            })
            .collect();
        let u = xs[0].clone();
        let r = empirical_hash_covariance(&xs, &u, 20_000, 0.005, &mut rng).unwrap();
        let model = conditional_plane_moments(&xs, &u, 0.0).unwrap();
        for (a, b) in r.covariance.iter().zip(model.cov.iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 0.05);
        }
    }

    #[test]
    fn errors() {
        let u = UnitVector::new(vec![1.0, 0.0]).unwrap();
        let xs = vec![u.clone()];
        let mut rng = stream_rng(3, 0);
        assert!(empirical_hash_covariance(&xs, &u, 1, 0.1, &mut rng).is_err());
        assert!(empirical_hash_covariance(&xs, &u, 10, 0.0, &mut rng).is_err());
        assert!(matches!(
            empirical_hash_covariance(&xs, &u, 10, 1e-12, &mut rng),
            Err(Error::SamplingBudgetExceeded { .. })
        ));
    }
}
