//! Collision statistics around a query neighbourhood.

pub mod acp;
pub mod chi;
pub mod clt;
pub mod covariance;
pub mod kappa;
pub mod ks;
pub mod moments;
pub mod optimality;
pub mod special;
pub mod superiority;

pub use acp::{acp_closed_form, acp_monte_carlo, projection_extremes, AcpEstimate, HashFamily};
pub use chi::{chi_fit, ChiFit};
pub use clt::{clt_coordinate_experiment, CltReport};
pub use covariance::{empirical_hash_covariance, HashCovarianceReport};
pub use kappa::{kappa, KappaSample};
pub use ks::{ks_one_sample, ks_two_sample, KsResult};
pub use moments::{conditional_plane_moments, sample_conditioned_plane, CollisionMoments};
pub use optimality::{centroid_optimality_check, offdiag_identity, OptimalityReport};
pub use special::regularized_incomplete_beta;
pub use superiority::{superiority_monte_carlo, superiority_probability, SuperiorityParams};

/// Equal-width histogram over `[lo, hi]`; the last bin is closed.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize, lo: f64, hi: f64) -> Self {
        let bins = bins.max(1);
        let mut counts = vec![0; bins];
        let width = (hi - lo) / bins as f64;
        for &v in values {
            if !(lo..=hi).contains(&v) {
                continue;
            }
            let i = if width > 0.0 {
                (((v - lo) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[i] += 1;
        }
        Self { lo, hi, counts }
    }

    /// Bins spanning the range of `values`.
    pub fn auto(values: &[f64], bins: usize) -> Self {
        let (lo, hi) = crate::hashing::extremes(values).unwrap_or((0.0, 0.0));
        Self::new(values, bins, lo, hi)
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + i as f64 * width, self.lo + (i + 1) as f64 * width)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}
