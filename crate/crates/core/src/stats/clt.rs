//! Coordinate distributions of true and estimated neighbourhood centroids,
//! measured in a frame centred on each query.

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::data::brute_force_knn;
use crate::error::{check_dim, Error, Result};
use crate::matrix::DataMatrix;
use crate::rng::{stream_rng, streams};
use crate::stats::ks::{ks_two_sample, KsResult};

#[derive(Clone, Debug, PartialEq)]
pub struct CltQuery {
    /// Coordinate 0 of `c - q`, `ĉ - q` and `ĉ - c`.
    pub c_minus_q: f64,
    pub c_hat_minus_q: f64,
    pub c_hat_minus_c: f64,
    /// Largest distance from `q` within the true and the sampled sets.
    pub r_true: f64,
    pub r_sampled: f64,
    /// `‖c - ĉ‖ > ‖c - q‖`
    pub violation: bool,
}

impl CltQuery {
    pub fn scaled_c_minus_q(&self) -> f64 {
        self.r_sampled / self.r_true * self.c_minus_q
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CltReport {
    pub per_query: Vec<CltQuery>,
    /// `(r_sampled / r_true)(c - q)` against `ĉ - q`, coordinate 0.
    pub ratio_scaling: KsResult,
    pub violations: usize,
}

impl CltReport {
    pub fn variance_c_minus_q(&self) -> f64 {
        variance(self.per_query.iter().map(|r| r.c_minus_q))
    }

    pub fn variance_c_hat_minus_q(&self) -> f64 {
        variance(self.per_query.iter().map(|r| r.c_hat_minus_q))
    }

    pub fn variance_c_hat_minus_c(&self) -> f64 {
        variance(self.per_query.iter().map(|r| r.c_hat_minus_c))
    }
}

pub(crate) fn variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n;
    values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// For every query: `c` is the centroid of its `k` nearest neighbours and
/// `ĉ` the centroid of `k` points drawn uniformly from its `r` nearest.
pub fn clt_coordinate_experiment(
    data: &DataMatrix,
    queries: &DataMatrix,
    k: usize,
    r: usize,
    seed: u64,
) -> Result<CltReport> {
    check_dim(data.dim(), queries.dim())?;
    if k == 0 || r <= k {
        return Err(Error::InvalidParameter(format!(
            "need 0 < k < r, got k = {k}, r = {r}"
        )));
    }
    if r > data.len() {
        return Err(Error::InsufficientData(format!(
            "{r} neighbours requested from {} points",
            data.len()
        )));
    }
    if queries.len() < 2 {
        return Err(Error::InsufficientData("need at least two queries".into()));
    }
    let truth = brute_force_knn(data, queries, r)?;
    let d = data.dim();
    let per_query: Vec<CltQuery> = (0..queries.len())
        .into_par_iter()
        .map(|qi| {
            let mut rng = stream_rng(seed, streams::MONTE_CARLO + qi as u64);
            let q = queries.unit_row(qi);
            let ids = truth.ids(qi);
            let dists = truth.distances(qi);
            let picks = sample(&mut rng, r, k);
            let shifted_mean = |rows: &mut dyn Iterator<Item = usize>| {
                let mut m = vec![0.0; d];
                for id in rows {
                    for ((acc, &x), qx) in
                        m.iter_mut().zip(data.row(ids[id] as usize)).zip(q.iter())
                    {
                        *acc += x as f64 - qx;
                    }
                }
                m.iter_mut().for_each(|v| *v /= k as f64);
                m
            };
            let c = shifted_mean(&mut (0..k));
            let c_hat = shifted_mean(&mut picks.iter());
            let r_true = dists[k - 1];
            let r_sampled = picks.iter().map(|i| dists[i]).fold(0.0, f64::max);
            let gap: f64 = c
                .iter()
                .zip(&c_hat)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let c_norm: f64 = c.iter().map(|a| a * a).sum::<f64>().sqrt();
            CltQuery {
                c_minus_q: c[0],
                c_hat_minus_q: c_hat[0],
                c_hat_minus_c: c_hat[0] - c[0],
                r_true,
                r_sampled,
                violation: gap > c_norm,
            }
        })
        .collect();
    let scaled: Vec<f64> = per_query.iter().map(CltQuery::scaled_c_minus_q).collect();
    let sampled: Vec<f64> = per_query.iter().map(|r| r.c_hat_minus_q).collect();
    let ratio_scaling = ks_two_sample(&scaled, &sampled)?;
    let violations = per_query.iter().filter(|r| r.violation).count();
    Ok(CltReport {
        per_query,
        ratio_scaling,
        violations,
    })
}
