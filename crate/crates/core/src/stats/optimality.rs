//! Checks that the normalized neighbourhood centroid is the best plane
//! anchor: it maximises the summed mean height (minimises it for `b < 0`)
//! and, against nearby directions, minimises the total height variance.

use crate::error::{check_dim, Result};
use crate::stats::moments::{check_neighbours, conditional_plane_moments};
use crate::vector::{dot, l2_normalize, normalized_centroid, UnitVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateScore {
    pub mean_sum: f64,
    pub trace: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityReport {
    /// Entry 0 is the centroid, followed by the caller's candidates.
    pub scores: Vec<CandidateScore>,
    pub best_mean_sum: usize,
    pub best_trace: usize,
}

impl OptimalityReport {
    pub fn centroid_wins_mean_sum(&self) -> bool {
        self.best_mean_sum == 0
    }

    pub fn centroid_wins_trace(&self) -> bool {
        self.best_trace == 0
    }
}

/// Scores the centroid and every candidate direction, normalizing each
/// candidate first. Ties go to the centroid.
pub fn centroid_optimality_check<V: AsRef<[f64]>>(
    neighbours: &[UnitVector],
    candidates: &[V],
    b: f64,
) -> Result<OptimalityReport> {
    let dim = neighbours.first().map_or(0, UnitVector::dim);
    check_neighbours(neighbours, dim)?;
    let mut directions = vec![normalized_centroid(neighbours)?];
    for c in candidates {
        check_dim(dim, c.as_ref().len())?;
        directions.push(l2_normalize(c.as_ref())?);
    }
    let scores = directions
        .iter()
        .map(|u| {
            let m = conditional_plane_moments(neighbours, u, b)?;
            Ok(CandidateScore {
                mean_sum: m.mean_sum(),
                trace: m.trace(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pick = |better: &dyn Fn(&CandidateScore, &CandidateScore) -> bool| {
        let mut best = 0;
        for (i, s) in scores.iter().enumerate().skip(1) {
            if better(s, &scores[best]) {
                best = i;
            }
        }
        best
    };
    let best_mean_sum = if b >= 0.0 {
        pick(&|a, b| a.mean_sum > b.mean_sum)
    } else {
        pick(&|a, b| a.mean_sum < b.mean_sum)
    };
    let best_trace = pick(&|a, b| a.trace < b.trace);
    Ok(OptimalityReport {
        scores,
        best_mean_sum,
        best_trace,
    })
}

/// `Σ_{i≠j} (x_i·u)(x_j·u)` by a double loop, and the same quantity as
/// `(Σ x_i·u)² - Σ (x_i·u)²`.
pub fn offdiag_identity(neighbours: &[UnitVector], u: &[f64]) -> Result<(f64, f64)> {
    check_neighbours(neighbours, u.len())?;
    let along: Vec<f64> = neighbours.iter().map(|x| dot(u, x)).collect();
    let mut lhs = 0.0;
    for (i, a) in along.iter().enumerate() {
        for (j, b) in along.iter().enumerate() {
            if i != j {
                lhs += a * b;
            }
        }
    }
    let sum: f64 = along.iter().sum();
    let sum_sq: f64 = along.iter().map(|a| a * a).sum();
    Ok((lhs, sum * sum - sum_sq))
}
