//! Quality of a centroid estimate relative to the raw query.

use crate::error::{check_dim, Error, Result};
use crate::vector::{euclidean_distance, UnitVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaSample {
    pub m: usize,
    pub kappa: f64,
}

/// `‖⟨c⟩ - ⟨ĉ⟩‖ / ‖⟨c⟩ - q‖`; below 1 the estimate is closer to the true
/// centroid than the query is.
pub fn kappa(q: &UnitVector, centroid: &UnitVector, estimate: &UnitVector) -> Result<f64> {
    check_dim(q.dim(), centroid.dim())?;
    check_dim(q.dim(), estimate.dim())?;
    let denominator = euclidean_distance(centroid, q)?;
    if denominator == 0.0 {
        return Err(Error::DegenerateQuery);
    }
    Ok(euclidean_distance(centroid, estimate)? / denominator)
}
