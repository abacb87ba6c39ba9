//! Average collision probability of a point against a neighbourhood.

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::hashing::{charikar_collision_probability, extremes, sample_hyperplane, sample_offset};
use crate::matrix::DataMatrix;
use crate::stats::moments::check_neighbours;
use crate::vector::{dot, euclidean_distance, UnitVector};

pub fn acp_closed_form(u: &UnitVector, neighbours: &[UnitVector]) -> Result<f64> {
    check_neighbours(neighbours, u.dim())?;
    let total = neighbours
        .iter()
        .map(|x| charikar_collision_probability(euclidean_distance(u, x)?.min(2.0)))
        .sum::<Result<f64>>()?;
    Ok(total / neighbours.len() as f64)
}

#[derive(Clone, Copy, Debug)]
pub enum HashFamily<'a> {
    /// Sign of `w·x`.
    Charikar,
    /// Sign of `w·x - a`, with `a` uniform between the extreme projections
    /// of the whole dataset.
    RandomProjection(&'a DataMatrix),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcpEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub trials: usize,
}

/// Monte-Carlo ACP: per sampled function, the fraction of `neighbours`
/// sharing `u`'s bit, averaged over `trials` functions.
pub fn acp_monte_carlo<R: Rng + ?Sized>(
    u: &[f64],
    neighbours: &[UnitVector],
    family: HashFamily<'_>,
    trials: usize,
    rng: &mut R,
) -> Result<AcpEstimate> {
    check_neighbours(neighbours, u.len())?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    if let HashFamily::RandomProjection(data) = family {
        check_dim(data.dim(), u.len())?;
    }
    let mut projections = Vec::new();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        let w = sample_hyperplane(u.len(), rng)?;
        let offset = match family {
            HashFamily::Charikar => 0.0,
            HashFamily::RandomProjection(data) => {
                projections.clear();
                projections.extend(data.rows().map(|x| dot(&w, x)));
                sample_offset(&projections, rng)?
            }
        };
        let side = dot(&w, u) > offset;
        let hits = neighbours
            .iter()
            .filter(|x| (dot(&w, x) > offset) == side)
            .count();
        let f = hits as f64 / neighbours.len() as f64;
        sum += f;
        sum_sq += f * f;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(AcpEstimate {
        mean,
        standard_error: (var / n).sqrt(),
        trials,
    })
}

/// Smallest and largest projection of the dataset onto each of `planes`
/// Gaussian directions.
pub fn projection_extremes<R: Rng + ?Sized>(
    data: &DataMatrix,
    planes: usize,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    if data.is_empty() {
        return Err(Error::EmptyInput("projection extremes of an empty dataset"));
    }
    (0..planes)
        .map(|_| {
            let w = sample_hyperplane(data.dim(), rng)?;
            let p: Vec<f64> = data.rows().map(|x| dot(&w, x)).collect();
            Ok(extremes(&p).expect("dataset is non-empty"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{brute_force_knn, gen_clustered_sphere, gen_uniform_sphere, split_queries};
    use crate::rng::stream_rng;
    use crate::vector::normalized_centroid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_trivia() {
        let u = UnitVector::new(vec![0.0, 1.0, 0.0]).unwrap();
        let neg = UnitVector::new(vec![0.0, -1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            acp_closed_form(&u, std::slice::from_ref(&u)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(acp_closed_form(&u, &[neg]).unwrap(), 0.0, epsilon = 1e-12);
        assert!(acp_closed_form(&u, &[]).is_err());
    }

    #[test]
    fn closed_form_golden_distance() {
        // a neighbour at distance 0.33: cosine 1 - 0.33²/2
        let t: f64 = 1.0 - 0.33 * 0.33 / 2.0;
        let u = UnitVector::new(vec![1.0, 0.0]).unwrap();
        let x = UnitVector::new(vec![t, (1.0 - t * t).sqrt()]).unwrap();
        assert_abs_diff_eq!(acp_closed_form(&u, &[x]).unwrap(), 0.89, epsilon = 0.005);
    }

    #[test]
    fn monte_carlo_self_is_one() {
        let u = UnitVector::new(vec![0.6, 0.0, 0.8]).unwrap();
        let est = acp_monte_carlo(
            &u,
            std::slice::from_ref(&u),
            HashFamily::Charikar,
            500,
            &mut stream_rng(1, 0),
        )
        .unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.standard_error, 0.0);
    }

    #[test]
    fn monte_carlo_converges_to_closed_form() {
        let data = gen_uniform_sphere(40, 10, 2).unwrap();
        let u = data.unit_row(0);
        let knn: Vec<UnitVector> = (1..40).map(|i| data.unit_row(i)).collect();
        let exact = acp_closed_form(&u, &knn).unwrap();
        let mut errors = Vec::new();
        for (trials, stream) in [(2_000, 1), (200_000, 2)] {
            let est = acp_monte_carlo(
                &u,
                &knn,
                HashFamily::Charikar,
                trials,
                &mut stream_rng(3, stream),
            )
            .unwrap();
            assert!((est.mean - exact).abs() < 3.0 * est.standard_error);
            errors.push(est.standard_error);
        }
        // standard error shrinks like 1/√trials
        assert_abs_diff_eq!(errors[0] / errors[1], 10.0, epsilon = 0.5);
    }

    #[test]
    fn random_projection_family_runs_and_is_bounded() {
        let data = gen_uniform_sphere(2000, 8, 4).unwrap();
        let u = data.unit_row(0);
        let knn: Vec<UnitVector> = (1..11).map(|i| data.unit_row(i)).collect();
        let est = acp_monte_carlo(
            &u,
            &knn,
            HashFamily::RandomProjection(&data),
            300,
            &mut stream_rng(5, 0),
        )
        .unwrap();
        assert!((0.0..=1.0).contains(&est.mean));
        let wrong = gen_uniform_sphere(10, 4, 1).unwrap();
        assert!(acp_monte_carlo(
            &u,
            &knn,
            HashFamily::RandomProjection(&wrong),
            3,
            &mut stream_rng(5, 0)
        )
        .is_err());
    }

    #[test]
    fn centroid_beats_query_on_clustered_data() {
        let cd = gen_clustered_sphere(20_000, 64, 20, 0.15, 6).unwrap();
        let (base, queries) = split_queries(&cd.data, 100, 7).unwrap();
        let truth = brute_force_knn(&base, &queries, 100).unwrap();
        let mut wins = 0;
        for qi in 0..queries.len() {
            let q = queries.unit_row(qi);
            let knn: Vec<UnitVector> = truth
                .ids(qi)
                .iter()
                .map(|&i| base.unit_row(i as usize))
                .collect();
            let c = normalized_centroid(&knn).unwrap();
            if acp_closed_form(&c, &knn).unwrap() >= acp_closed_form(&q, &knn).unwrap() {
                wins += 1;
            }
        }
        assert!(wins >= 99, "centroid won {wins} of 100");
    }

    #[test]
    fn extremes_are_roughly_symmetric() {
        let data = gen_uniform_sphere(5000, 16, 8).unwrap();
        for (lo, hi) in projection_extremes(&data, 20, &mut stream_rng(9, 0)).unwrap() {
            assert!(lo < 0.0 && hi > 0.0);
        }
    }
}
