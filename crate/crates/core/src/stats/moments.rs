//! Heights `A·w` of a neighbourhood under a plane whose projection onto a
//! fixed direction is pinned: `w | u·w = b ~ N(b·u, I - u·uᵀ)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::vector::{dot, UnitVector, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionMoments {
    /// `b·(u·x_i)`
    pub mean: DVector<f64>,
    /// `x_i·x_j - (x_i·u)(x_j·u)`
    pub cov: DMatrix<f64>,
}

impl CollisionMoments {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn mean_sum(&self) -> f64 {
        self.mean.sum()
    }

    pub fn trace(&self) -> f64 {
        self.cov.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.cov
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn check_neighbours(neighbours: &[UnitVector], dim: usize) -> Result<()> {
    if neighbours.is_empty() {
        return Err(Error::EmptyInput("neighbour set"));
    }
    for x in neighbours {
        check_dim(dim, x.dim())?;
    }
    Ok(())
}

pub fn conditional_plane_moments(
    neighbours: &[UnitVector],
    u: &UnitVector,
    b: f64,
) -> Result<CollisionMoments> {
    check_neighbours(neighbours, u.dim())?;
    if !b.is_finite() {
        return Err(Error::NonFinite(0));
    }
    let k = neighbours.len();
    let along: Vec<f64> = neighbours.iter().map(|x| dot(u, x)).collect();
    let mean = DVector::from_iterator(k, along.iter().map(|t| b * t));
    let mut cov = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = dot(&neighbours[i], &neighbours[j]) - along[i] * along[j];
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(CollisionMoments { mean, cov })
}

/// Exact draw of `w ~ N(0, I)` conditioned on `u·w = b`.
pub fn sample_conditioned_plane<R: Rng + ?Sized>(u: &UnitVector, b: f64, rng: &mut R) -> Vector {
    let g: Vec<f64> = (0..u.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let along = dot(u, &g);
    let w = g
        .iter()
        .zip(u.iter())
        .map(|(gi, ui)| b * ui + gi - along * ui)
        .collect();
    Vector::from_vec_unchecked(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::vector::l2_normalize;
    use approx::assert_abs_diff_eq;

    fn random_unit(d: usize, rng: &mut impl Rng) -> UnitVector {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        l2_normalize(&g).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let u = UnitVector::new(vec![0.6, 0.8, 0.0]).unwrap();
        let m = conditional_plane_moments(std::slice::from_ref(&u), &u, 1.7).unwrap();
        assert_abs_diff_eq!(m.mean[0], 1.7, epsilon = 1e-12);
        assert_abs_diff_eq!(m.cov[(0, 0)], 0.0, epsilon = 1e-12);

        let x = UnitVector::new(vec![-0.8, 0.6, 0.0]).unwrap();
        let m = conditional_plane_moments(&[x], &u, 0.3).unwrap();
        assert_abs_diff_eq!(m.mean[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.cov[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn structural_invariants() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..20 {
            let u = random_unit(16, &mut rng);
            let xs: Vec<UnitVector> = (0..30).map(|_| random_unit(16, &mut rng)).collect();
            let m = conditional_plane_moments(&xs, &u, 0.4).unwrap();
            assert_eq!(m.cov, m.cov.transpose());
            for (i, x) in xs.iter().enumerate() {
                let t = dot(&u, x);
                assert_abs_diff_eq!(m.cov[(i, i)], 1.0 - t * t, epsilon = 1e-12);
                assert!((0.0..=1.0 + 1e-12).contains(&m.cov[(i, i)]));
            }
            assert!(m.min_eigenvalue() > -1e-8);
        }
    }

    #[test]
    fn errors() {
        let u = UnitVector::new(vec![1.0, 0.0]).unwrap();
        let x = UnitVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(conditional_plane_moments(&[x], &u, 0.0).is_err());
        assert!(conditional_plane_moments(&[], &u, 0.0).is_err());
    }

    #[test]
    fn sampler_pins_the_projection() {
        let mut rng = stream_rng(4, 0);
        let u = random_unit(32, &mut rng);
        let d = 32;
        let n = 50_000;
        let mut second = vec![0.0; d * d];
        for _ in 0..n {
            let w = sample_conditioned_plane(&u, -0.7, &mut rng);
            assert_abs_diff_eq!(dot(&u, &w), -0.7, epsilon = 1e-12);
            let r: Vec<f64> = w
                .iter()
                .zip(u.iter())
                .map(|(wi, ui)| wi + 0.7 * ui)
                .collect();
            for i in 0..d {
                for j in 0..d {
                    second[i * d + j] += r[i] * r[j];
                }
            }
        }
        // residual covariance should be I - uuᵀ; entry SE is about 1/√n
        let tol = 5.0 * (2.0 / n as f64).sqrt();
        for i in 0..d {
            for j in 0..d {
                let expected = if i == j { 1.0 } else { 0.0 } - u[i] * u[j];
                assert_abs_diff_eq!(second[i * d + j] / n as f64, expected, epsilon = tol);
            }
        }
    }
}
