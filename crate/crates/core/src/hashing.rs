//! Binary hyperplane hash families.
//!
//! A [`HyperplaneHash`] maps `x` to 1 iff `w·x > a`. With `a = 0` it is
//! Charikar's sign hash (family H_c); with `a` drawn uniformly between the
//! extreme projections of a point set it is the split used by random
//! projection trees (family H_rp).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::vector::{dot, Vector};

/// Draws `w ~ N(0, I_d)`. The plane is not normalized.
pub fn sample_hyperplane<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vector> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "hyperplane dimension must be at least 2, got {dim}"
        )));
    }
    Ok(Vector::from_vec_unchecked(
        (0..dim).map(|_| rng.sample(StandardNormal)).collect(),
    ))
}

/// Draws `a ~ U[min, max]` over the given projections.
pub fn sample_offset<R: Rng + ?Sized>(projections: &[f64], rng: &mut R) -> Result<f64> {
    let (lo, hi) = extremes(projections).ok_or(Error::EmptyInput("no projections"))?;
    if lo == hi {
        return Ok(lo);
    }
    Ok(rng.random_range(lo..=hi))
}

pub(crate) fn extremes(values: &[f64]) -> Option<(f64, f64)> {
    let first = *values.first()?;
    Some(
        values
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperplaneHash {
    w: Vector,
    offset: f64,
}

impl HyperplaneHash {
    pub fn new(w: Vector, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::InvalidParameter("offset must be finite".into()));
        }
        Ok(Self { w, offset })
    }

    /// Zero-offset hash (family H_c).
    pub fn charikar(w: Vector) -> Self {
        Self { w, offset: 0.0 }
    }

    /// Draws a Charikar hash of dimension `dim`.
    pub fn sample_charikar<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        Ok(Self::charikar(sample_hyperplane(dim, rng)?))
    }

    pub fn plane(&self) -> &Vector {
        &self.w
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    /// Height of `x` above the plane, `w·x`.
    #[inline]
    pub fn project<T: Copy + Into<f64>>(&self, x: &[T]) -> f64 {
        dot(&self.w, x)
    }

    /// Unchecked predicate used on hot paths where dimensions are known to match.
    #[inline]
    pub fn side<T: Copy + Into<f64>>(&self, x: &[T]) -> bool {
        self.project(x) > self.offset
    }

    /// 1 iff `w·x > a`. Ties go to 0.
    pub fn hash_bit<T: Copy + Into<f64>>(&self, x: &[T]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(self.side(x))
    }
}

/// Concatenation of `m >= 1` independent binary hashes.
#[derive(Clone, Debug, PartialEq)]
pub struct CompoundHash {
    bits: Vec<HyperplaneHash>,
}

impl CompoundHash {
    pub fn new(bits: Vec<HyperplaneHash>) -> Result<Self> {
        let first = bits
            .first()
            .ok_or(Error::EmptyInput("compound hash with no bits"))?;
        let dim = first.dim();
        for b in &bits {
            check_dim(dim, b.dim())?;
        }
        Ok(Self { bits })
    }

    pub fn sample_charikar<R: Rng + ?Sized>(dim: usize, m: usize, rng: &mut R) -> Result<Self> {
        let bits = (0..m)
            .map(|_| HyperplaneHash::sample_charikar(dim, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[HyperplaneHash] {
        &self.bits
    }

    pub fn dim(&self) -> usize {
        self.bits[0].dim()
    }

    pub fn code<T: Copy + Into<f64>>(&self, x: &[T]) -> Result<Vec<bool>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.bits.iter().map(|h| h.side(x)).collect())
    }

    /// Collision means the full bit strings are equal.
    pub fn collides<T: Copy + Into<f64>>(&self, x: &[T], y: &[T]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        Ok(self.bits.iter().all(|h| h.side(x) == h.side(y)))
    }
}

/// Collision probability of two unit vectors at Euclidean distance `dist`
/// under H_c: `1 - θ/π` with `cos θ = 1 - dist²/2`.
pub fn charikar_collision_probability(dist: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&dist) {
        return Err(Error::InvalidParameter(format!(
            "distance between unit vectors must lie in [0, 2], got {dist}"
        )));
    }
    let cos = (1.0 - 0.5 * dist * dist).clamp(-1.0, 1.0);
    Ok(1.0 - cos.acos() / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::vector::{euclidean_distance, l2_normalize};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h(w: &[f64], a: f64) -> HyperplaneHash {
        HyperplaneHash::new(Vector::new(w.to_vec()).unwrap(), a).unwrap()
    }

    #[test]
    fn hyperplane_is_deterministic() {
        let a = sample_hyperplane(4, &mut stream_rng(3, 0)).unwrap();
        let b = sample_hyperplane(4, &mut stream_rng(3, 0)).unwrap();
        assert_eq!(a, b);
        assert!(sample_hyperplane(1, &mut stream_rng(3, 0)).is_err());
    }

    #[test]
    fn hyperplane_coordinates_are_standard_normal() {
        let mut rng = stream_rng(42, 0);
        let n = 100_000;
        let d = 8;
        let mut sum = vec![0.0; d];
        let mut sq = vec![0.0; d];
        for _ in 0..n {
            let w = sample_hyperplane(d, &mut rng).unwrap();
            for j in 0..d {
                sum[j] += w[j];
                sq[j] += w[j] * w[j];
            }
        }
        for j in 0..d {
            let mean = sum[j] / n as f64;
            let var = sq[j] / n as f64 - mean * mean;
            assert!(mean.abs() < 0.02, "mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "var {var}");
        }
    }

    #[test]
    fn offset_examples() {
        let mut rng = stream_rng(1, 0);
        assert_eq!(sample_offset(&[0.7, 0.7, 0.7], &mut rng).unwrap(), 0.7);
        assert_eq!(sample_offset(&[0.5], &mut rng).unwrap(), 0.5);
        assert!(sample_offset(&[], &mut rng).is_err());
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_offset(&[-1.0, 1.0], &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 0.02);
    }

    #[test]
    fn hash_bit_examples() {
        let hash = h(&[1.0, 0.0], 0.0);
        assert!(hash.hash_bit(&[0.6, 0.8]).unwrap());
        assert!(!hash.hash_bit(&[-0.6, 0.8]).unwrap());
        assert!(!h(&[1.0, 0.0], 0.6).hash_bit(&[0.6, 0.8]).unwrap());
        assert!(hash.hash_bit(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn compound_code_examples() {
        let single = CompoundHash::new(vec![h(&[1.0, -1.0], 0.1)]).unwrap();
        let x = [0.6, 0.8];
        assert_eq!(
            single.code(&x).unwrap(),
            vec![single.bits()[0].hash_bit(&x).unwrap()]
        );
        let c = CompoundHash::sample_charikar(2, 16, &mut stream_rng(2, 0)).unwrap();
        assert_eq!(c.code(&x).unwrap(), c.code(&x).unwrap());
        assert!(c.collides(&x, &x).unwrap());
        assert!(CompoundHash::new(vec![]).is_err());
        assert!(CompoundHash::new(vec![h(&[1.0, 0.0], 0.0), h(&[1.0, 0.0, 0.0], 0.0)]).is_err());
    }

    #[test]
    fn compound_collision_rate_is_product_of_bits() {
        // pair at distance 0.33 in the plane, embedded in 8 dimensions
        let t = 1.0 - 0.33f64 * 0.33 / 2.0;
        let mut x = vec![0.0; 8];
        let mut y = vec![0.0; 8];
        x[0] = 1.0;
        y[0] = t;
        y[1] = (1.0 - t * t).sqrt();
        let p = charikar_collision_probability(0.33).unwrap().powi(8);
        let mut rng = stream_rng(9, 0);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| {
                CompoundHash::sample_charikar(8, 8, &mut rng)
                    .unwrap()
                    .collides(&x, &y)
                    .unwrap()
            })
            .count();
        let rate = hits as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((rate - p).abs() < 3.0 * se, "rate {rate} expected {p}");
    }

    #[test]
    fn charikar_examples() {
        assert_abs_diff_eq!(
            charikar_collision_probability(0.33).unwrap(),
            0.89,
            epsilon = 0.005
        );
        assert_eq!(charikar_collision_probability(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            charikar_collision_probability(2.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert!(charikar_collision_probability(-0.1).is_err());
        assert!(charikar_collision_probability(2.1).is_err());
    }

    #[test]
    fn charikar_matches_empirical_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let d = 6;
        let planes: Vec<HyperplaneHash> = (0..100_000)
            .map(|_| HyperplaneHash::sample_charikar(d, &mut rng).unwrap())
            .collect();
        for i in 0..10 {
            let x = l2_normalize(&sample_hyperplane(d, &mut rng).unwrap()).unwrap();
            // pull y toward x by a varying amount to cover assorted distances
            let g = sample_hyperplane(d, &mut rng).unwrap();
            let mix = 0.15 * (i + 1) as f64;
            let raw: Vec<f64> = x.iter().zip(g.iter()).map(|(a, b)| a + mix * b).collect();
            let y = l2_normalize(&raw).unwrap();
            let p = charikar_collision_probability(euclidean_distance(&x, &y).unwrap()).unwrap();
            let hits = planes.iter().filter(|h| h.side(&x) == h.side(&y)).count();
            let rate = hits as f64 / planes.len() as f64;
            let se = (p * (1.0 - p) / planes.len() as f64).sqrt();
            assert!((rate - p).abs() < 3.0 * se, "pair {i}: rate {rate} p {p}");
        }
    }

    proptest! {
        #[test]
        fn collision_probability_is_monotone(a in 0.0f64..2.0, b in 0.0f64..2.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let p_lo = charikar_collision_probability(lo).unwrap();
            let p_hi = charikar_collision_probability(hi).unwrap();
            prop_assert!(p_lo >= p_hi);
            prop_assert!((0.0..=1.0).contains(&p_hi));
        }

        #[test]
        fn charikar_bit_is_scale_invariant(
            w in prop::collection::vec(-3.0f64..3.0, 5),
            x in prop::collection::vec(-3.0f64..3.0, 5),
            scale in 1e-3f64..1e3,
        ) {
            let hash = HyperplaneHash::charikar(Vector::new(w).unwrap());
            let scaled: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let (a, b) = (hash.project(&x), hash.project(&scaled));
            // skip planes passing within rounding error of x
            prop_assume!(a.abs() > 1e-9 * scale.max(1.0));
            prop_assert_eq!(a > 0.0, b > 0.0);
            prop_assert_eq!(hash.hash_bit(&x).unwrap(), hash.hash_bit(&scaled).unwrap());
        }
    }
}
