//! Dense vector primitives.
//!
//! All arithmetic runs in `f64`. Row storage in [`DataMatrix`](crate::DataMatrix)
//! is `f32` and is promoted element-wise by the generic kernels below, so a
//! stored row and its promoted copy produce bit-identical dot products.

use std::ops::Deref;

use crate::error::{check_dim, Error, Result};

/// Absolute tolerance on the norm of a [`UnitVector`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// A finite real vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

/// A vector of unit Euclidean norm with at least two coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Self(coords)
    }
}

impl UnitVector {
    /// Wraps `coords`, rejecting vectors whose norm is off by more than
    /// [`UNIT_NORM_TOLERANCE`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "unit vectors need at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let n = norm(&coords);
        if (n - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::NotUnitNorm(n));
        }
        Ok(Self(coords))
    }

    /// Promotes a stored `f32` row. Rows are normalized on ingest, so only
    /// the norm tolerance is checked in debug builds.
    pub fn from_row(row: &[f32]) -> Self {
        let coords: Vec<f64> = row.iter().map(|&x| x as f64).collect();
        debug_assert!((norm(&coords) - 1.0).abs() <= UNIT_NORM_TOLERANCE);
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_vector(&self) -> Vector {
        Vector(self.0.clone())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for UnitVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Dot product of an `f64` vector with a vector of any element type that
/// widens losslessly to `f64`.
#[inline]
pub fn dot<T: Copy + Into<f64>>(a: &[f64], b: &[T]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y.into()).sum()
}

/// Squared Euclidean distance, same promotion rules as [`dot`].
#[inline]
pub fn squared_distance<T: Copy + Into<f64>>(a: &[f64], b: &[T]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y.into();
            d * d
        })
        .sum()
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn l2_normalize(v: &[f64]) -> Result<UnitVector> {
    let n = norm(v);
    if n.is_nan() || n <= 0.0 || !n.is_finite() {
        return Err(Error::DegenerateVector);
    }
    UnitVector::new(v.iter().map(|x| x / n).collect())
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    Ok(squared_distance(x, y).sqrt())
}

/// Coordinate-wise arithmetic mean.
pub fn centroid<V: AsRef<[f64]>>(points: &[V]) -> Result<Vector> {
    let first = points
        .first()
        .ok_or(Error::EmptyInput("centroid of no points"))?;
    let dim = first.as_ref().len();
    let mut sum = vec![0.0; dim];
    for p in points {
        let p = p.as_ref();
        check_dim(dim, p.len())?;
        for (s, x) in sum.iter_mut().zip(p) {
            *s += x;
        }
    }
    let n = points.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Vector::new(sum)
}

pub fn normalized_centroid<V: AsRef<[f64]>>(points: &[V]) -> Result<UnitVector> {
    let c = centroid(points)?;
    l2_normalize(&c).map_err(|_| Error::AntipodalDegenerate)
}
