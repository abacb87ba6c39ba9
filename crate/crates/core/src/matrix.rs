use crate::error::{Error, Result};
use crate::vector::{norm, UnitVector, UNIT_NORM_TOLERANCE};

/// A dataset of unit vectors stored row-major as `f32`.
///
/// Row `i` is point id `i`. Rows whose norm deviates from 1 by more than
/// [`UNIT_NORM_TOLERANCE`] are re-normalized on construction and counted in
/// [`DataMatrix::renormalized`].
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    dim: usize,
    values: Vec<f32>,
    renormalized: usize,
}

impl DataMatrix {
    pub fn from_flat(dim: usize, mut values: Vec<f32>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "{} values do not form rows of dimension {dim}",
                values.len()
            )));
        }
        let mut renormalized = 0;
        for (i, row) in values.chunks_exact_mut(dim).enumerate() {
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has a non-finite value at coordinate {j}"
                )));
            }
            let promoted: Vec<f64> = row.iter().map(|&x| x as f64).collect();
            let n = norm(&promoted);
            if n == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "row {i} is the zero vector"
                )));
            }
            if (n - 1.0).abs() > UNIT_NORM_TOLERANCE {
                for (x, p) in row.iter_mut().zip(&promoted) {
                    *x = (p / n) as f32;
                }
                renormalized += 1;
            }
        }
        Ok(Self {
            dim,
            values,
            renormalized,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .ok_or(Error::EmptyInput("no rows"))?
            .as_ref()
            .len();
        let mut values = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            crate::error::check_dim(dim, r.len())?;
            values.extend(r.iter().map(|&x| x as f32));
        }
        Self::from_flat(dim, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of rows that were outside the unit-norm tolerance on ingest.
    pub fn renormalized(&self) -> usize {
        self.renormalized
    }

    #[inline]
    pub fn row(&self, id: usize) -> &[f32] {
        &self.values[id * self.dim..(id + 1) * self.dim]
    }

    pub fn unit_row(&self, id: usize) -> UnitVector {
        UnitVector::from_row(self.row(id))
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.values
    }

    /// Copies the given rows into a new matrix, renumbering them `0..ids.len()`.
    pub fn select(&self, ids: &[usize]) -> DataMatrix {
        let mut values = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            values.extend_from_slice(self.row(i));
        }
        DataMatrix {
            dim: self.dim,
            values,
            renormalized: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renormalizes_out_of_tolerance_rows() {
        let m = DataMatrix::from_flat(2, vec![2.0, 0.0, 0.6, 0.8]).unwrap();
        assert_eq!(m.renormalized(), 1);
        assert_eq!(m.row(0), &[1.0, 0.0]);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn rejects_zero_rows_and_ragged_input() {
        assert!(DataMatrix::from_flat(2, vec![0.0, 0.0]).is_err());
        assert!(DataMatrix::from_flat(2, vec![1.0, 0.0, 1.0]).is_err());
        assert!(DataMatrix::from_flat(1, vec![1.0]).is_err());
    }

    #[test]
    fn select_renumbers() {
        let m = DataMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]).unwrap();
        let s = m.select(&[2, 0]);
        assert_eq!(s.row(0), m.row(2));
        assert_eq!(s.row(1), m.row(0));
    }
}
