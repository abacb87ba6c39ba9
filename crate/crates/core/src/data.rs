//! Synthetic datasets, fvecs/ivecs files and exact ground truth.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::matrix::DataMatrix;
use crate::rng::{stream_rng, streams};
use crate::vector::{euclidean_distance, squared_distance};

const CHUNK_ROWS: usize = 4096;
const CENTER_STREAM: u64 = streams::GENERATOR + (1 << 39);

fn check_shape(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if d < 2 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 2".into(),
        ));
    }
    Ok(())
}

fn gaussian_unit<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let n = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            out.iter_mut().for_each(|x| *x /= n);
            return;
        }
    }
}

/// `n` points uniform on the unit sphere in `d` dimensions.
pub fn gen_uniform_sphere(n: usize, d: usize, seed: u64) -> Result<DataMatrix> {
    check_shape(n, d)?;
    let mut values = vec![0f32; n * d];
    values
        .par_chunks_mut(CHUNK_ROWS * d)
        .enumerate()
        .for_each(|(chunk, block)| {
            let mut rng = stream_rng(seed, streams::GENERATOR + chunk as u64);
            let mut row = vec![0.0; d];
            for out in block.chunks_mut(d) {
                gaussian_unit(&mut rng, &mut row);
                for (o, x) in out.iter_mut().zip(&row) {
                    *o = *x as f32;
                }
            }
        });
    DataMatrix::from_flat(d, values)
}

#[derive(Clone, Debug)]
pub struct ClusteredData {
    pub data: DataMatrix,
    /// Cluster index of every row.
    pub assignment: Vec<usize>,
    pub centers: DataMatrix,
}

/// Points `normalize(center + spread·g/√d)` around `clusters` centres drawn
/// uniformly on the sphere, so that `spread` is the typical length of the
/// noise vector whatever the dimension. Each point picks its centre
/// uniformly at random. The centres depend only on `(clusters, d, seed)`.
pub fn gen_clustered_sphere(
    n: usize,
    d: usize,
    clusters: usize,
    spread: f64,
    seed: u64,
) -> Result<ClusteredData> {
    check_shape(n, d)?;
    if clusters == 0 {
        return Err(Error::InvalidParameter("need at least one cluster".into()));
    }
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spread must be non-negative, got {spread}"
        )));
    }
    let mut center_rng = stream_rng(seed, CENTER_STREAM);
    let mut centers = vec![0.0; clusters * d];
    for c in centers.chunks_mut(d) {
        gaussian_unit(&mut center_rng, c);
    }
    let scale = spread / (d as f64).sqrt();

    let mut values = vec![0f32; n * d];
    let mut assignment = vec![0usize; n];
    values
        .par_chunks_mut(CHUNK_ROWS * d)
        .zip(assignment.par_chunks_mut(CHUNK_ROWS))
        .enumerate()
        .for_each(|(chunk, (block, assign))| {
            let mut rng = stream_rng(seed, streams::GENERATOR + chunk as u64);
            let mut row = vec![0.0; d];
            for (out, a) in block.chunks_mut(d).zip(assign.iter_mut()) {
                loop {
                    let c = rng.random_range(0..clusters);
                    let center = &centers[c * d..(c + 1) * d];
                    for (x, m) in row.iter_mut().zip(center) {
                        let g: f64 = rng.sample(StandardNormal);
                        *x = m + scale * g;
                    }
                    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        for (o, x) in out.iter_mut().zip(&row) {
                            *o = (x / norm) as f32;
                        }
                        *a = c;
                        break;
                    }
                }
            }
        });
    Ok(ClusteredData {
        data: DataMatrix::from_flat(d, values)?,
        assignment,
        centers: DataMatrix::from_flat(d, centers.iter().map(|&x| x as f32).collect())?,
    })
}

/// Draws `count` rows as queries and removes them from the base set.
pub fn split_queries(
    data: &DataMatrix,
    count: usize,
    seed: u64,
) -> Result<(DataMatrix, DataMatrix)> {
    if count == 0 || count >= data.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {count} queries from {} points",
            data.len()
        )));
    }
    let mut rng = stream_rng(seed, streams::QUERY);
    let mut picked = sample(&mut rng, data.len(), count).into_vec();
    let queries = data.select(&picked);
    picked.sort_unstable();
    let mut rest = Vec::with_capacity(data.len() - count);
    let mut next = picked.iter().peekable();
    for i in 0..data.len() {
        if next.peek() == Some(&&i) {
            next.next();
        } else {
            rest.push(i);
        }
    }
    Ok((data.select(&rest), queries))
}

/// Mean distance between `pairs` random pairs of distinct rows.
pub fn mean_pairwise_distance(data: &DataMatrix, pairs: usize, seed: u64) -> Result<f64> {
    if data.len() < 2 || pairs == 0 {
        return Err(Error::InsufficientData(
            "need two points and one pair".into(),
        ));
    }
    let mut rng = stream_rng(seed, streams::MONTE_CARLO);
    let mut total = 0.0;
    for _ in 0..pairs {
        let i = rng.random_range(0..data.len());
        let mut j = rng.random_range(0..data.len() - 1);
        if j >= i {
            j += 1;
        }
        let a = data.unit_row(i);
        total += squared_distance(&a, data.row(j)).sqrt();
    }
    Ok(total / pairs as f64)
}

/// Exact nearest neighbours of every query, ascending by distance.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    k: usize,
    ids: Vec<Vec<u32>>,
    distances: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn new(ids: Vec<Vec<u32>>, distances: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != distances.len() {
            return Err(Error::InvalidParameter(
                "ids and distances differ in length".into(),
            ));
        }
        let k = ids.first().map_or(0, Vec::len);
        for (i, d) in ids.iter().zip(&distances) {
            if i.len() != k || d.len() != k {
                return Err(Error::InvalidParameter("ragged ground truth".into()));
            }
        }
        Ok(Self { k, ids, distances })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self, query: usize) -> &[u32] {
        &self.ids[query]
    }

    pub fn distances(&self, query: usize) -> &[f64] {
        &self.distances[query]
    }

    /// The first `k` neighbours of every query.
    pub fn truncated(&self, k: usize) -> Result<GroundTruth> {
        if k > self.k {
            return Err(Error::InvalidParameter(format!(
                "k = {k} exceeds stored {}",
                self.k
            )));
        }
        Ok(Self {
            k,
            ids: self.ids.iter().map(|v| v[..k].to_vec()).collect(),
            distances: self.distances.iter().map(|v| v[..k].to_vec()).collect(),
        })
    }

    /// Writes ids as ivecs and distances as fvecs.
    pub fn save(&self, ids_path: &Path, distances_path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(ids_path)?);
        for row in &self.ids {
            w.write_all(&(row.len() as i32).to_le_bytes())?;
            for &id in row {
                w.write_all(&(id as i32).to_le_bytes())?;
            }
        }
        w.flush()?;
        let mut w = BufWriter::new(File::create(distances_path)?);
        for row in &self.distances {
            w.write_all(&(row.len() as i32).to_le_bytes())?;
            for &d in row {
                w.write_all(&(d as f32).to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(ids_path: &Path, distances_path: &Path) -> Result<Self> {
        let (k, raw_ids) = read_records(ids_path)?;
        let (kd, raw_d) = read_records(distances_path)?;
        if k != kd || raw_ids.len() != raw_d.len() {
            return Err(Error::InvalidParameter(
                "ids and distances files disagree".into(),
            ));
        }
        let ids = raw_ids
            .chunks(k)
            .map(|c| {
                c.iter()
                    .map(|b| {
                        let v = i32::from_le_bytes(*b);
                        u32::try_from(v)
                            .map_err(|_| Error::InvalidParameter(format!("negative id {v}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let distances = raw_d
            .chunks(k)
            .map(|c| c.iter().map(|b| f32::from_le_bytes(*b) as f64).collect())
            .collect();
        Self::new(ids, distances)
    }
}

/// Exact `k` nearest neighbours of each query by linear scan, ties broken by
/// ascending id.
pub fn brute_force_knn(data: &DataMatrix, queries: &DataMatrix, k: usize) -> Result<GroundTruth> {
    check_dim(data.dim(), queries.dim())?;
    if k == 0 || k > data.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={}",
            data.len()
        )));
    }
    let rows: Vec<(Vec<u32>, Vec<f64>)> = (0..queries.len())
        .into_par_iter()
        .map(|qi| {
            let q = queries.unit_row(qi);
            let mut all: Vec<(f64, u32)> = data
                .rows()
                .enumerate()
                .map(|(id, x)| (squared_distance(&q, x), id as u32))
                .collect();
            let by_key = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < all.len() {
                all.select_nth_unstable_by(k - 1, by_key);
                all.truncate(k);
            }
            all.sort_unstable_by(by_key);
            all.into_iter().map(|(sq, id)| (id, sq.sqrt())).unzip()
        })
        .collect();
    let (ids, distances) = rows.into_iter().unzip();
    GroundTruth::new(ids, distances)
}

/// Fraction of `truth` present in `found`.
pub fn recall(found: &[u32], truth: &[u32]) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let found: std::collections::HashSet<u32> = found.iter().copied().collect();
    truth.iter().filter(|id| found.contains(id)).count() as f64 / truth.len() as f64
}

/// Distance from a dataset row to an arbitrary point, both promoted to `f64`.
pub fn row_distance(data: &DataMatrix, id: usize, point: &[f64]) -> Result<f64> {
    let row: Vec<f64> = data.row(id).iter().map(|&x| x as f64).collect();
    euclidean_distance(&row, point)
}

/// Writes rows in fvecs layout: per row an `i32` dimension followed by that
/// many `f32`, all little-endian.
pub fn save_vectors(data: &DataMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let d = data.dim() as i32;
    for row in data.rows() {
        w.write_all(&d.to_le_bytes())?;
        for x in row {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_vectors(path: &Path) -> Result<DataMatrix> {
    let (d, raw) = read_records(path)?;
    DataMatrix::from_flat(d, raw.into_iter().map(f32::from_le_bytes).collect())
}

/// Reads fvecs/ivecs framing, returning the common dimension and the payload
/// words in order.
fn read_records(path: &Path) -> Result<(usize, Vec<[u8; 4]>)> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    parse_records(&bytes)
}

fn parse_records(bytes: &[u8]) -> Result<(usize, Vec<[u8; 4]>)> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput("vector file holds no records"));
    }
    let fail = |offset: usize, record: usize, message: String| Error::Format {
        offset: offset as u64,
        record,
        message,
    };
    let mut words = Vec::new();
    let mut dim = None;
    let mut offset = 0;
    let mut record = 0;
    while offset < bytes.len() {
        let Some(head) = bytes.get(offset..offset + 4) else {
            return Err(fail(offset, record, "truncated dimension header".into()));
        };
        let d = i32::from_le_bytes(head.try_into().unwrap());
        if d <= 0 {
            return Err(fail(offset, record, format!("invalid dimension {d}")));
        }
        let d = d as usize;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(fail(
                    offset,
                    record,
                    format!("dimension {d} differs from {expected}"),
                ))
            }
            _ => {}
        }
        let body = offset + 4;
        let Some(payload) = bytes.get(body..body + 4 * d) else {
            return Err(fail(bytes.len(), record, "truncated record".into()));
        };
        words.extend(
            payload
                .chunks_exact(4)
                .map(|c| <[u8; 4]>::try_from(c).unwrap()),
        );
        offset = body + 4 * d;
        record += 1;
    }
    Ok((dim.unwrap_or(0), words))
}
