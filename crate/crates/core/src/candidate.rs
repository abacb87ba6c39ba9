//! Bounded candidate queue with an incrementally maintained member sum.
//!
//! The queue keeps the `k` candidates closest to the original query. Next to
//! the heap it stores `s`, the sum of the member vectors, so the normalized
//! centroid of the current candidates is `s / ‖s‖`. Each insertion adds one
//! vector to `s` and each eviction subtracts one.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{check_dim, Error, Result};
use crate::matrix::DataMatrix;
use crate::vector::{l2_normalize, squared_distance, UnitVector};

/// `s` is recomputed from the members after this many merges.
pub const SUM_REBUILD_INTERVAL: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Entry {
    sq_dist: f64,
    id: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq_dist
            .total_cmp(&other.sq_dist)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Outcome of one [`CandidateQueue::merge`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MergeStats {
    pub inserted: usize,
    pub evicted: usize,
    /// Distances to the query computed while ranking the new candidates.
    pub distances: usize,
}

#[derive(Clone, Debug)]
pub struct CandidateQueue {
    query: Vec<f64>,
    k: usize,
    heap: BinaryHeap<Entry>,
    members: HashSet<u32>,
    sum: Vec<f64>,
    ops_count: u64,
    merges: usize,
}

impl CandidateQueue {
    pub fn new(query: &UnitVector, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "queue capacity must be positive".into(),
            ));
        }
        Ok(Self {
            query: query.to_vec(),
            k,
            heap: BinaryHeap::with_capacity(k + 1),
            members: HashSet::with_capacity(k + 1),
            sum: vec![0.0; query.dim()],
            ops_count: 0,
            merges: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.members.contains(&id)
    }

    /// Running sum of the member vectors.
    pub fn sum(&self) -> &[f64] {
        &self.sum
    }

    /// Vector additions and subtractions applied to the running sum.
    pub fn ops_count(&self) -> u64 {
        self.ops_count
    }

    /// Merges freshly retrieved candidates.
    ///
    /// Candidates are ranked by distance to the query and admitted closest
    /// first: while the queue has room every candidate is inserted, after
    /// that a candidate replaces the current farthest member only if it is
    /// strictly closer. Ids already in the queue are rejected.
    pub fn merge(&mut self, ids: &[u32], data: &DataMatrix) -> Result<MergeStats> {
        check_dim(self.query.len(), data.dim())?;
        let mut seen = HashSet::with_capacity(ids.len());
        for &id in ids {
            if id as usize >= data.len() {
                return Err(Error::InvalidParameter(format!(
                    "candidate {id} out of range for {} points",
                    data.len()
                )));
            }
            if self.members.contains(&id) || !seen.insert(id) {
                return Err(Error::DuplicateCandidate(id));
            }
        }

        let mut fresh: Vec<Entry> = ids
            .iter()
            .map(|&id| Entry {
                sq_dist: squared_distance(&self.query, data.row(id as usize)),
                id,
            })
            .collect();
        fresh.sort_unstable();

        let mut stats = MergeStats {
            distances: fresh.len(),
            ..MergeStats::default()
        };
        let mut next = fresh.into_iter().peekable();

        while self.heap.len() < self.k {
            let Some(z) = next.next() else { break };
            self.insert(z, data);
            stats.inserted += 1;
        }
        while let Some(&z) = next.peek() {
            let farthest = *self.heap.peek().expect("queue is full here");
            if farthest.sq_dist <= z.sq_dist {
                break;
            }
            next.next();
            self.heap.pop();
            self.members.remove(&farthest.id);
            sub_row(&mut self.sum, data.row(farthest.id as usize));
            self.ops_count += 1;
            stats.evicted += 1;
            self.insert(z, data);
            stats.inserted += 1;
        }

        self.merges += 1;
        if self.merges.is_multiple_of(SUM_REBUILD_INTERVAL) {
            self.rebuild_sum(data);
        }
        Ok(stats)
    }

    fn insert(&mut self, e: Entry, data: &DataMatrix) {
        add_row(&mut self.sum, data.row(e.id as usize));
        self.ops_count += 1;
        self.members.insert(e.id);
        self.heap.push(e);
    }

    fn rebuild_sum(&mut self, data: &DataMatrix) {
        self.sum.iter_mut().for_each(|s| *s = 0.0);
        let mut ids: Vec<u32> = self.members.iter().copied().collect();
        ids.sort_unstable();
        for id in ids {
            add_row(&mut self.sum, data.row(id as usize));
        }
    }

    /// Normalized centroid of the current members, `s / ‖s‖`.
    pub fn current_estimate(&self) -> Result<UnitVector> {
        if self.heap.is_empty() {
            return Err(Error::EmptyInput("estimate from an empty queue"));
        }
        l2_normalize(&self.sum)
    }

    /// Members in ascending distance to the query, ties by ascending id.
    pub fn top_k(&self) -> Vec<(u32, f64)> {
        let mut entries: Vec<Entry> = self.heap.iter().copied().collect();
        entries.sort_unstable();
        entries
            .into_iter()
            .map(|e| (e.id, e.sq_dist.sqrt()))
            .collect()
    }

    pub fn member_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.members.iter().copied().collect();
        ids.sort_unstable();
        ids
    }
}

#[inline]
fn add_row(sum: &mut [f64], row: &[f32]) {
    for (s, &x) in sum.iter_mut().zip(row) {
        *s += x as f64;
    }
}

#[inline]
fn sub_row(sum: &mut [f64], row: &[f32]) {
    for (s, &x) in sum.iter_mut().zip(row) {
        *s -= x as f64;
    }
}
