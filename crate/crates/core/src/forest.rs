//! RP-Forest and MQ-Forest query engines over one shared set of trees.
//!
//! Both modes route through the trees in order, collect unseen leaf ids and
//! merge them into a [`CandidateQueue`] ranked by distance to the query. The
//! RP mode always routes with the query. The MQ mode routes the first `v`
//! trees with the query and every later tree with the normalized centroid of
//! the current candidates, refreshed after each tree.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::candidate::CandidateQueue;
use crate::error::{check_dim, Error, Result};
use crate::hashing::HyperplaneHash;
use crate::matrix::DataMatrix;
use crate::rng::{stream_rng, streams};
use crate::rp_tree::{build_tree, Node, RpTree};
use crate::vector::{UnitVector, Vector};

pub const DEFAULT_LEAF_CAPACITY: usize = 500;
pub const DEFAULT_WARMUP: usize = 8;

const MAGIC: &[u8; 4] = b"MQF1";
const TAG_INTERNAL: u8 = 0;
const TAG_LEAF: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryMode {
    Rp,
    /// Query modification after `warmup` trees.
    Mq {
        warmup: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbour {
    pub id: u32,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    /// Ascending by distance to the query, ties by id.
    pub neighbours: Vec<Neighbour>,
    /// Re-rank distances plus, in MQ mode, running-sum vector updates.
    pub distance_computations: u64,
    /// Queue insertions contributed by each tree.
    pub per_tree_delta_knn: Vec<usize>,
    /// Unique candidates examined.
    pub visited: usize,
}

impl QueryResult {
    pub fn ids(&self) -> Vec<u32> {
        self.neighbours.iter().map(|n| n.id).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Forest {
    trees: Vec<Arc<RpTree>>,
    data: Arc<DataMatrix>,
    leaf_capacity: usize,
    seed: u64,
}

impl Forest {
    /// Builds `tree_count` trees in parallel; tree `i` draws from its own
    /// stream of `seed`, so a forest of `T` trees is a prefix of any larger
    /// forest with the same seed.
    pub fn build(
        data: Arc<DataMatrix>,
        tree_count: usize,
        leaf_capacity: usize,
        seed: u64,
    ) -> Result<Self> {
        if tree_count == 0 {
            return Err(Error::InvalidParameter(
                "forest needs at least one tree".into(),
            ));
        }
        if data.is_empty() {
            return Err(Error::EmptyInput("forest over an empty dataset"));
        }
        if data.len() > u32::MAX as usize {
            return Err(Error::InvalidParameter(
                "at most 2^32 points are supported".into(),
            ));
        }
        let ids: Vec<u32> = (0..data.len() as u32).collect();
        let trees = (0..tree_count)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, streams::TREE + i as u64);
                build_tree(&data, ids.clone(), leaf_capacity, &mut rng).map(Arc::new)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            trees,
            data,
            leaf_capacity,
            seed,
        })
    }

    pub fn trees(&self) -> &[Arc<RpTree>] {
        &self.trees
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn data(&self) -> &Arc<DataMatrix> {
        &self.data
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The forest made of the first `count` trees.
    pub fn prefix(&self, count: usize) -> Result<Forest> {
        if count == 0 || count > self.trees.len() {
            return Err(Error::InvalidParameter(format!(
                "prefix of {count} trees from a forest of {}",
                self.trees.len()
            )));
        }
        Ok(Forest {
            trees: self.trees[..count].to_vec(),
            data: Arc::clone(&self.data),
            leaf_capacity: self.leaf_capacity,
            seed: self.seed,
        })
    }

    pub fn query_rp(&self, q: &UnitVector, k: usize) -> Result<QueryResult> {
        Ok(self.search(q, k, QueryMode::Rp, false)?.0)
    }

    pub fn query_mq(&self, q: &UnitVector, k: usize, warmup: usize) -> Result<QueryResult> {
        Ok(self.search(q, k, QueryMode::Mq { warmup }, false)?.0)
    }

    pub fn query(&self, q: &UnitVector, k: usize, mode: QueryMode) -> Result<QueryResult> {
        Ok(self.search(q, k, mode, false)?.0)
    }

    /// Like [`Forest::query`], also returning the normalized candidate
    /// centroid after each tree.
    pub fn query_traced(
        &self,
        q: &UnitVector,
        k: usize,
        mode: QueryMode,
    ) -> Result<(QueryResult, Vec<UnitVector>)> {
        self.search(q, k, mode, true)
    }

    fn search(
        &self,
        q: &UnitVector,
        k: usize,
        mode: QueryMode,
        trace: bool,
    ) -> Result<(QueryResult, Vec<UnitVector>)> {
        check_dim(self.data.dim(), q.dim())?;
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        let warmup = match mode {
            QueryMode::Rp => self.trees.len(),
            QueryMode::Mq { warmup } => {
                if warmup == 0 || warmup > self.trees.len() {
                    return Err(Error::InvalidParameter(format!(
                        "warm-up must lie in 1..={}, got {warmup}",
                        self.trees.len()
                    )));
                }
                warmup
            }
        };

        let mut queue = CandidateQueue::new(q, k)?;
        let mut seen = vec![false; self.data.len()];
        let mut fresh: Vec<u32> = Vec::new();
        let mut per_tree = Vec::with_capacity(self.trees.len());
        let mut estimates = Vec::new();
        let mut visited = 0usize;
        let mut routing: Option<UnitVector> = None;

        for (i, tree) in self.trees.iter().enumerate() {
            let leaf = match &routing {
                Some(r) if i >= warmup => tree.route_unchecked(r.as_ref()),
                _ => tree.route_unchecked(q.as_ref()),
            };
            fresh.clear();
            for &id in leaf {
                let slot = &mut seen[id as usize];
                if !*slot {
                    *slot = true;
                    fresh.push(id);
                }
            }
            visited += fresh.len();
            let stats = queue.merge(&fresh, &self.data)?;
            per_tree.push(stats.inserted);

            let need_estimate = trace || (i + 1 >= warmup && i + 1 < self.trees.len());
            if need_estimate && !queue.is_empty() {
                // a zero sum leaves the previous routing vector in place
                if let Ok(e) = queue.current_estimate() {
                    if trace {
                        estimates.push(e.clone());
                    }
                    routing = Some(e);
                }
            }
        }

        let s_updates = match mode {
            QueryMode::Rp => 0,
            QueryMode::Mq { .. } => queue.ops_count(),
        };
        let neighbours = queue
            .top_k()
            .into_iter()
            .map(|(id, distance)| Neighbour { id, distance })
            .collect();
        Ok((
            QueryResult {
                neighbours,
                distance_computations: visited as u64 + s_updates,
                per_tree_delta_knn: per_tree,
                visited,
            },
            estimates,
        ))
    }

    /// Writes the forest in the `MQF1` binary layout.
    ///
    /// Header: magic, then `dim`, `N`, `T`, `n_s` as little-endian `u32` and
    /// the seed as `u64`. Trees follow in pre-order: tag byte `0` with `dim`
    /// `f64` plane coordinates and the `f64` offset, or tag byte `1` with a
    /// `u32` count and that many `u32` ids.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [
            self.data.dim(),
            self.data.len(),
            self.trees.len(),
            self.leaf_capacity,
        ] {
            let v = u32::try_from(v)
                .map_err(|_| Error::InvalidParameter(format!("{v} does not fit the header")))?;
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.seed.to_le_bytes())?;
        for tree in &self.trees {
            write_node(tree.root(), &mut w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    /// Reads a forest written by [`Forest::write_to`] for the given dataset.
    pub fn read_from<R: Read>(r: R, data: Arc<DataMatrix>) -> Result<Self> {
        let mut r = CountingReader {
            inner: r,
            offset: 0,
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic, 0)?;
        if &magic != MAGIC {
            return Err(Error::Format {
                offset: 0,
                record: 0,
                message: "bad magic, expected MQF1".into(),
            });
        }
        let dim = r.read_u32(0)? as usize;
        let n = r.read_u32(0)? as usize;
        let tree_count = r.read_u32(0)? as usize;
        let leaf_capacity = r.read_u32(0)? as usize;
        let seed = r.read_u64(0)?;
        check_dim(data.dim(), dim)?;
        if data.len() != n {
            return Err(Error::InvalidParameter(format!(
                "forest was built over {n} points, dataset has {}",
                data.len()
            )));
        }
        if tree_count == 0 {
            return Err(r.format_error(0, "forest with zero trees"));
        }
        let mut trees = Vec::with_capacity(tree_count);
        for t in 0..tree_count {
            let root = read_node(&mut r, dim, n, t, 0)?;
            trees.push(Arc::new(RpTree::from_parts(root, leaf_capacity, dim)));
        }
        let mut probe = [0u8; 1];
        if r.inner.read(&mut probe)? != 0 {
            return Err(r.format_error(tree_count, "trailing bytes after the last tree"));
        }
        Ok(Self {
            trees,
            data,
            leaf_capacity,
            seed,
        })
    }
}

fn write_node<W: Write>(node: &Node, w: &mut W) -> Result<()> {
    let mut stack = vec![node];
    while let Some(node) = stack.pop() {
        match node {
            Node::Internal { split, left, right } => {
                w.write_all(&[TAG_INTERNAL])?;
                for x in split.plane().iter() {
                    w.write_all(&x.to_le_bytes())?;
                }
                w.write_all(&split.offset().to_le_bytes())?;
                stack.push(right);
                stack.push(left);
            }
            Node::Leaf { ids } => {
                w.write_all(&[TAG_LEAF])?;
                w.write_all(&(ids.len() as u32).to_le_bytes())?;
                for id in ids {
                    w.write_all(&id.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

const MAX_DEPTH: usize = 100_000;

fn read_node<R: Read>(
    r: &mut CountingReader<R>,
    dim: usize,
    n: usize,
    tree: usize,
    depth: usize,
) -> Result<Node> {
    if depth > MAX_DEPTH {
        return Err(r.format_error(tree, "tree nesting too deep"));
    }
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag, tree)?;
    match tag[0] {
        TAG_INTERNAL => {
            let mut w = Vec::with_capacity(dim);
            for _ in 0..dim {
                w.push(r.read_f64(tree)?);
            }
            let offset = r.read_f64(tree)?;
            let w = Vector::new(w).map_err(|e| r.format_error(tree, &e.to_string()))?;
            let split =
                HyperplaneHash::new(w, offset).map_err(|e| r.format_error(tree, &e.to_string()))?;
            let left = Box::new(read_node(r, dim, n, tree, depth + 1)?);
            let right = Box::new(read_node(r, dim, n, tree, depth + 1)?);
            Ok(Node::Internal { split, left, right })
        }
        TAG_LEAF => {
            let count = r.read_u32(tree)? as usize;
            if count > n {
                return Err(r.format_error(tree, "leaf larger than the dataset"));
            }
            let mut ids = Vec::with_capacity(count);
            for _ in 0..count {
                let id = r.read_u32(tree)?;
                if id as usize >= n {
                    return Err(r.format_error(tree, &format!("leaf id {id} out of range")));
                }
                ids.push(id);
            }
            Ok(Node::Leaf { ids })
        }
        other => Err(r.format_error(tree, &format!("unknown node tag {other}"))),
    }
}

struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> CountingReader<R> {
    fn read_exact(&mut self, buf: &mut [u8], record: usize) -> Result<()> {
        self.inner.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                self.format_error(record, "truncated file")
            } else {
                Error::Io(e)
            }
        })?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn read_u32(&mut self, record: usize) -> Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b, record)?;
        Ok(u32::from_le_bytes(b))
    }

    fn read_u64(&mut self, record: usize) -> Result<u64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b, record)?;
        Ok(u64::from_le_bytes(b))
    }

    fn read_f64(&mut self, record: usize) -> Result<f64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b, record)?;
        Ok(f64::from_le_bytes(b))
    }

    fn format_error(&self, record: usize, message: &str) -> Error {
        Error::Format {
            offset: self.offset,
            record,
            message: message.to_string(),
        }
    }
}
