//! Random projection trees.
//!
//! A node holding more than `leaf_capacity` points is split by a Gaussian
//! plane `w` and an offset `a` drawn strictly between the smallest and the
//! largest projection of the node's points. Points with `w·x > a` go left.

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::hashing::{extremes, sample_hyperplane, HyperplaneHash};
use crate::matrix::DataMatrix;

/// Extra plane draws attempted before a node whose points all project to the
/// same value is accepted as an oversized ("stuck") leaf.
pub const SPLIT_RETRIES: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Internal {
        split: HyperplaneHash,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        ids: Vec<u32>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RpTree {
    root: Node,
    leaf_capacity: usize,
    dim: usize,
}

/// Builds a tree over the rows `ids` of `data`.
pub fn build_tree<R: Rng + ?Sized>(
    data: &DataMatrix,
    ids: Vec<u32>,
    leaf_capacity: usize,
    rng: &mut R,
) -> Result<RpTree> {
    if ids.is_empty() {
        return Err(Error::EmptyInput("tree over no points"));
    }
    if leaf_capacity == 0 {
        return Err(Error::InvalidParameter(
            "leaf capacity must be positive".into(),
        ));
    }
    if let Some(&bad) = ids.iter().find(|&&i| i as usize >= data.len()) {
        return Err(Error::InvalidParameter(format!(
            "id {bad} out of range for {} points",
            data.len()
        )));
    }
    let root = build_node(data, ids, leaf_capacity, rng);
    Ok(RpTree {
        root,
        leaf_capacity,
        dim: data.dim(),
    })
}

fn build_node<R: Rng + ?Sized>(
    data: &DataMatrix,
    ids: Vec<u32>,
    leaf_capacity: usize,
    rng: &mut R,
) -> Node {
    if ids.len() <= leaf_capacity {
        return Node::Leaf { ids };
    }
    let mut projections = vec![0.0; ids.len()];
    for _ in 0..=SPLIT_RETRIES {
        let w = sample_hyperplane(data.dim(), rng).expect("data dimension is at least 2");
        for (p, &id) in projections.iter_mut().zip(&ids) {
            *p = crate::vector::dot(&w, data.row(id as usize));
        }
        let (lo, hi) = extremes(&projections).expect("node is non-empty");
        // need room for an offset strictly inside (lo, hi)
        if lo.next_up() >= hi {
            continue;
        }
        let offset = loop {
            let a = rng.random_range(lo..hi);
            if a > lo {
                break a;
            }
        };
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for (&p, &id) in projections.iter().zip(&ids) {
            if p > offset {
                left.push(id);
            } else {
                right.push(id);
            }
        }
        drop(ids);
        let split = HyperplaneHash::new(w, offset).expect("offset is finite");
        let left = Box::new(build_node(data, left, leaf_capacity, rng));
        let right = Box::new(build_node(data, right, leaf_capacity, rng));
        return Node::Internal { split, left, right };
    }
    Node::Leaf { ids }
}

impl RpTree {
    pub(crate) fn from_parts(root: Node, leaf_capacity: usize, dim: usize) -> Self {
        Self {
            root,
            leaf_capacity,
            dim,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ids of the leaf reached by following `w·v > a` from the root.
    pub fn route_to_leaf<T: Copy + Into<f64>>(&self, v: &[T]) -> Result<&[u32]> {
        check_dim(self.dim, v.len())?;
        Ok(self.route_unchecked(v))
    }

    #[inline]
    pub(crate) fn route_unchecked<T: Copy + Into<f64>>(&self, v: &[T]) -> &[u32] {
        let mut node = &self.root;
        loop {
            match node {
                Node::Internal { split, left, right } => {
                    node = if split.side(v) { left } else { right };
                }
                Node::Leaf { ids } => return ids,
            }
        }
    }

    /// Leaves in pre-order.
    pub fn leaves(&self) -> Vec<&[u32]> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            match node {
                Node::Internal { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
                Node::Leaf { ids } => out.push(ids.as_slice()),
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        fn depth(n: &Node) -> usize {
            match n {
                Node::Internal { left, right, .. } => 1 + depth(left).max(depth(right)),
                Node::Leaf { .. } => 0,
            }
        }
        depth(&self.root)
    }

    /// Leaves holding more than `leaf_capacity` ids because no plane could
    /// separate their points.
    pub fn stuck_leaves(&self) -> usize {
        self.leaves()
            .iter()
            .filter(|l| l.len() > self.leaf_capacity)
            .count()
    }
}
