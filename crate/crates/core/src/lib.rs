//! Random projection forests with query modification.
//!
//! The crate builds forests of random projection trees over unit vectors and
//! answers k-nearest-neighbour queries in two modes: the plain RP-Forest
//! search, which routes every tree with the query, and the MQ-Forest search,
//! which after a warm-up routes with the normalized centroid of the current
//! candidates. Alongside the index live the statistical tools used to study
//! hash collisions around a neighbourhood.

pub mod candidate;
pub mod data;
pub mod error;
pub mod experiments;
pub mod forest;
pub mod hashing;
pub mod matrix;
pub mod rng;
pub mod rp_tree;
pub mod stats;
pub mod vector;

pub use candidate::{CandidateQueue, MergeStats};
pub use data::{brute_force_knn, gen_clustered_sphere, gen_uniform_sphere, GroundTruth};
pub use error::{Error, Result};
pub use forest::{Forest, Neighbour, QueryMode, QueryResult};
pub use matrix::DataMatrix;
pub use rp_tree::RpTree;
pub use vector::{UnitVector, Vector};
