//! Experiment protocols behind the `mqf bench` subcommands.
//!
//! Every run is a pure function of its [`ExperimentConfig`]: queries are
//! processed in parallel with one random stream each and rows are gathered
//! in query order, so rerunning with the same seed reproduces the CSV byte
//! for byte.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::data::{
    brute_force_knn, gen_clustered_sphere, gen_uniform_sphere, load_vectors, recall, split_queries,
    GroundTruth,
};
use crate::error::{Error, Result};
use crate::forest::{Forest, QueryMode, DEFAULT_LEAF_CAPACITY, DEFAULT_WARMUP};
use crate::hashing::{extremes, sample_hyperplane, sample_offset, HyperplaneHash};
use crate::matrix::DataMatrix;
use crate::rng::{stream_rng, streams};
use crate::stats::clt::{clt_coordinate_experiment, CltReport};
use crate::stats::covariance::empirical_hash_covariance;
use crate::stats::kappa::{kappa, KappaSample};
use crate::stats::Histogram;
use crate::vector::{dot, normalized_centroid, UnitVector};

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Uniform {
        n: usize,
        dim: usize,
    },
    Clustered {
        n: usize,
        dim: usize,
        clusters: usize,
        spread: f64,
    },
}

impl DataSource {
    pub fn load(&self, seed: u64) -> Result<DataMatrix> {
        match self {
            DataSource::File(path) => load_vectors(path),
            DataSource::Uniform { n, dim } => gen_uniform_sphere(*n, *dim, seed),
            DataSource::Clustered {
                n,
                dim,
                clusters,
                spread,
            } => Ok(gen_clustered_sphere(*n, *dim, *clusters, *spread, seed)?.data),
        }
    }
}

/// `uniform:N:D` or `clustered:N:D:CLUSTERS:SPREAD`.
impl FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse generator description {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let int = |i: usize| parts[i].parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["uniform", _, _] => Ok(DataSource::Uniform {
                n: int(1)?,
                dim: int(2)?,
            }),
            ["clustered", _, _, _, spread] => Ok(DataSource::Clustered {
                n: int(1)?,
                dim: int(2)?,
                clusters: int(3)?,
                spread: spread.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSource::File(p) => write!(f, "{}", p.display()),
            DataSource::Uniform { n, dim } => write!(f, "uniform:{n}:{dim}"),
            DataSource::Clustered {
                n,
                dim,
                clusters,
                spread,
            } => write!(f, "clustered:{n}:{dim}:{clusters}:{spread}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub num_queries: usize,
    pub k: usize,
    pub tree_counts: Vec<usize>,
    pub leaf_capacity: usize,
    pub warmup: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    /// Neighbourhood sizes for the kappa run.
    pub m_values: Vec<usize>,
    /// Hash functions per query in the hash-failure run.
    pub num_functions: usize,
    /// Accepted planes per query in the covariance run.
    pub num_planes: usize,
    pub b_tol: f64,
    /// Neighbourhood the CLT run samples its estimate from.
    pub clt_radius: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Clustered {
                n: 100_000,
                dim: 64,
                clusters: 50,
                spread: 0.15,
            },
            num_queries: 250,
            k: 100,
            tree_counts: vec![8, 16, 32],
            leaf_capacity: DEFAULT_LEAF_CAPACITY,
            warmup: DEFAULT_WARMUP,
            seed: 1,
            out_dir: None,
            m_values: vec![100, 200, 500, 1000, 2000, 5000],
            num_functions: 1000,
            num_planes: 1000,
            b_tol: 0.005,
            clt_radius: 300,
        }
    }
}

impl ExperimentConfig {
    /// Checks everything that does not need the data.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_queries", self.num_queries),
            ("k", self.k),
            ("leaf_capacity", self.leaf_capacity),
            ("warmup", self.warmup),
            ("num_functions", self.num_functions),
            ("num_planes", self.num_planes),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.tree_counts.is_empty() || self.tree_counts.contains(&0) {
            return Err(Error::InvalidParameter(
                "tree counts must be positive".into(),
            ));
        }
        if self.b_tol.is_nan() || self.b_tol <= 0.0 {
            return Err(Error::InvalidParameter("b_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Base points and held-out queries.
#[derive(Clone, Debug)]
pub struct Workload {
    pub base: Arc<DataMatrix>,
    pub queries: DataMatrix,
}

impl Workload {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let data = cfg.source.load(cfg.seed)?;
        if cfg.num_queries >= data.len() || cfg.k > data.len() - cfg.num_queries {
            return Err(Error::InvalidParameter(format!(
                "k = {} and {} queries do not fit {} points",
                cfg.k,
                cfg.num_queries,
                data.len()
            )));
        }
        Self::from_data(&data, cfg.num_queries, cfg.seed)
    }

    /// Draws `num_queries` held-out queries from `data`.
    pub fn from_data(data: &DataMatrix, num_queries: usize, seed: u64) -> Result<Self> {
        let (base, queries) = split_queries(data, num_queries, seed)?;
        Ok(Self {
            base: Arc::new(base),
            queries,
        })
    }

    pub fn ground_truth(&self, k: usize) -> Result<GroundTruth> {
        brute_force_knn(&self.base, &self.queries, k)
    }

    fn neighbours(&self, truth: &GroundTruth, qi: usize) -> Vec<UnitVector> {
        truth
            .ids(qi)
            .iter()
            .map(|&i| self.base.unit_row(i as usize))
            .collect()
    }
}

/// One CSV record type.
pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// Writes a header and `rows` with LF line endings and shortest round-trip
/// float formatting.
pub fn write_csv<R: CsvRow, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: CsvRow>(rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeSelection {
    Rp,
    Mq,
    Both,
}

impl FromStr for ModeSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rp" => Ok(Self::Rp),
            "mq" => Ok(Self::Mq),
            "both" => Ok(Self::Both),
            _ => Err(Error::InvalidParameter(format!("unknown mode {s:?}"))),
        }
    }
}

impl ModeSelection {
    pub fn modes(self) -> &'static [&'static str] {
        match self {
            Self::Rp => &["rp"],
            Self::Mq => &["mq"],
            Self::Both => &["rp", "mq"],
        }
    }
}

/// The query mode named `name` on a forest of `trees` trees. A warm-up
/// longer than the forest is cut to the forest size.
fn mode_for(name: &str, warmup: usize, trees: usize) -> QueryMode {
    match name {
        "rp" => QueryMode::Rp,
        _ => QueryMode::Mq {
            warmup: warmup.min(trees),
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecallRow {
    pub tree_count: usize,
    pub mode: &'static str,
    pub mean_recall: f64,
    pub mean_distance_computations: f64,
}

impl CsvRow for RecallRow {
    const HEADER: &'static [&'static str] = &[
        "tree_count",
        "mode",
        "mean_recall",
        "mean_distance_computations",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.tree_count.to_string(),
            self.mode.to_string(),
            self.mean_recall.to_string(),
            self.mean_distance_computations.to_string(),
        ]
    }
}

/// Recall@k and distance computations per tree count and mode. The largest
/// forest is built once; smaller counts use its leading trees, so every mode
/// and count searches exactly the same trees.
pub fn run_recall_experiment(
    cfg: &ExperimentConfig,
    work: &Workload,
    truth: &GroundTruth,
    modes: ModeSelection,
) -> Result<Vec<RecallRow>> {
    cfg.validate()?;
    let max_trees = *cfg.tree_counts.iter().max().expect("validated non-empty");
    let forest = Forest::build(
        Arc::clone(&work.base),
        max_trees,
        cfg.leaf_capacity,
        cfg.seed,
    )?;
    let truth = truth.truncated(cfg.k)?;
    let mut rows = Vec::new();
    for &t in &cfg.tree_counts {
        let f = forest.prefix(t)?;
        for &name in modes.modes() {
            let mode = mode_for(name, cfg.warmup, t);
            let per_query = (0..work.queries.len())
                .into_par_iter()
                .map(|qi| {
                    let r = f.query(&work.queries.unit_row(qi), cfg.k, mode)?;
                    Ok((
                        recall(&r.ids(), truth.ids(qi)),
                        r.distance_computations as f64,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(RecallRow {
                tree_count: t,
                mode: name,
                mean_recall: mean(per_query.iter().map(|p| p.0)),
                mean_distance_computations: mean(per_query.iter().map(|p| p.1)),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HashFailureRow {
    pub query: usize,
    pub function: usize,
    pub recall_query: f64,
    pub recall_centroid: f64,
}

impl CsvRow for HashFailureRow {
    const HEADER: &'static [&'static str] =
        &["query", "function", "recall_query", "recall_centroid"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.query.to_string(),
            self.function.to_string(),
            self.recall_query.to_string(),
            self.recall_centroid.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HashFailureReport {
    pub rows: Vec<HashFailureRow>,
}

/// Recall below this counts as a hash failure.
pub const FAILURE_RECALL: f64 = 0.2;

impl HashFailureReport {
    pub fn failures_query(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.recall_query < FAILURE_RECALL)
            .count()
    }

    pub fn failures_centroid(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.recall_centroid < FAILURE_RECALL)
            .count()
    }

    pub fn min_recall_query(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.recall_query)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_recall_centroid(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.recall_centroid)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Draws `count` offset hyperplane functions, offsets uniform between the
/// extreme projections of the whole dataset.
pub fn sample_rp_functions(
    data: &DataMatrix,
    count: usize,
    seed: u64,
) -> Result<Vec<HyperplaneHash>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, streams::PLANES + i as u64);
            let w = sample_hyperplane(data.dim(), &mut rng)?;
            let p: Vec<f64> = data.rows().map(|x| dot(&w, x)).collect();
            let offset = sample_offset(&p, &mut rng)?;
            HyperplaneHash::new(w, offset)
        })
        .collect()
}

/// For every query and function, the fraction of the query's `k` nearest
/// neighbours that land on the same side as the query, and as the
/// normalized centroid of those neighbours.
pub fn run_hash_failure_experiment(
    cfg: &ExperimentConfig,
    work: &Workload,
    truth: &GroundTruth,
) -> Result<HashFailureReport> {
    let truth = truth.truncated(cfg.k)?;
    let functions = sample_rp_functions(&work.base, cfg.num_functions, cfg.seed)?;
    let per_query = (0..work.queries.len())
        .into_par_iter()
        .map(|qi| {
            let q = work.queries.unit_row(qi);
            let knn = work.neighbours(&truth, qi);
            let c = normalized_centroid(&knn)?;
            let rows = functions
                .iter()
                .enumerate()
                .map(|(fi, h)| {
                    let bits: Vec<bool> = knn.iter().map(|x| h.side(x)).collect();
                    let frac = |side: bool| {
                        bits.iter().filter(|&&b| b == side).count() as f64 / bits.len() as f64
                    };
                    HashFailureRow {
                        query: qi,
                        function: fi,
                        recall_query: frac(h.side(&q)),
                        recall_centroid: frac(h.side(&c)),
                    }
                })
                .collect::<Vec<_>>();
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HashFailureReport {
        rows: per_query.into_iter().flatten().collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaRow {
    pub m: usize,
    pub mean_kappa: f64,
}

impl CsvRow for KappaRow {
    const HEADER: &'static [&'static str] = &["m", "mean_kappa"];

    fn fields(&self) -> Vec<String> {
        vec![self.m.to_string(), self.mean_kappa.to_string()]
    }
}

/// Per query and `m`, draws `k` of the `m` nearest neighbours and scores the
/// normalized centroid of the draw with kappa.
pub fn run_kappa_experiment(cfg: &ExperimentConfig, work: &Workload) -> Result<Vec<KappaRow>> {
    cfg.validate()?;
    if cfg.m_values.is_empty() {
        return Err(Error::InvalidParameter(
            "no neighbourhood sizes given".into(),
        ));
    }
    if let Some(&m) = cfg.m_values.iter().find(|&&m| m < cfg.k) {
        return Err(Error::InvalidParameter(format!(
            "m = {m} is smaller than k = {}",
            cfg.k
        )));
    }
    let m_max = *cfg.m_values.iter().max().expect("non-empty");
    let truth = work.ground_truth(m_max)?;
    let per_query = (0..work.queries.len())
        .into_par_iter()
        .map(|qi| {
            let mut rng = stream_rng(cfg.seed, streams::MONTE_CARLO + qi as u64);
            let q = work.queries.unit_row(qi);
            let ids = truth.ids(qi);
            let rows = |picks: &mut dyn Iterator<Item = usize>| -> Vec<UnitVector> {
                picks.map(|i| work.base.unit_row(ids[i] as usize)).collect()
            };
            let c = normalized_centroid(&rows(&mut (0..cfg.k)))?;
            cfg.m_values
                .iter()
                .map(|&m| {
                    let drawn = sample(&mut rng, m, cfg.k);
                    let estimate = normalized_centroid(&rows(&mut drawn.iter()))?;
                    Ok(KappaSample {
                        m,
                        kappa: kappa(&q, &c, &estimate)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cfg
        .m_values
        .iter()
        .enumerate()
        .map(|(i, &m)| KappaRow {
            m,
            mean_kappa: mean(per_query.iter().map(|s| s[i].kappa)),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaKnnRow {
    pub mode: &'static str,
    /// 1-based.
    pub tree_index: usize,
    pub mean_insertions: f64,
}

impl CsvRow for DeltaKnnRow {
    const HEADER: &'static [&'static str] = &["mode", "tree_index", "mean_insertions"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.mode.to_string(),
            self.tree_index.to_string(),
            self.mean_insertions.to_string(),
        ]
    }
}

/// Mean number of queue insertions contributed by each successive tree of a
/// forest of `max(tree_counts)` trees.
pub fn run_delta_knn_experiment(
    cfg: &ExperimentConfig,
    work: &Workload,
    modes: ModeSelection,
) -> Result<Vec<DeltaKnnRow>> {
    cfg.validate()?;
    let trees = *cfg.tree_counts.iter().max().expect("validated non-empty");
    let forest = Forest::build(Arc::clone(&work.base), trees, cfg.leaf_capacity, cfg.seed)?;
    let mut rows = Vec::new();
    for &name in modes.modes() {
        let mode = mode_for(name, cfg.warmup, trees);
        let per_query = (0..work.queries.len())
            .into_par_iter()
            .map(|qi| {
                Ok(forest
                    .query(&work.queries.unit_row(qi), cfg.k, mode)?
                    .per_tree_delta_knn)
            })
            .collect::<Result<Vec<_>>>()?;
        for t in 0..trees {
            rows.push(DeltaKnnRow {
                mode: name,
                tree_index: t + 1,
                mean_insertions: mean(per_query.iter().map(|d| d[t] as f64)),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceRow {
    pub input: &'static str,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
}

impl CsvRow for CovarianceRow {
    const HEADER: &'static [&'static str] = &["input", "bin_lo", "bin_hi", "count"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.input.to_string(),
            self.bin_lo.to_string(),
            self.bin_hi.to_string(),
            self.count.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceReport {
    pub histogram: Vec<CovarianceRow>,
    /// Per-query mean off-diagonal covariance with `u = q`.
    pub offdiag_means_query: Vec<f64>,
    /// Per-query mean off-diagonal covariance with `u = ⟨c⟩`.
    pub offdiag_means_centroid: Vec<f64>,
}

impl CovarianceReport {
    pub fn mean_query(&self) -> f64 {
        mean(self.offdiag_means_query.iter().copied())
    }

    pub fn mean_centroid(&self) -> f64 {
        mean(self.offdiag_means_centroid.iter().copied())
    }
}

pub const COVARIANCE_BINS: usize = 100;

/// Off-diagonal height covariances of each query's neighbours under planes
/// nearly perpendicular to the query and to the neighbours' centroid. Both
/// inputs share one set of histogram bins.
pub fn run_covariance_experiment(
    cfg: &ExperimentConfig,
    work: &Workload,
    truth: &GroundTruth,
) -> Result<CovarianceReport> {
    cfg.validate()?;
    let truth = truth.truncated(cfg.k)?;
    let per_query = (0..work.queries.len())
        .into_par_iter()
        .map(|qi| {
            let knn = work.neighbours(&truth, qi);
            let q = work.queries.unit_row(qi);
            let c = normalized_centroid(&knn)?;
            let mut rng = stream_rng(cfg.seed, streams::MONTE_CARLO + 2 * qi as u64);
            let with_q = empirical_hash_covariance(&knn, &q, cfg.num_planes, cfg.b_tol, &mut rng)?;
            let mut rng = stream_rng(cfg.seed, streams::MONTE_CARLO + 2 * qi as u64 + 1);
            let with_c = empirical_hash_covariance(&knn, &c, cfg.num_planes, cfg.b_tol, &mut rng)?;
            Ok((with_q, with_c))
        })
        .collect::<Result<Vec<_>>>()?;

    let all_q: Vec<f64> = per_query
        .iter()
        .flat_map(|p| p.0.offdiag.iter().copied())
        .collect();
    let all_c: Vec<f64> = per_query
        .iter()
        .flat_map(|p| p.1.offdiag.iter().copied())
        .collect();
    let both: Vec<f64> = all_q.iter().chain(&all_c).copied().collect();
    let (lo, hi) = extremes(&both).unwrap_or((0.0, 0.0));
    let mut histogram = Vec::new();
    for (input, values) in [("query", &all_q), ("centroid", &all_c)] {
        let h = Histogram::new(values, COVARIANCE_BINS, lo, hi);
        for (i, &count) in h.counts.iter().enumerate() {
            let (bin_lo, bin_hi) = h.bin_edges(i);
            histogram.push(CovarianceRow {
                input,
                bin_lo,
                bin_hi,
                count,
            });
        }
    }
    Ok(CovarianceReport {
        histogram,
        offdiag_means_query: per_query.iter().map(|p| p.0.offdiag_mean).collect(),
        offdiag_means_centroid: per_query.iter().map(|p| p.1.offdiag_mean).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CltRow {
    pub query: usize,
    pub c_minus_q: f64,
    pub c_hat_minus_q: f64,
    pub c_hat_minus_c: f64,
    pub scaled_c_minus_q: f64,
    pub r_true: f64,
    pub r_sampled: f64,
    pub violation: bool,
}

impl CsvRow for CltRow {
    const HEADER: &'static [&'static str] = &[
        "query",
        "c_minus_q",
        "c_hat_minus_q",
        "c_hat_minus_c",
        "scaled_c_minus_q",
        "r_true",
        "r_sampled",
        "violation",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.query.to_string(),
            self.c_minus_q.to_string(),
            self.c_hat_minus_q.to_string(),
            self.c_hat_minus_c.to_string(),
            self.scaled_c_minus_q.to_string(),
            self.r_true.to_string(),
            self.r_sampled.to_string(),
            u8::from(self.violation).to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CltSummaryRow {
    pub queries: usize,
    pub var_c_minus_q: f64,
    pub var_c_hat_minus_q: f64,
    pub var_c_hat_minus_c: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub violations: usize,
}

impl CsvRow for CltSummaryRow {
    const HEADER: &'static [&'static str] = &[
        "queries",
        "var_c_minus_q",
        "var_c_hat_minus_q",
        "var_c_hat_minus_c",
        "ks_statistic",
        "ks_p_value",
        "violations",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.queries.to_string(),
            self.var_c_minus_q.to_string(),
            self.var_c_hat_minus_q.to_string(),
            self.var_c_hat_minus_c.to_string(),
            self.ks_statistic.to_string(),
            self.ks_p_value.to_string(),
            self.violations.to_string(),
        ]
    }
}

pub fn run_clt_experiment(cfg: &ExperimentConfig, work: &Workload) -> Result<CltReport> {
    cfg.validate()?;
    clt_coordinate_experiment(&work.base, &work.queries, cfg.k, cfg.clt_radius, cfg.seed)
}

pub fn clt_rows(report: &CltReport) -> (Vec<CltRow>, CltSummaryRow) {
    let rows = report
        .per_query
        .iter()
        .enumerate()
        .map(|(query, r)| CltRow {
            query,
            c_minus_q: r.c_minus_q,
            c_hat_minus_q: r.c_hat_minus_q,
            c_hat_minus_c: r.c_hat_minus_c,
            scaled_c_minus_q: r.scaled_c_minus_q(),
            r_true: r.r_true,
            r_sampled: r.r_sampled,
            violation: r.violation,
        })
        .collect();
    let summary = CltSummaryRow {
        queries: report.per_query.len(),
        var_c_minus_q: report.variance_c_minus_q(),
        var_c_hat_minus_q: report.variance_c_hat_minus_q(),
        var_c_hat_minus_c: report.variance_c_hat_minus_c(),
        ks_statistic: report.ratio_scaling.statistic,
        ks_p_value: report.ratio_scaling.p_value,
        violations: report.violations,
    };
    (rows, summary)
}
