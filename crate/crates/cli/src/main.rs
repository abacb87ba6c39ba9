use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use mqforest::data::{brute_force_knn, load_vectors, save_vectors};
use mqforest::experiments::{
    clt_rows, run_clt_experiment, run_covariance_experiment, run_delta_knn_experiment,
    run_hash_failure_experiment, run_kappa_experiment, run_recall_experiment, write_csv, CsvRow,
    DataSource, ExperimentConfig, ModeSelection, Workload,
};
use mqforest::forest::{DEFAULT_LEAF_CAPACITY, DEFAULT_WARMUP};
use mqforest::{Error, Forest, QueryMode};

#[derive(Parser)]
#[command(
    name = "mqf",
    version,
    about = "Random projection forests with query modification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset in fvecs format.
    Gen {
        /// `uniform:N:D` or `clustered:N:D:CLUSTERS:SPREAD`
        #[arg(long = "gen")]
        source: DataSource,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact nearest neighbours by linear scan.
    GroundTruth {
        #[arg(long)]
        data: PathBuf,
        /// Query vectors (fvecs).
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, default_value_t = 100)]
        k: usize,
        /// Writes `<out>.ivecs` (ids) and `<out>.dist.fvecs` (distances).
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a forest and save it.
    Build {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 32)]
        trees: usize,
        #[arg(long, default_value_t = DEFAULT_LEAF_CAPACITY)]
        ns: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Query a saved forest; writes `mode,query,rank,id,distance` CSV.
    Query {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        index: PathBuf,
        /// Query vectors (fvecs).
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_WARMUP)]
        v: usize,
        #[arg(long, value_enum, default_value_t = Mode::Mq)]
        mode: Mode,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment protocol and write its CSV.
    Bench {
        #[arg(value_enum)]
        kind: BenchKind,
        #[command(flatten)]
        opts: BenchOpts,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Rp,
    Mq,
    Both,
}

impl From<Mode> for ModeSelection {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Rp => ModeSelection::Rp,
            Mode::Mq => ModeSelection::Mq,
            Mode::Both => ModeSelection::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    Recall,
    HashFailure,
    Kappa,
    DeltaKnn,
    Covariance,
    Clt,
}

impl BenchKind {
    fn name(self) -> &'static str {
        match self {
            BenchKind::Recall => "recall",
            BenchKind::HashFailure => "hash-failure",
            BenchKind::Kappa => "kappa",
            BenchKind::DeltaKnn => "delta-knn",
            BenchKind::Covariance => "covariance",
            BenchKind::Clt => "clt",
        }
    }
}

#[derive(Args)]
struct BenchOpts {
    /// Dataset file (fvecs).
    #[arg(long, conflicts_with = "gen")]
    data: Option<PathBuf>,
    /// Generator used when no file is given.
    #[arg(long, default_value = "clustered:100000:64:50:0.15")]
    gen: DataSource,
    /// Number of queries drawn from the dataset and held out.
    #[arg(long, default_value_t = 250)]
    queries: usize,
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Comma-separated tree counts.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    trees: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_LEAF_CAPACITY)]
    ns: usize,
    #[arg(long, default_value_t = DEFAULT_WARMUP)]
    v: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,
    /// Comma-separated neighbourhood sizes for `kappa`.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "100,200,500,1000,2000,5000"
    )]
    m_values: Vec<usize>,
    /// Hash functions for `hash-failure`.
    #[arg(long, default_value_t = 1000)]
    functions: usize,
    /// Accepted planes per query for `covariance`.
    #[arg(long, default_value_t = 1000)]
    planes: usize,
    #[arg(long, default_value_t = 0.005)]
    b_tol: f64,
    /// Neighbourhood the `clt` estimate samples from.
    #[arg(long, default_value_t = 300)]
    radius: usize,
    /// Output directory; the main CSV goes to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl BenchOpts {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            source: match &self.data {
                Some(p) => DataSource::File(p.clone()),
                None => self.gen.clone(),
            },
            num_queries: self.queries,
            k: self.k,
            tree_counts: self.trees.clone(),
            leaf_capacity: self.ns,
            warmup: self.v,
            seed: self.seed,
            out_dir: self.out.clone(),
            m_values: self.m_values.clone(),
            num_functions: self.functions,
            num_planes: self.planes,
            b_tol: self.b_tol,
            clt_radius: self.radius,
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn progress(start: Instant, what: &str) {
    eprintln!("[{:>8.2}s] {what}", start.elapsed().as_secs_f64());
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// Writes to `<dir>/<name>` when a directory is given, else to stdout.
fn emit<R: CsvRow>(dir: Option<&Path>, name: &str, rows: &[R]) -> CliResult {
    match dir {
        Some(d) => {
            let path = d.join(name);
            write_csv(rows, create(&path)?)?;
            eprintln!("wrote {}", path.display());
        }
        None => write_csv(rows, io::stdout().lock())?,
    }
    Ok(())
}

/// Secondary outputs only go to a directory.
fn emit_extra<R: CsvRow>(dir: Option<&Path>, name: &str, rows: &[R]) -> CliResult {
    if dir.is_some() {
        emit(dir, name, rows)?;
    }
    Ok(())
}

struct QueryRow {
    mode: &'static str,
    query: usize,
    rank: usize,
    id: u32,
    distance: f64,
}

impl CsvRow for QueryRow {
    const HEADER: &'static [&'static str] = &["mode", "query", "rank", "id", "distance"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.mode.to_string(),
            self.query.to_string(),
            self.rank.to_string(),
            self.id.to_string(),
            self.distance.to_string(),
        ]
    }
}

struct CovarianceMeanRow {
    query: usize,
    mean_query: f64,
    mean_centroid: f64,
}

impl CsvRow for CovarianceMeanRow {
    const HEADER: &'static [&'static str] =
        &["query", "mean_offdiag_query", "mean_offdiag_centroid"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.query.to_string(),
            self.mean_query.to_string(),
            self.mean_centroid.to_string(),
        ]
    }
}

fn run(cli: Cli) -> CliResult {
    let start = Instant::now();
    match cli.command {
        Command::Gen { source, seed, out } => {
            let data = source.load(seed)?;
            progress(start, &format!("generated {} x {}", data.len(), data.dim()));
            save_vectors(&data, &out)?;
        }
        Command::GroundTruth {
            data,
            queries,
            k,
            out,
        } => {
            let data = load_vectors(&data)?;
            let queries = load_vectors(&queries)?;
            let truth = brute_force_knn(&data, &queries, k)?;
            progress(start, &format!("scanned {} queries", queries.len()));
            let ids = out.with_extension("ivecs");
            let dist = out.with_extension("dist.fvecs");
            truth.save(&ids, &dist)?;
        }
        Command::Build {
            data,
            trees,
            ns,
            seed,
            out,
        } => {
            let data = Arc::new(load_vectors(&data)?);
            let forest = Forest::build(data, trees, ns, seed)?;
            progress(start, &format!("built {trees} trees"));
            forest.write_to(create(&out)?)?;
        }
        Command::Query {
            data,
            index,
            queries,
            k,
            v,
            mode,
            out,
        } => {
            let data = Arc::new(load_vectors(&data)?);
            let file = File::open(&index)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", index.display())))?;
            let forest = Forest::read_from(BufReader::new(file), data)?;
            let queries = load_vectors(&queries)?;
            let mut rows = Vec::new();
            for &name in ModeSelection::from(mode).modes() {
                let qm = match name {
                    "rp" => QueryMode::Rp,
                    _ => QueryMode::Mq { warmup: v },
                };
                let results = (0..queries.len())
                    .into_par_iter()
                    .map(|qi| forest.query(&queries.unit_row(qi), k, qm))
                    .collect::<Result<Vec<_>, _>>()?;
                for (query, r) in results.iter().enumerate() {
                    rows.extend(r.neighbours.iter().enumerate().map(|(rank, n)| QueryRow {
                        mode: name,
                        query,
                        rank,
                        id: n.id,
                        distance: n.distance,
                    }));
                }
            }
            progress(start, &format!("answered {} queries", queries.len()));
            match out {
                Some(p) => write_csv(&rows, create(&p)?)?,
                None => write_csv(&rows, io::stdout().lock())?,
            }
        }
        Command::Bench { kind, opts } => bench(kind, &opts, start)?,
    }
    Ok(())
}

fn bench(kind: BenchKind, opts: &BenchOpts, start: Instant) -> CliResult {
    let cfg = opts.config();
    cfg.validate()?;
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let dir = cfg.out_dir.as_deref();
    let work = Workload::prepare(&cfg)?;
    progress(
        start,
        &format!(
            "{}: {} base points, {} queries",
            cfg.source,
            work.base.len(),
            work.queries.len()
        ),
    );
    let name = kind.name();
    match kind {
        BenchKind::Recall => {
            let truth = work.ground_truth(cfg.k)?;
            progress(start, "ground truth ready");
            let rows = run_recall_experiment(&cfg, &work, &truth, opts.mode.into())?;
            emit(dir, "recall.csv", &rows)?;
        }
        BenchKind::HashFailure => {
            let truth = work.ground_truth(cfg.k)?;
            let rep = run_hash_failure_experiment(&cfg, &work, &truth)?;
            eprintln!(
                "recall < 0.2: query {} pairs, centroid {} pairs; min recall query {}, centroid {}",
                rep.failures_query(),
                rep.failures_centroid(),
                rep.min_recall_query(),
                rep.min_recall_centroid()
            );
            emit(dir, "hash_failure.csv", &rep.rows)?;
        }
        BenchKind::Kappa => {
            let rows = run_kappa_experiment(&cfg, &work)?;
            emit(dir, "kappa.csv", &rows)?;
        }
        BenchKind::DeltaKnn => {
            let rows = run_delta_knn_experiment(&cfg, &work, opts.mode.into())?;
            emit(dir, "delta_knn.csv", &rows)?;
        }
        BenchKind::Covariance => {
            let truth = work.ground_truth(cfg.k)?;
            let rep = run_covariance_experiment(&cfg, &work, &truth)?;
            eprintln!(
                "mean off-diagonal covariance: query {}, centroid {}",
                rep.mean_query(),
                rep.mean_centroid()
            );
            emit(dir, "covariance.csv", &rep.histogram)?;
            let means: Vec<CovarianceMeanRow> = rep
                .offdiag_means_query
                .iter()
                .zip(&rep.offdiag_means_centroid)
                .enumerate()
                .map(|(query, (&mean_query, &mean_centroid))| CovarianceMeanRow {
                    query,
                    mean_query,
                    mean_centroid,
                })
                .collect();
            emit_extra(dir, "covariance_means.csv", &means)?;
        }
        BenchKind::Clt => {
            let rep = run_clt_experiment(&cfg, &work)?;
            let (rows, summary) = clt_rows(&rep);
            eprintln!(
                "violations {}, KS p-value {}",
                summary.violations, summary.ks_p_value
            );
            emit(dir, "clt.csv", &rows)?;
            emit_extra(dir, "clt_summary.csv", &[summary])?;
        }
    }
    progress(start, &format!("{name} done"));
    Ok(())
}

fn configure_threads() -> CliResult {
    let Ok(v) = std::env::var("MQF_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!("MQF_THREADS must be a positive integer, got {v:?}"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(cli));
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
