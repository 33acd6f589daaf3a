//! `multiorder` — fit multi-order models to path data from the command
//! line.
//!
//! One binary, five subcommands: `detect` selects the optimal maximum
//! order of a path collection, `extract` turns a temporal edge stream
//! into time-respecting paths, `rank` computes projected higher-order
//! PageRank, `generate` produces seeded synthetic path data with a known
//! order, and `baseline` reports conventional AIC/BIC order selection for
//! comparison.
//!
//! Every command is deterministic given its inputs, flags, and seeds.
//! Exit codes: 0 on success, 1 for analysis errors (unfittable orders,
//! degenerate inputs), 2 for I/O and parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use multiorder::{
    baseline_order_aic_bic, extract_time_respecting_paths, kendall_tau, pagerank_pipeline,
    select_order, visitation_probabilities, DirectedGraph, Error, ExtractionMode, GeneratorSpec,
    PageRankOptions, PathCollection, PathLength, RankingOptions, SelectionOptions, TemporalNetwork,
    TestStatistic, auc_top_fraction,
};

#[derive(Parser)]
#[command(
    name = "multiorder",
    version,
    about = "Multi-order models for paths in networks: order detection, \
             time-respecting path extraction, higher-order ranking, and \
             synthetic data generation",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect the optimal maximum order of a path collection
    Detect(DetectArgs),
    /// Extract time-respecting paths from a temporal edge list
    Extract(ExtractArgs),
    /// Rank vertices by projected higher-order PageRank
    Rank(RankArgs),
    /// Generate synthetic paths with a known correlation order
    Generate(GenerateArgs),
    /// Select an order with conventional AIC/BIC on concatenated paths
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// Path file: one comma-separated path per line, optional
    /// tab-separated frequency
    pathfile: PathBuf,
    /// Edge list file (source<TAB>target per line) declaring the allowed
    /// transitions; must cover every edge the paths traverse. Defaults to
    /// the graph induced by the paths themselves.
    #[arg(long, value_name = "FILE")]
    edges: Option<PathBuf>,
    /// Highest order to consider
    #[arg(long, default_value_t = multiorder::DEFAULT_MAX_ORDER)]
    max_order: usize,
    /// Significance threshold for the likelihood-ratio tests
    #[arg(long, default_value_t = multiorder::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Use the raw log-likelihood ratio as the test statistic instead of
    /// twice the ratio
    #[arg(long)]
    lr_no_factor2: bool,
    /// Character separating vertices within a path line
    #[arg(long, default_value_t = ',')]
    separator: char,
    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Temporal edge file: source<TAB>target<TAB>timestamp per line
    temporalfile: PathBuf,
    /// Maximum waiting time between consecutive edges of a path
    #[arg(long)]
    delta: i64,
    /// Emit every time-respecting path instead of only maximal ones
    #[arg(long)]
    all_paths: bool,
    /// Shuffle timestamps with this seed before extracting (null model)
    #[arg(long, value_name = "SEED")]
    shuffle_seed: Option<u64>,
    /// Character separating vertices in the emitted path file
    #[arg(long, default_value_t = ',')]
    separator: char,
    /// Write the path file here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    /// Path file to rank vertices of
    pathfile: PathBuf,
    /// Order of the state graph PageRank runs on
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// PageRank damping factor
    #[arg(long, default_value_t = multiorder::ranking::DEFAULT_ALPHA)]
    alpha: f64,
    /// Weight state transitions by estimated probabilities instead of
    /// binary adjacency
    #[arg(long)]
    weighted: bool,
    /// Append a metrics line comparing the ranking against visitation
    /// probabilities (Kendall tau and top-fraction AUC)
    #[arg(long)]
    ground_truth: bool,
    /// Truth fraction counted as positive for the AUC metric
    #[arg(long, default_value_t = 0.1)]
    top_fraction: f64,
    /// Character separating vertices within a path line
    #[arg(long, default_value_t = ',')]
    separator: char,
    /// Write the TSV ranking here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of vertices of the random graph
    #[arg(long)]
    vertices: usize,
    /// Number of directed edges of the random graph
    #[arg(long)]
    edges: usize,
    /// True order of the generating chain
    #[arg(long)]
    order: usize,
    /// Number of paths to generate
    #[arg(long)]
    paths: u64,
    /// Length of every path, in edges
    #[arg(long)]
    length: usize,
    /// Dirichlet concentration; lower means stronger correlations
    #[arg(long, default_value_t = 0.1)]
    concentration: f64,
    /// Seed driving graph, chain, and path randomness
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Character separating vertices in the emitted path file
    #[arg(long, default_value_t = ',')]
    separator: char,
    /// Write the path file here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    /// Path file to select an order for
    pathfile: PathBuf,
    /// Highest order to consider
    #[arg(long, default_value_t = multiorder::DEFAULT_MAX_ORDER)]
    max_order: usize,
    /// Character separating vertices within a path line
    #[arg(long, default_value_t = ',')]
    separator: char,
    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// A failure carrying the exit code its class maps to.
struct Failure {
    message: String,
    code: u8,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Parse { .. } => 2,
            _ => 1,
        };
        Failure {
            message: error.to_string(),
            code,
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|error| Failure {
        message: format!("cannot read {}: {error}", path.display()),
        code: 2,
    })
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content).map_err(|error| Failure {
            message: format!("cannot write {}: {error}", path.display()),
            code: 2,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut rendered =
        serde_json::to_string_pretty(value).expect("reports serialize without fail");
    rendered.push('\n');
    rendered
}

/// Dataset block of the detection report, mirroring path-statistics
/// summary tables: vertex and edge counts of the graph the test used,
/// observation counts, and the path length range.
#[derive(Serialize)]
struct DatasetSummary {
    vertices: usize,
    edges: usize,
    observations: u64,
    distinct_paths: usize,
    min_length: usize,
    max_length: usize,
}

#[derive(Serialize)]
struct DetectionReport {
    dataset: DatasetSummary,
    k_opt: usize,
    epsilon: f64,
    tests: Vec<multiorder::OrderTest>,
}

fn cmd_detect(args: &DetectArgs) -> Result<(), Failure> {
    let text = read_input(&args.pathfile)?;
    let paths = PathCollection::parse_with_separator(&text, args.separator)?;
    let graph = match &args.edges {
        Some(edgefile) => {
            let edge_text = read_input(edgefile)?;
            Arc::new(DirectedGraph::parse_edge_list(
                &edge_text,
                Some(paths.index()),
            )?)
        }
        None => Arc::new(DirectedGraph::from_paths(&paths)),
    };
    let options = SelectionOptions {
        max_order: args.max_order,
        epsilon: args.epsilon,
        statistic: if args.lr_no_factor2 {
            TestStatistic::LogRatio
        } else {
            TestStatistic::Wilks
        },
    };
    let selection = select_order(&paths, Arc::clone(&graph), &options)?;
    let report = DetectionReport {
        dataset: DatasetSummary {
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
            observations: paths.observation_count(),
            distinct_paths: paths.distinct_count(),
            min_length: paths.min_length().expect("selection needs paths"),
            max_length: paths.max_length().expect("selection needs paths"),
        },
        k_opt: selection.k_opt,
        epsilon: selection.epsilon,
        tests: selection.tests,
    };
    emit(args.out.as_deref(), &to_json(&report))
}

fn cmd_extract(args: &ExtractArgs) -> Result<(), Failure> {
    let text = read_input(&args.temporalfile)?;
    let mut network = TemporalNetwork::parse(&text)?;
    if let Some(seed) = args.shuffle_seed {
        network = network.shuffled_timestamps(seed);
    }
    let mode = if args.all_paths {
        ExtractionMode::All
    } else {
        ExtractionMode::Maximal
    };
    let paths = extract_time_respecting_paths(&network, args.delta, mode)?;
    emit(args.out.as_deref(), &paths.write_paths(args.separator)?)
}

/// Metrics line appended to the ranking when ground truth is requested.
#[derive(Serialize)]
struct RankMetrics {
    order: usize,
    alpha: f64,
    weighted: bool,
    kendall_tau: f64,
    top_fraction: f64,
    auc: f64,
}

fn cmd_rank(args: &RankArgs) -> Result<(), Failure> {
    let text = read_input(&args.pathfile)?;
    let paths = PathCollection::parse_with_separator(&text, args.separator)?;
    let options = RankingOptions {
        pagerank: PageRankOptions {
            alpha: args.alpha,
            ..PageRankOptions::default()
        },
        weighted: args.weighted,
    };
    let scores = pagerank_pipeline(&paths, args.order, &options)?;
    let mut output = scores.write_tsv();
    if args.ground_truth {
        let truth = visitation_probabilities(&paths)?;
        let metrics = RankMetrics {
            order: args.order,
            alpha: args.alpha,
            weighted: args.weighted,
            kendall_tau: kendall_tau(&scores, &truth)?,
            top_fraction: args.top_fraction,
            auc: auc_top_fraction(&scores, &truth, args.top_fraction)?,
        };
        output.push_str("# ");
        output.push_str(
            &serde_json::to_string(&metrics).expect("metrics serialize without fail"),
        );
        output.push('\n');
    }
    emit(args.out.as_deref(), &output)
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), Failure> {
    let spec = GeneratorSpec {
        n_vertices: args.vertices,
        n_edges: args.edges,
        order: args.order,
        n_paths: args.paths,
        path_length: PathLength::Fixed(args.length),
        concentration: args.concentration,
        seed: args.seed,
    };
    let data = spec.generate()?;
    let header = format!(
        "# generated: vertices={} edges={} order={} paths={} length={} \
         concentration={} seed={}\n",
        args.vertices,
        args.edges,
        args.order,
        args.paths,
        args.length,
        args.concentration,
        args.seed,
    );
    let body = data.paths.write_paths(args.separator)?;
    emit(args.out.as_deref(), &format!("{header}{body}"))
}

fn cmd_baseline(args: &BaselineArgs) -> Result<(), Failure> {
    let text = read_input(&args.pathfile)?;
    let paths = PathCollection::parse_with_separator(&text, args.separator)?;
    let selection = baseline_order_aic_bic(&paths, args.max_order)?;
    emit(args.out.as_deref(), &to_json(&selection))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Baseline(args) => cmd_baseline(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
