use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwin_core::{AggregateFunction, AggregateSpec, Direction, Graph, WindowSpec};

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "gwin",
    version,
    about = "Window aggregates over graphs, with dense-block and inheritance indices"
)]
pub struct Cli {
    /// Worker threads; defaults to all cores. Use 1 for bit-reproducible runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load or generate a graph, print its statistics, optionally re-emit it.
    Ingest(IngestArgs),
    /// Build and persist a dense-block or inheritance index.
    Build(BuildArgs),
    /// Evaluate a window aggregate for every vertex.
    Query(QueryArgs),
    /// Sweep synthetic graphs and time builds and queries.
    Bench(BenchArgs),
    /// Window-overlap profile, index validation and index size.
    Diag(DiagArgs),
    /// Replay a stream of edge insertions and deletions against an index.
    Update(UpdateArgs),
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    /// Edge list, one `u v` pair per line; a lone label declares an isolated vertex.
    #[arg(long)]
    pub graph: PathBuf,
    /// Read edges as directed arcs.
    #[arg(long)]
    pub directed: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum WindowKind {
    Khop,
    Topological,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Out,
    In,
    Undirected,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Out => Direction::Out,
            DirectionArg::In => Direction::In,
            DirectionArg::Undirected => Direction::Undirected,
        }
    }
}

#[derive(Args, Debug)]
pub struct WindowArgs {
    /// Window kind; `--k` alone implies khop.
    #[arg(long, value_enum)]
    pub window: Option<WindowKind>,
    /// Hop count of a k-hop window.
    #[arg(long)]
    pub k: Option<u32>,
    /// Traversal orientation; defaults to out on directed graphs.
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
}

impl WindowArgs {
    /// The requested spec, or `None` when no window flag was given.
    pub fn resolve(&self, g: &Graph) -> CliResult<Option<WindowSpec>> {
        let kind = match (self.window, self.k) {
            (Some(kind), _) => kind,
            (None, Some(_)) => WindowKind::Khop,
            (None, None) if self.direction.is_some() => {
                return Err(CliError::usage("--direction needs --k"));
            }
            (None, None) => return Ok(None),
        };
        match kind {
            WindowKind::Topological => {
                if self.k.is_some() || self.direction.is_some() {
                    return Err(CliError::usage(
                        "--k and --direction only apply to --window khop",
                    ));
                }
                Ok(Some(WindowSpec::topological()))
            }
            WindowKind::Khop => {
                let k = self.k.ok_or_else(|| CliError::usage("--window khop needs --k"))?;
                if k == 0 {
                    return Err(CliError::usage("--k must be at least 1"));
                }
                let direction = self.direction.map_or_else(|| Direction::default_for(g), Into::into);
                Ok(Some(WindowSpec::khop(k, direction)))
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AggArg {
    Sum,
    Count,
    Avg,
    Min,
    Max,
}

impl From<AggArg> for AggregateFunction {
    fn from(a: AggArg) -> Self {
        match a {
            AggArg::Sum => AggregateFunction::Sum,
            AggArg::Count => AggregateFunction::Count,
            AggArg::Avg => AggregateFunction::Avg,
            AggArg::Min => AggregateFunction::Min,
            AggArg::Max => AggregateFunction::Max,
        }
    }
}

#[derive(Args, Debug)]
pub struct AggArgs {
    #[arg(long, value_enum, default_value = "sum")]
    pub agg: AggArg,
    /// Attribute column; defaults to the first column of the attribute file.
    #[arg(long)]
    pub attr: Option<String>,
    /// CSV with a `vertex` column followed by integer attribute columns.
    #[arg(long)]
    pub attrs: Option<PathBuf>,
}

impl AggArgs {
    pub fn spec(&self, columns: &[String]) -> CliResult<AggregateSpec> {
        let function = AggregateFunction::from(self.agg);
        if function == AggregateFunction::Count {
            return Ok(AggregateSpec::count());
        }
        let attr = match (&self.attr, columns.first()) {
            (Some(a), _) => a.clone(),
            (None, Some(first)) => first.clone(),
            (None, None) => {
                return Err(CliError::usage(format!(
                    "{} needs --attrs with at least one column",
                    function.name()
                )))
            }
        };
        Ok(AggregateSpec::new(function, attr))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    /// Erdős–Rényi G(n, m).
    Er,
    /// Random DAG; always directed.
    Dag,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Edge list to load.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    pub input: Option<PathBuf>,
    /// Generate a synthetic graph instead of loading one.
    #[arg(long, value_enum)]
    pub generate: Option<GeneratorKind>,
    #[arg(long, requires = "generate")]
    pub n: Option<usize>,
    /// Average degree of the generated graph.
    #[arg(long, requires = "generate")]
    pub degree: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Treat edges as directed arcs.
    #[arg(long)]
    pub directed: bool,
    /// Write the canonical edge list here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write a random integer attribute column `x` here.
    #[arg(long)]
    pub attrs_out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Mc,
    Emc,
    Iindex,
}

impl StrategyArg {
    pub fn name(self) -> &'static str {
        match self {
            StrategyArg::Mc => "mc",
            StrategyArg::Emc => "emc",
            StrategyArg::Iindex => "iindex",
        }
    }
}

#[derive(Args, Debug)]
pub struct BuildParamArgs {
    /// Hop count of the windows used for EMC clustering.
    #[arg(long, default_value_t = 1)]
    pub k_cluster: u32,
    /// Hash functions per MinHash signature.
    #[arg(long, default_value_t = 4)]
    pub hashes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Clusters with more owners are split.
    #[arg(long, default_value_t = 4096)]
    pub max_cluster: usize,
    /// Refinement depth limit.
    #[arg(long, default_value_t = 8)]
    pub max_rounds: usize,
    /// Insertions after which `update` rebuilds the index.
    #[arg(long)]
    pub reorganize_threshold: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    #[command(flatten)]
    pub params: BuildParamArgs,
    /// Index file to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Write the JSON build report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write a JSON dump of the index.
    #[arg(long)]
    pub json_dump: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Index file from `build`.
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub agg: AggArgs,
    /// Evaluate by traversal, without an index.
    #[arg(long, conflicts_with = "verify")]
    pub oracle: bool,
    /// Evaluate with the index and by traversal and compare.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    /// Result file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Average degrees, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub degree: Vec<f64>,
    /// Hop counts, comma separated; ignored by iindex.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub k: Vec<u32>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mc,emc")]
    pub strategies: Vec<StrategyArg>,
    /// Timed query repetitions; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub hashes: usize,
    #[arg(long, default_value_t = 1)]
    pub k_cluster: u32,
    /// CSV file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DiagArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Median window Jaccard coefficient of adjacent pairs per hop count.
    #[arg(long)]
    pub jaccard: bool,
    #[arg(long, default_value_t = 3)]
    pub kmax: u32,
    /// Sampled edges for `--jaccard`.
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check the index against the graph.
    #[arg(long, requires = "index")]
    pub validate: bool,
    /// Report index size relative to the graph.
    #[arg(long, requires = "index")]
    pub size: bool,
    #[arg(long)]
    pub index: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct UpdateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub index: PathBuf,
    /// Lines `+ u v` (insert) or `- u v` (delete), using graph labels.
    #[arg(long)]
    pub stream: PathBuf,
    /// Where to write the updated index.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the updated edge list.
    #[arg(long)]
    pub graph_out: Option<PathBuf>,
    /// Compare against the non-indexed evaluation after every update.
    #[arg(long)]
    pub verify_each: bool,
    #[command(flatten)]
    pub agg: AggArgs,
    /// Write the JSON update report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}
