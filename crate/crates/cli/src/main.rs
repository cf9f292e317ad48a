//! `gausscov` command-line driver.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "gausscov", version, about = "Stepwise selection with Gaussian covariate P-values")]
struct Cli {
    /// Output layout.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Print elapsed wall time to stderr.
    #[arg(long, global = true)]
    time: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned text table.
    Text,
    /// One JSON object per line.
    Records,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Forward stepwise selection.
    Select(SelectArgs),
    /// Repeated stepwise selection; each run is one group.
    SelectAll(SelectAllArgs),
    /// P-values for a given covariate set.
    Pvals(PvalsArgs),
    /// Expand a table to all interactions up to a given order.
    Interact(InteractArgs),
    /// Neighborhood-selection dependency graph of the columns.
    Graph(GraphArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Comma or whitespace separated numeric table.
    pub input: PathBuf,

    /// Response column, by header name or 1-based index [default: last column].
    #[arg(long, short)]
    pub response: Option<String>,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,

    /// Maximum number of covariates [default: n - 2].
    #[arg(long)]
    pub kmax: Option<usize>,

    /// Compare with the nu-th best Gaussian covariate.
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,

    /// Number of covariates the P-values account for [default: column count].
    #[arg(long)]
    pub ek: Option<f64>,

    /// Report misclassification counts for a categorical response.
    #[arg(long)]
    pub misclass: bool,

    /// Fit without an intercept.
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Args, Debug)]
pub struct SelectAllArgs {
    #[command(flatten)]
    pub select: SelectArgs,

    /// Maximum number of groups.
    #[arg(long)]
    pub nmax: Option<usize>,

    /// Maximum total number of covariates.
    #[arg(long)]
    pub vmax: Option<usize>,

    /// Also print the averaged fitted values of all groups.
    #[arg(long)]
    pub fitted: bool,
}

#[derive(Args, Debug)]
pub struct PvalsArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Comma-separated 1-based covariate indices.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ind: Vec<usize>,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Bound every member of a qualifying subset must meet.
    #[arg(long, default_value_t = 0.05)]
    pub alpha1: f64,

    /// Also score each subset extended by its best additional covariate.
    #[arg(long)]
    pub augmented: bool,

    /// Number of covariates the selection was made from [default: column count].
    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long)]
    pub misclass: bool,
}

#[derive(Args, Debug)]
pub struct InteractArgs {
    pub input: PathBuf,

    /// Highest total degree.
    #[arg(long)]
    pub ord: usize,

    /// Expanded table; the decode table goes to `<output>.decode`.
    #[arg(long, short)]
    pub output: PathBuf,

    /// Column kept out of the expansion and appended last.
    #[arg(long, short)]
    pub response: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EdgeRuleArg {
    Or,
    And,
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    pub input: PathBuf,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,

    /// Use repeated stepwise selection for each node.
    #[arg(long)]
    pub repeated: bool,

    /// Use alpha for every node instead of alpha divided by the node count.
    #[arg(long)]
    pub no_bonferroni: bool,

    /// Comma-separated 1-based node subset.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Option<Vec<usize>>,

    #[arg(long, value_enum, default_value_t = EdgeRuleArg::Or)]
    pub edge_rule: EdgeRuleArg,

    #[arg(long)]
    pub kmax: Option<usize>,

    /// Group limit for --repeated.
    #[arg(long)]
    pub nmax: Option<usize>,

    /// Edge file [default: stdout].
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SimulateCommand {
    /// Number of covariates selected under pure noise.
    Fp(SimFpArgs),
    /// False positives and negatives on sparse linear or logistic models.
    Tutorial(SimTutorialArgs),
    /// Graph recovery for a tridiagonal precision matrix.
    Graph(SimGraphArgs),
}

#[derive(Args, Debug)]
pub struct SimFpArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Largest selection count tabulated.
    #[arg(long, default_value_t = 10)]
    pub kmx: usize,
    #[arg(long, default_value_t = 100)]
    pub nsim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SimTutorialArgs {
    /// 1 for a linear response, 2 for a binary one.
    #[arg(long, default_value_t = 1)]
    pub variant: u8,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub k: usize,
    /// Number of active covariates.
    #[arg(long, default_value_t = 60)]
    pub s: usize,
    #[arg(long, default_value_t = 4.5)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 50)]
    pub nsim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SimGraphArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub k: usize,
    #[arg(long, default_value_t = 0.25)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Failure of a command, mapped to the process exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(gausscov::Error),
    Input { path: String, error: gausscov::Error },
}

impl From<gausscov::Error> for Failure {
    fn from(e: gausscov::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Lib(e) if e.is_data_error() => 2,
            Failure::Input { error, .. } if error.is_data_error() => 2,
            Failure::Lib(_) | Failure::Input { .. } => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Input { path, error } => write!(f, "{path}: {error}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let start = std::time::Instant::now();
    let out = match &cli.command {
        Command::Select(a) => commands::select(a, cli.format),
        Command::SelectAll(a) => commands::select_all(a, cli.format),
        Command::Pvals(a) => commands::pvals(a, cli.format),
        Command::Interact(a) => commands::interact(a, cli.format),
        Command::Graph(a) => commands::graph(a, cli.format),
        Command::Simulate(s) => commands::simulate(s, cli.format),
    };
    match out {
        Ok(text) => {
            print!("{text}");
            if cli.time {
                eprintln!("time: {:.4} s", start.elapsed().as_secs_f64());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gausscov: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
