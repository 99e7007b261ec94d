mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fairagg::selection::parse_fraction;

#[derive(Parser, Debug)]
#[command(
    name = "fairagg",
    version,
    about = "Aggregated fairness metrics and trade-off comparison"
)]
#[command(args_override_self = true)]
struct Cli {
    /// Log verbosity (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-class, per-group metric table from predictions or confusion counts.
    Metrics(MetricsArgs),
    /// One fairness score from a metric matrix.
    Aggregate(AggregateArgs),
    /// Pareto frontier of a set of trade-off points.
    Frontier(FrontierArgs),
    /// Distance of one point to the utopia point.
    Dto(DtoArgs),
    /// Area under the trade-off frontier, optionally constrained.
    Auc(AucArgs),
    /// Pick one config of one method from a sweep manifest.
    Select(SelectArgs),
    /// Selection table and frontier areas for every method in a manifest.
    Compare(CompareArgs),
    /// Fairness evaluation checklist with dataset statistics.
    Report(ReportArgs),
    /// Synthetic prediction records with controlled true positive rates.
    Fixture(FixtureArgs),
}

/// Accepts `0.82` or `82%`.
pub(crate) fn fraction(s: &str) -> Result<f64, String> {
    parse_fraction(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug, Clone)]
pub(crate) struct DataInput {
    /// Prediction records (instance_id,y,y_hat,z,split), or `-` for stdin.
    #[arg(long, conflicts_with = "confusions")]
    records: Option<String>,
    /// Schema for the records; inferred from the records when omitted.
    #[arg(long, requires = "records")]
    schema: Option<String>,
    /// Keep only records of this split.
    #[arg(long, requires = "records")]
    split: Option<String>,
    /// Per-group confusion counts.
    #[arg(long)]
    confusions: Option<String>,
}

#[derive(Args, Debug)]
pub(crate) struct MetricsArgs {
    #[command(flatten)]
    input: DataInput,
    #[arg(long, default_value = "tpr")]
    metric: String,
    #[arg(long, default_value = "pooled")]
    mean_mode: String,
    /// Also write the per-group confusion counts to this file.
    #[arg(long)]
    export_confusions: Option<String>,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub(crate) struct SpecArgs {
    /// Named aggregation (see `--list-presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Basic unit: score, gap, ratio, gap_threshold, ratio_threshold.
    #[arg(long)]
    unit: Option<String>,
    /// Group reducer: power_mean, sum, variance, range, max_min_ratio.
    #[arg(long)]
    reducer: Option<String>,
    /// Exponent of the power-mean reducer (`inf`, `-inf` or a non-zero number).
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Class aggregation: mean, quadratic_mean, binary, generalized_mean.
    #[arg(long)]
    class_method: Option<String>,
    /// Class index used by `binary`.
    #[arg(long)]
    class_index: Option<usize>,
    /// Exponent used by the `generalized_mean` class aggregation.
    #[arg(long, allow_hyphen_values = true)]
    class_p: Option<String>,
    /// Threshold slack for threshold units.
    #[arg(long, value_parser = fraction)]
    gamma: Option<f64>,
    /// Group weights, comma separated, summing to 1.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    mean_mode: Option<String>,
    /// Recommender: per_group or inter_group.
    #[arg(long, requires_all = ["disparity", "summary"], conflicts_with_all = ["preset", "unit", "reducer"])]
    focus: Option<String>,
    /// Recommender: absolute or relative.
    #[arg(long)]
    disparity: Option<String>,
    /// Recommender: extrema or average.
    #[arg(long)]
    summary: Option<String>,
    /// Recommender: weight worse-off groups more heavily.
    #[arg(long)]
    emphasize_worse: bool,
}

#[derive(Args, Debug)]
pub(crate) struct AggregateArgs {
    #[command(flatten)]
    input: DataInput,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value = "tpr")]
    metric: String,
    /// Print the preset names and exit.
    #[arg(long)]
    list_presets: bool,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub(crate) struct PointsInput {
    /// Delimited file with `performance` and `fairness` columns.
    #[arg(long, conflicts_with = "manifest")]
    points: Option<String>,
    /// Sweep manifest; points are the seed-averaged configs of `--method`.
    #[arg(long, requires = "method")]
    manifest: Option<String>,
    #[arg(long)]
    method: Option<String>,
    /// Which manifest points to use: test or dev.
    #[arg(long, default_value = "test")]
    split: String,
}

#[derive(Args, Debug)]
pub(crate) struct FrontierArgs {
    #[command(flatten)]
    input: PointsInput,
    /// csv or svg.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Curve drawn in svg output: step or linear.
    #[arg(long, default_value = "step")]
    mode: String,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub(crate) struct UtopiaArgs {
    #[arg(long, value_parser = fraction, default_value = "1")]
    utopia_performance: f64,
    #[arg(long, value_parser = fraction, default_value = "1")]
    utopia_fairness: f64,
    /// Weights on the squared (performance, fairness) distances.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1.0, 1.0])]
    dto_weights: Vec<f64>,
}

#[derive(Args, Debug)]
pub(crate) struct DtoArgs {
    #[arg(long, value_parser = fraction)]
    performance: f64,
    #[arg(long, value_parser = fraction)]
    fairness: f64,
    #[command(flatten)]
    utopia: UtopiaArgs,
    /// Also report the distance after moving the utopia point right by this much.
    #[arg(long, value_parser = fraction)]
    shift: Option<f64>,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
pub(crate) struct AucArgs {
    /// A frontier file (performance,fairness rows).
    #[arg(long, conflicts_with_all = ["points", "manifest"])]
    frontier: Option<String>,
    #[command(flatten)]
    input: PointsInput,
    #[arg(long, default_value = "step")]
    mode: String,
    #[arg(long, value_parser = fraction, conflicts_with_all = ["min_fairness", "max_dto"])]
    min_performance: Option<f64>,
    #[arg(long, value_parser = fraction, conflicts_with = "max_dto")]
    min_fairness: Option<f64>,
    #[arg(long, value_parser = fraction)]
    max_dto: Option<f64>,
    #[command(flatten)]
    utopia: UtopiaArgs,
    /// Quadrature panels per unit of performance for `--max-dto`.
    #[arg(long, default_value_t = fairagg::tradeoff::DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Also integrate the region between frontier and (1, 1) in polar form.
    #[arg(long)]
    polar_angles: Option<usize>,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub(crate) struct ManifestArgs {
    /// Sweep manifest (.csv, or .toml with [[run]] tables).
    #[arg(long)]
    manifest: String,
    #[arg(long, value_parser = fraction, requires = "baseline_fairness")]
    baseline_performance: Option<f64>,
    #[arg(long, value_parser = fraction, requires = "baseline_performance")]
    baseline_fairness: Option<f64>,
    /// Select among individual runs instead of seed-averaged configs.
    #[arg(long)]
    per_seed: bool,
}

#[derive(Args, Debug)]
pub(crate) struct SelectArgs {
    #[command(flatten)]
    manifest: ManifestArgs,
    #[arg(long)]
    method: String,
    /// dto, p, f, loss, p@f+<x>, f@p-<x>.
    #[arg(long, default_value = "dto")]
    criterion: String,
    #[command(flatten)]
    utopia: UtopiaArgs,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
pub(crate) struct CompareArgs {
    #[command(flatten)]
    manifest: ManifestArgs,
    /// Comma-separated criteria; defaults to the seven standard ones.
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<String>>,
    #[arg(long, default_value = "step")]
    auc_mode: String,
    /// toml or csv.
    #[arg(long, default_value = "toml")]
    format: String,
    /// Write one svg frontier plot per method into this directory.
    #[arg(long)]
    plot_dir: Option<String>,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
pub(crate) struct ReportArgs {
    #[command(flatten)]
    input: DataInput,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value = "tpr")]
    metric: String,
    #[arg(long, default_value = "")]
    why_metric: String,
    #[arg(long, default_value = "")]
    why_unit: String,
    #[arg(long, default_value = "")]
    why_group: String,
    #[arg(long, default_value = "")]
    why_class: String,
    /// Exit with an input error when a motivation is missing.
    #[arg(long)]
    strict: bool,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
pub(crate) struct FixtureArgs {
    /// Fixture description (TOML).
    #[arg(long, conflicts_with_all = ["classes", "groups"])]
    spec: Option<String>,
    #[arg(long, value_delimiter = ',', requires = "groups")]
    classes: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', requires = "classes")]
    groups: Option<Vec<String>>,
    /// Records per (class, group) cell.
    #[arg(long, default_value_t = 100)]
    n: u64,
    /// True positive rate in every cell.
    #[arg(long, value_parser = fraction, default_value = "1")]
    tpr: f64,
    #[arg(long, value_parser = fraction, default_value = "1")]
    spread: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the schema to this file.
    #[arg(long)]
    schema_out: Option<String>,
    #[arg(short, long)]
    output: Option<String>,
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error[input]: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .init();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = commands::classify(&e);
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error[{kind}]: {msg}");
            ExitCode::from(code)
        }
    }
}
