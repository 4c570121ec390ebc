use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod manifest;

use commands::Failure;

const DATA_SCHEMA: &str = "\
INPUT CSV (long format, one row per observation):
  curve_id,group,t,value
  curve_id  curve identifier
  group     group label (column name set by --group-col for fanova)
  t         grid location; the sorted distinct t values form the common
            grid, rescaled internally to [0, 1]
  value     observation; an empty field marks t as unobserved for that curve";

#[derive(Parser)]
#[command(
    name = "robfda",
    version,
    about = "Robust location estimation and bootstrap inference for partially observed curves",
    after_help = DATA_SCHEMA
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Where to write the run manifest (default: <out>.manifest.json).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the pointwise M-estimator.
    #[command(after_help = concat!(
        "INPUT CSV (long format, one row per observation):\n",
        "  curve_id,group,t,value   empty value = unobserved\n\n",
        "OUTPUT CSV:\n",
        "  t,theta,n_eff,status\n",
        "  status is solved | interpolated | undefined; theta is empty where undefined"
    ))]
    Estimate(EstimateArgs),
    /// Test equality of group location functions (L2-norm functional ANOVA).
    #[command(after_help = concat!(
        "INPUT CSV: curve_id,<group column>,t,value   empty value = unobserved\n\n",
        "OUTPUT JSON: {\"config\": {...}, \"result\": {statistic, p_value, eigenvalues,\n",
        "  trace, ssr_integral, groups, group_sizes, b, mixture_draws, seed, scaling}}"
    ))]
    Fanova(FanovaArgs),
    /// Percentile bootstrap interval for the projection of the location
    /// function on a probe.
    #[command(after_help = concat!(
        "INPUT CSV: curve_id,group,t,value   empty value = unobserved\n\n",
        "Probes are evaluated on the grid rescaled to [0, 1]; the step location\n",
        "is given in the units of the t column.\n\n",
        "OUTPUT JSON: {\"config\": {...}, \"result\": {probe, coefficient, lower, upper,\n",
        "  boot_median, alpha, b, significant, seed}}"
    ))]
    Trend(TrendArgs),
    /// Run a Monte Carlo scenario.
    #[command(after_help = concat!(
        "CONFIG (flat key = value, # comments):\n",
        "  name        scenario label\n",
        "  study       ise | coverage\n",
        "  model       1-6 | cont1 | cont2\n",
        "  mean        smooth | probe\n",
        "  sigma, d    scale and correlation length overrides\n",
        "  scheme      complete | random-interval:a,b | fixed-intervals:b1,.. | snippet:d | sparse:p[,a,b]\n",
        "  n           curves per repetition\n",
        "  grid_size   grid points on [0, 1]\n",
        "  estimators  comma list of losses; the first is the ratio reference\n",
        "  B           bootstrap replicates (coverage)\n",
        "  R           repetitions\n",
        "  seed        master seed (required)\n",
        "  probes      comma list of probes (coverage)\n",
        "  alpha       interval level 1 - alpha (coverage)\n\n",
        "OUTPUT CSV:\n",
        "  scenario,estimator,metric,value\n",
        "  ise metrics: median_ise, mean_ise, ratio_to_reference\n",
        "  coverage metrics: coverage:<probe>, median_length:<probe>, true_coefficient:<probe>"
    ))]
    Simulate(SimulateArgs),
    /// Observation-probability diagnostics for a missingness scheme or a
    /// data file.
    #[command(after_help = concat!(
        "With --data, b_hat is the observed fraction per grid point of the file.\n",
        "With --scheme, masks are simulated and compared with the analytic b.\n\n",
        "OUTPUT CSV:\n",
        "  t,b_hat[,b,deviation]\n",
        "The summary (W_n = max |b_hat - b|, sqrt(n) W_n, redraws) is printed\n",
        "to stdout and stored in the manifest."
    ))]
    Masks(MasksArgs),
}

#[derive(Args)]
pub struct DataArgs {
    /// Input CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Loss: square | huber:<c> | quantile:<tau> | squantile:<tau>[,<h>] | huber-scaled:<r>.
    #[arg(long, default_value = "huber:0.8")]
    pub loss: String,
}

#[derive(Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Fill undefined grid points by linear interpolation.
    #[arg(long)]
    pub interpolate: bool,
}

#[derive(Args)]
pub struct FanovaArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Column holding group labels.
    #[arg(long, default_value = "group")]
    pub group_col: String,
    /// Bootstrap replicates per group.
    #[arg(long = "B", default_value_t = 800)]
    pub b: usize,
    /// Draws from the null mixture.
    #[arg(long, default_value_t = 50_000)]
    pub draws: usize,
    /// Bootstrap covariance normalization: per-group | pooled.
    #[arg(long, default_value = "per-group")]
    pub scaling: String,
    #[arg(long)]
    pub seed: u64,
    /// Output JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TrendArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// constant | linear | quadratic | step:<x0>
    #[arg(long)]
    pub probe: String,
    #[arg(long = "B", default_value_t = 3000)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: u64,
    /// Output JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario file (key = value).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the config bootstrap size.
    #[arg(long = "B")]
    pub b: Option<usize>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct MasksArgs {
    /// Read masks from a data file instead of simulating.
    #[arg(long, conflicts_with = "scheme")]
    pub data: Option<PathBuf>,
    /// complete | random-interval:a,b | fixed-intervals:b1,.. | snippet:d | sparse:p[,a,b]
    #[arg(long, required_unless_present = "data")]
    pub scheme: Option<String>,
    /// Number of simulated masks.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub grid_size: usize,
    #[arg(long, required_unless_present = "data")]
    pub seed: Option<u64>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Estimate(a) => commands::estimate(a, cli.manifest.as_deref()),
        Command::Fanova(a) => commands::fanova(a, cli.manifest.as_deref()),
        Command::Trend(a) => commands::trend(a, cli.manifest.as_deref()),
        Command::Simulate(a) => commands::simulate(a, cli.manifest.as_deref()),
        Command::Masks(a) => commands::masks(a, cli.manifest.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
