//! Command-line surface and `--config` file expansion.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "adanorm",
    version,
    about = "Run optimizer experiments and write CSV/SVG artifacts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimizers on analytic problems: final loss, steps to threshold, trajectories.
    #[command(args_override_self = true)]
    Bench(BenchArgs),
    /// Train the MLP on synthetic blobs and chart accuracy, loss and gradient norms.
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Online convex regret R(t) and R(t)/t with a c*sqrt(T) fit.
    #[command(args_override_self = true)]
    Regret(RegretArgs),
    /// Cartesian grid of MLP training runs with a per-cell summary.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bench(_) => "bench",
            Command::Train(_) => "train",
            Command::Regret(_) => "regret",
            Command::Sweep(_) => "sweep",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Bench(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::Regret(a) => &a.common,
            Command::Sweep(a) => &a.common,
        }
    }
}

/// Flags shared by every subcommand. List-valued flags take comma-separated
/// values; only `sweep` accepts more than one value for the hyperparameters.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// key=value file of flag defaults; flags given on the command line win
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory [default: runs/<subcommand>]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed; run r uses a seed derived from (seed, r)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, value_delimiter = ',', value_name = "KIND,...")]
    pub optimizer: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', value_name = "G,...")]
    pub gamma: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', value_name = "A,...")]
    pub alpha: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', value_name = "B,...")]
    pub batch_size: Option<Vec<String>>,
    /// first, second or both
    #[arg(long, value_delimiter = ',', value_name = "T,...")]
    pub norm_target: Option<Vec<String>>,
    /// per-tensor or global
    #[arg(long)]
    pub norm_scope: Option<String>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Per-step decay lambda of beta1
    #[arg(long)]
    pub beta1_decay: Option<f64>,
    /// Write SVG charts (default)
    #[arg(long, overrides_with = "no_svg")]
    pub svg: bool,
    #[arg(long = "no-svg", overrides_with = "svg")]
    pub no_svg: bool,
}

impl CommonArgs {
    pub fn svg_enabled(&self) -> bool {
        !self.no_svg
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// quadratic, rosenbrock, s1-flat, s2-steep, s3-valley
    #[arg(long, value_delimiter = ',', value_name = "NAME,...")]
    pub problem: Option<Vec<String>>,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    /// Loss gap f(x) - f* counted as converged
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    /// Dimension of the quadratic bowl and of Rosenbrock
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    /// Condition number of the quadratic bowl
    #[arg(long, default_value_t = 100.0)]
    pub condition: f64,
    /// Std-dev of the Gaussian offset added to each problem's start point per repeat
    #[arg(long, default_value_t = 0.1)]
    pub start_jitter: f64,
}

/// The synthetic classification task shared by `train` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct TaskArgs {
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = adanorm_core::nn::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = adanorm_core::nn::DEFAULT_INPUT_DIM)]
    pub input_dim: usize,
    #[arg(long, default_value_t = adanorm_core::nn::DEFAULT_CLASSES)]
    pub classes: usize,
    #[arg(long, default_value_t = adanorm_core::nn::DEFAULT_HIDDEN)]
    pub hidden: usize,
    #[arg(long, default_value_t = adanorm_core::nn::DEFAULT_SPREAD)]
    pub spread: f64,
    /// Epochs run at the initial step size before it drops by 10x
    #[arg(long)]
    pub lr_drop_epoch: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub task: TaskArgs,
    /// Sliding window (steps) for the gradient-norm chart
    #[arg(long, default_value_t = adanorm_core::telemetry::DEFAULT_SMOOTHING_WINDOW)]
    pub window: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RegretArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// drifting-quadratics or absolute-losses
    #[arg(long, default_value = "drifting-quadratics")]
    pub generator: String,
    #[arg(long, default_value_t = 5000)]
    pub horizon: usize,
    /// Horizons at which R(T) is measured and fitted
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,5000")]
    pub horizons: Vec<usize>,
    /// inverse-sqrt (alpha/sqrt(t)) or constant
    #[arg(long, default_value = "inverse-sqrt")]
    pub schedule: String,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub task: TaskArgs,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Reads a `key=value` config file into flag tokens. Blank lines and lines
/// starting with `#` are skipped; `svg=false` becomes `--no-svg`.
pub fn config_tokens(path: &Path) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    let mut seen = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if seen.contains(&key) {
            return Err(CliError::Usage(format!(
                "{}:{}: duplicate key `{key}`",
                path.display(),
                i + 1
            )));
        }
        seen.push(key.clone());
        match key.as_str() {
            "config" => {
                return Err(CliError::Usage(format!(
                    "{}:{}: config files cannot include other configs",
                    path.display(),
                    i + 1
                )))
            }
            "svg" => match value {
                "true" => out.push("--svg".into()),
                "false" => out.push("--no-svg".into()),
                other => {
                    return Err(CliError::Usage(format!(
                        "{}:{}: svg must be true or false, got `{other}`",
                        path.display(),
                        i + 1
                    )))
                }
            },
            _ => out.push(format!("--{key}={value}").into()),
        }
    }
    Ok(out)
}

/// `--no-svg` and `--svg` count as the same flag.
fn flag_name(token: &str) -> Option<String> {
    let name = token.strip_prefix("--")?.split('=').next()?;
    Some(if name == "no-svg" {
        "svg".into()
    } else {
        name.to_string()
    })
}

/// Splices the tokens of any `--config FILE` right after the subcommand,
/// dropping entries for flags that are also given on the command line.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    let mut iter = args.iter().enumerate();
    while let Some((_, a)) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = iter.next().map(|(_, p)| PathBuf::from(p));
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    if args.len() < 2 {
        return Ok(args);
    }
    let given: Vec<String> = args[2..]
        .iter()
        .filter_map(|a| flag_name(&a.to_string_lossy()))
        .collect();
    let tokens = config_tokens(&path)?;
    let mut out = args[..2].to_vec();
    out.extend(
        tokens
            .into_iter()
            .filter(|t| flag_name(&t.to_string_lossy()).is_none_or(|name| !given.contains(&name))),
    );
    out.extend_from_slice(&args[2..]);
    Ok(out)
}
