//! Helpers shared by the subcommands: flag parsing, seeds, run directories.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use adanorm_core::optim::{HyperParams, NormScope, NormTarget, OptimizerKind};
use adanorm_core::rng::derive_seed;
use adanorm_core::telemetry::RunManifest;

use crate::args::CommonArgs;
use crate::error::{CliError, CliResult};

pub const GIT_DESCRIBE: &str = env!("GIT_DESCRIBE");

/// Seed index reserved for the dataset, which is shared by all repeats.
pub const DATA_STREAM: u64 = u64::MAX;

pub fn run_seed(master: u64, repeat: usize) -> u64 {
    derive_seed(master, repeat as u64)
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Parses a comma-separated flag. `None` (flag absent) yields `default`;
/// empty items are dropped, so `--gamma=` gives an empty list.
pub fn parse_list<T>(flag: &str, raw: &Option<Vec<String>>, default: Vec<T>) -> CliResult<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    let Some(raw) = raw else {
        return Ok(default);
    };
    raw.iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::Usage(format!("--{flag}: cannot parse `{s}`: {e}")))
        })
        .collect()
}

/// A list flag that must hold exactly one value outside `sweep`.
pub fn single<T: Copy>(flag: &str, values: &[T]) -> CliResult<T> {
    match values {
        [v] => Ok(*v),
        [] => Err(CliError::Usage(format!("--{flag} is empty"))),
        _ => Err(CliError::Usage(format!(
            "--{flag} takes one value here; use `sweep` for grids"
        ))),
    }
}

pub fn optimizers(common: &CommonArgs, default: &[OptimizerKind]) -> CliResult<Vec<OptimizerKind>> {
    let kinds: Vec<OptimizerKind> = match &common.optimizer {
        None => default.to_vec(),
        Some(raw) => raw
            .iter()
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<OptimizerKind>().map_err(|_| {
                    let known: Vec<&str> = OptimizerKind::ALL.iter().map(|k| k.name()).collect();
                    CliError::Usage(format!(
                        "unknown optimizer `{s}` (expected one of {})",
                        known.join(", ")
                    ))
                })
            })
            .collect::<CliResult<_>>()?,
    };
    if kinds.is_empty() {
        return Err(CliError::Usage("--optimizer is empty".into()));
    }
    let mut seen = Vec::new();
    for k in &kinds {
        if seen.contains(k) {
            return Err(CliError::Usage(format!("optimizer `{k}` listed twice")));
        }
        seen.push(*k);
    }
    Ok(kinds)
}

pub fn check_repeats(common: &CommonArgs) -> CliResult<()> {
    if common.repeats == 0 {
        return Err(CliError::Usage("--repeats must be >= 1".into()));
    }
    Ok(())
}

/// The hyperparameter grid axes named by the common flags.
#[derive(Debug, Clone)]
pub struct HyperAxes {
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub norm_target: Vec<NormTarget>,
    /// Everything that is not swept.
    pub base: HyperParams<f64>,
}

pub fn hyper_axes(common: &CommonArgs, default_alpha: f64) -> CliResult<HyperAxes> {
    let defaults = HyperParams::<f64>::default();
    let mut base = defaults.with_alpha(default_alpha);
    if let Some(b1) = common.beta1 {
        base.beta1 = b1;
    }
    if let Some(b2) = common.beta2 {
        base.beta2 = b2;
    }
    if let Some(eps) = common.epsilon {
        base.epsilon = eps;
    }
    base.beta1_decay = common.beta1_decay;
    if let Some(scope) = &common.norm_scope {
        base.norm_scope = scope
            .parse::<NormScope>()
            .map_err(|e| CliError::Usage(format!("--norm-scope: {e}")))?;
    }
    let axes = HyperAxes {
        gamma: parse_list("gamma", &common.gamma, vec![defaults.gamma])?,
        alpha: parse_list("alpha", &common.alpha, vec![default_alpha])?,
        norm_target: parse_list(
            "norm-target",
            &common.norm_target,
            vec![defaults.norm_target],
        )?,
        base,
    };
    for &g in &axes.gamma {
        axes.base.with_gamma(g).validate()?;
    }
    for &a in &axes.alpha {
        axes.base.with_alpha(a).validate()?;
    }
    Ok(axes)
}

impl HyperAxes {
    /// The single configuration of a non-sweep command.
    pub fn single(&self) -> CliResult<HyperParams<f64>> {
        Ok(self
            .base
            .with_gamma(single("gamma", &self.gamma)?)
            .with_alpha(single("alpha", &self.alpha)?)
            .with_norm_target(single("norm-target", &self.norm_target)?))
    }
}

pub fn out_dir(common: &CommonArgs, command: &str) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| Path::new("runs").join(command))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|source| {
        CliError::Core(adanorm_core::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

pub struct ManifestInput<'a> {
    pub dir: &'a Path,
    pub run_id: &'a str,
    pub kind: OptimizerKind,
    pub hyper: HyperParams<f64>,
    pub spec: BTreeMap<String, String>,
    pub master_seed: u64,
    pub run_seed: u64,
    pub started: String,
}

pub fn write_manifest(m: ManifestInput<'_>) -> CliResult<()> {
    let manifest = RunManifest {
        run_id: m.run_id.to_string(),
        optimizer: m.kind,
        hyper: m.hyper,
        spec: m.spec,
        master_seed: m.master_seed,
        run_seed: m.run_seed,
        started: m.started,
        finished: timestamp(),
        git_describe: GIT_DESCRIBE.to_string(),
    };
    manifest.write(m.dir.join("manifest.txt"))?;
    Ok(())
}

/// Pointwise mean of curves sampled at the same x values, truncated to the
/// shortest curve.
pub fn mean_curve(curves: &[Vec<(f64, f64)>]) -> Vec<(f64, f64)> {
    let Some(len) = curves.iter().map(Vec::len).min() else {
        return Vec::new();
    };
    let n = curves.len() as f64;
    (0..len)
        .map(|i| {
            let y = curves.iter().map(|c| c[i].1).sum::<f64>() / n;
            (curves[0][i].0, y)
        })
        .collect()
}

/// Keeps at most about `max` evenly spaced points, always including the last.
pub fn thin(points: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    if points.len() <= max || max < 2 {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(max);
    let mut out: Vec<(f64, f64)> = points.iter().step_by(stride).copied().collect();
    if let (Some(last), Some(kept)) = (points.last(), out.last()) {
        if kept.0 != last.0 {
            out.push(*last);
        }
    }
    out
}

pub fn join_values(values: &[Option<f64>]) -> String {
    values
        .iter()
        .map(|v| v.map_or_else(|| "diverged".to_string(), |x| x.to_string()))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}
