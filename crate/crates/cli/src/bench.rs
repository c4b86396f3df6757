//! `bench`: each optimizer on each analytic problem.

use std::collections::BTreeMap;
use std::path::Path;

use adanorm_core::optim::{make_optimizer, HyperParams, OptimizerKind};
use adanorm_core::problems::{
    quadratic_bowl, rosenbrock, scenario_curvature, Problem, ScenarioKind,
};
use adanorm_core::rng::rng_from;
use adanorm_core::telemetry::{
    render_line_chart, write_records, ChartAxes, MetricRow, MetricSink, Series,
};
use adanorm_core::Tensor;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::args::BenchArgs;
use crate::common::{self, ManifestInput};
use crate::error::{CliError, CliResult};

pub const DEFAULT_PROBLEMS: [&str; 5] = [
    "quadratic",
    "rosenbrock",
    "s1-flat",
    "s2-steep",
    "s3-valley",
];
const CHART_POINTS: usize = 1000;

fn build_problem(name: &str, args: &BenchArgs) -> CliResult<Box<dyn Problem<f64>>> {
    Ok(match name {
        "quadratic" => Box::new(quadratic_bowl(args.dim, args.condition)?),
        "rosenbrock" => Box::new(rosenbrock(args.dim)?),
        other => match other.parse::<ScenarioKind>() {
            Ok(kind) => Box::new(scenario_curvature(kind)),
            Err(_) => {
                return Err(CliError::Usage(format!(
                    "unknown problem `{other}` (expected one of {})",
                    DEFAULT_PROBLEMS.join(", ")
                )))
            }
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub problem: String,
    pub optimizer: String,
    pub repeat: usize,
    pub final_loss: Option<f64>,
    pub final_gap: Option<f64>,
    pub steps_to_threshold: Option<usize>,
    pub diverged: bool,
}

struct Outcome {
    row: BenchRow,
    /// `(update count, f - f*)` after each update, starting at 0.
    gaps: Vec<(f64, f64)>,
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    let common = &args.common;
    common::check_repeats(common)?;
    let kinds = common::optimizers(common, &[OptimizerKind::Adam, OptimizerKind::AdamNorm])?;
    let hp = common::hyper_axes(common, HyperParams::<f64>::default().alpha)?.single()?;
    if common.batch_size.is_some() {
        return Err(CliError::Usage(
            "--batch-size does not apply to bench".into(),
        ));
    }
    if args.steps == 0 {
        return Err(CliError::Usage("--steps must be >= 1".into()));
    }
    if !(args.start_jitter >= 0.0 && args.start_jitter.is_finite()) {
        return Err(CliError::Usage(
            "--start-jitter must be finite and >= 0".into(),
        ));
    }
    let names = common::parse_list(
        "problem",
        &args.problem,
        DEFAULT_PROBLEMS.iter().map(|s| s.to_string()).collect(),
    )?;
    if names.is_empty() {
        return Err(CliError::Usage("--problem is empty".into()));
    }
    let problems = names
        .iter()
        .map(|n| build_problem(n, args).map(|p| (n.clone(), p)))
        .collect::<CliResult<Vec<_>>>()?;

    let out = common::out_dir(common, "bench");
    common::create_dir(&out)?;
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (name, problem) in &problems {
        let mut series = Vec::new();
        for &kind in &kinds {
            let mut curves = Vec::new();
            for r in 0..common.repeats {
                let o = run_one(args, name, problem.as_ref(), kind, hp, r, &out)?;
                if !o.row.diverged {
                    curves.push(o.gaps);
                }
                rows.push(o.row);
            }
            report(name, kind, &rows[rows.len() - common.repeats..]);
            if curves.is_empty() {
                failed.push(format!("{name}/{kind}"));
            } else {
                series.push(Series::new(
                    kind.name(),
                    common::thin(&common::mean_curve(&curves), CHART_POINTS),
                ));
            }
        }
        if common.svg_enabled() && !series.is_empty() {
            let log_y = series.iter().all(|s| s.points.iter().all(|p| p.1 > 0.0));
            let axes = ChartAxes {
                title: format!("{name}: loss gap"),
                x_label: "step".into(),
                y_label: if log_y {
                    "f - f* (log)".into()
                } else {
                    "f - f*".into()
                },
                log_y,
            };
            render_line_chart(&series, &axes, out.join(format!("{name}.svg")))?;
        }
    }
    write_records(out.join("summary.csv"), &rows)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Diverged(failed))
    }
}

fn run_one(
    args: &BenchArgs,
    name: &str,
    problem: &dyn Problem<f64>,
    kind: OptimizerKind,
    hp: HyperParams<f64>,
    repeat: usize,
    out: &Path,
) -> CliResult<Outcome> {
    let common = &args.common;
    let started = common::timestamp();
    let seed = common::run_seed(common.seed, repeat);
    let run_id = format!("{name}-{kind}-r{repeat}");
    let dir = out
        .join(name)
        .join(kind.name())
        .join(format!("run-{repeat}"));
    common::create_dir(&dir)?;

    let f_star = problem.optimum().map_or(0.0, |(_, f)| f);
    let mut rng = rng_from(seed, 0);
    let start: Vec<f64> = problem
        .start_point()
        .data()
        .iter()
        .map(|&x| {
            let z: f64 = StandardNormal.sample(&mut rng);
            x + args.start_jitter * z
        })
        .collect();
    let mut params = vec![Tensor::vector(start)];
    let mut opt = make_optimizer(kind, hp, &[vec![problem.dim()]])?;
    let mut sink = MetricSink::create(dir.join("trajectory.csv"))?;
    let mut gaps = Vec::with_capacity(args.steps + 1);
    let mut diverged = false;
    let mut last_loss = None;

    for step in 1..=args.steps as u64 {
        let (loss, grad) = problem.eval(&params[0])?;
        if !loss.is_finite() || !grad.is_finite() {
            diverged = true;
            break;
        }
        gaps.push(((step - 1) as f64, loss - f_star));
        let report = match opt.step(&mut params, &[grad]) {
            Ok(mut r) => r.remove(0),
            Err(adanorm_core::Error::NonFinite { .. }) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        sink.record(&MetricRow {
            run_id: run_id.clone(),
            step,
            epoch: None,
            tensor_id: "x".into(),
            loss,
            g_norm: report.g_norm,
            e_t: report.e_after,
            correction_applied: report.correction_applied,
            effective_alpha: opt.learning_rate(),
        })?;
    }
    if !diverged {
        let (loss, _) = problem.eval(&params[0])?;
        if loss.is_finite() {
            gaps.push((args.steps as f64, loss - f_star));
            last_loss = Some(loss);
        } else {
            diverged = true;
        }
    }
    sink.finish()?;

    let mut spec = BTreeMap::new();
    spec.insert("command".into(), "bench".into());
    spec.insert("problem".into(), name.to_string());
    spec.insert("dim".into(), problem.dim().to_string());
    spec.insert("condition".into(), args.condition.to_string());
    spec.insert("steps".into(), args.steps.to_string());
    spec.insert("threshold".into(), args.threshold.to_string());
    spec.insert("start_jitter".into(), args.start_jitter.to_string());
    spec.insert("repeat".into(), repeat.to_string());
    common::write_manifest(ManifestInput {
        dir: &dir,
        run_id: &run_id,
        kind,
        hyper: hp,
        spec,
        master_seed: common.seed,
        run_seed: seed,
        started,
    })?;

    let steps_to_threshold = gaps.iter().position(|&(_, g)| g < args.threshold);
    Ok(Outcome {
        row: BenchRow {
            problem: name.to_string(),
            optimizer: kind.name().to_string(),
            repeat,
            final_loss: last_loss,
            final_gap: last_loss.map(|l| l - f_star),
            steps_to_threshold,
            diverged,
        },
        gaps,
    })
}

fn report(problem: &str, kind: OptimizerKind, rows: &[BenchRow]) {
    let finals: Vec<f64> = rows.iter().filter_map(|r| r.final_gap).collect();
    let reached: Vec<String> = rows
        .iter()
        .map(|r| {
            r.steps_to_threshold
                .map_or_else(|| "-".into(), |s| s.to_string())
        })
        .collect();
    let diverged = rows.iter().filter(|r| r.diverged).count();
    println!(
        "{problem:<12} {:<14} mean final gap {:>12} steps-to-threshold [{}] diverged {diverged}/{}",
        kind.name(),
        common::mean(finals).map_or_else(|| "-".into(), |m| format!("{m:.3e}")),
        reached.join(", "),
        rows.len()
    );
}
