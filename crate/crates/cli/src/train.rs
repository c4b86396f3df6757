//! `train`: the MLP on synthetic blobs, one run per optimizer and repeat.

use std::collections::BTreeMap;
use std::path::Path;

use adanorm_core::nn::{make_blobs, train, Dataset, MlpModel, TrainConfig, TrainLog};
use adanorm_core::optim::{make_optimizer, HyperParams, OptimizerKind};
use adanorm_core::rng::derive_seed;
use adanorm_core::telemetry::{
    mean_norm_series_of, render_line_chart, write_records, ChartAxes, MetricSink, NormSource,
    Series,
};
use serde::Serialize;

use crate::args::{TaskArgs, TrainArgs};
use crate::common::{self, ManifestInput, DATA_STREAM};
use crate::error::{CliError, CliResult};

pub const DEFAULT_OPTIMIZERS: [OptimizerKind; 2] = [OptimizerKind::Adam, OptimizerKind::AdamNorm];

/// The dataset and training settings shared by every run of an invocation.
pub struct Task {
    pub args: TaskArgs,
    pub data: Dataset<f64>,
    pub data_seed: u64,
}

impl Task {
    pub fn new(args: &TaskArgs, master_seed: u64) -> CliResult<Self> {
        if let Some(d) = args.lr_drop_epoch {
            if d > args.epochs {
                return Err(CliError::Usage(format!(
                    "--lr-drop-epoch {d} is past the last epoch {}",
                    args.epochs
                )));
            }
        }
        if args.epochs == 0 || args.hidden == 0 {
            return Err(CliError::Usage("--epochs and --hidden must be >= 1".into()));
        }
        let data_seed = derive_seed(master_seed, DATA_STREAM);
        let data = make_blobs(
            args.samples,
            args.input_dim,
            args.classes,
            args.spread,
            data_seed,
        )?;
        Ok(Task {
            args: args.clone(),
            data,
            data_seed,
        })
    }

    /// Optimizer steps in a full run with this batch size.
    pub fn total_steps(&self, batch_size: usize) -> usize {
        self.args.epochs * self.data.train_indices().len().div_ceil(batch_size)
    }

    fn config(&self, batch_size: usize, shuffle_seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.args.epochs,
            batch_size,
            shuffle_seed,
            lr_drop_epoch: self.args.lr_drop_epoch,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct EpochRow {
    epoch: usize,
    train_loss: f64,
    test_accuracy: f64,
    alpha: f64,
}

/// One training run written to `dir`: `manifest.txt`, `epochs.csv` and
/// `metrics.csv`. Returns `None` if the run diverged.
pub fn train_run(
    task: &Task,
    kind: OptimizerKind,
    hp: HyperParams<f64>,
    batch_size: usize,
    master_seed: u64,
    repeat: usize,
    run_id: &str,
    dir: &Path,
) -> CliResult<Option<TrainLog>> {
    let started = common::timestamp();
    common::create_dir(dir)?;
    let seed = common::run_seed(master_seed, repeat);
    let model_seed = derive_seed(seed, 0);
    let shuffle_seed = derive_seed(seed, 1);
    let a = &task.args;
    let mut model = MlpModel::new(a.input_dim, a.hidden, a.classes, model_seed)?;
    let mut opt = make_optimizer(kind, hp, &model.shapes())?;
    let config = task.config(batch_size, shuffle_seed);

    let mut spec = BTreeMap::new();
    let result = match train(&mut model, &task.data, &mut opt, &config, run_id) {
        Ok(log) => {
            let epochs: Vec<EpochRow> = log
                .epochs
                .iter()
                .map(|e| EpochRow {
                    epoch: e.epoch,
                    train_loss: e.train_loss,
                    test_accuracy: e.test_accuracy,
                    alpha: e.alpha,
                })
                .collect();
            write_records(dir.join("epochs.csv"), &epochs)?;
            let mut sink = MetricSink::create(dir.join("metrics.csv"))?;
            for row in &log.rows {
                sink.record(row)?;
            }
            sink.finish()?;
            Some(log)
        }
        Err(adanorm_core::Error::NonFinite { what, step }) => {
            spec.insert(
                "diverged".into(),
                format!("non-finite {what} at step {step}"),
            );
            None
        }
        Err(e) => return Err(e.into()),
    };

    spec.insert("command".into(), "train".into());
    spec.insert("samples".into(), a.samples.to_string());
    spec.insert("input_dim".into(), a.input_dim.to_string());
    spec.insert("classes".into(), a.classes.to_string());
    spec.insert("hidden".into(), a.hidden.to_string());
    spec.insert("spread".into(), a.spread.to_string());
    spec.insert("epochs".into(), a.epochs.to_string());
    spec.insert("batch_size".into(), batch_size.to_string());
    spec.insert(
        "lr_drop_epoch".into(),
        a.lr_drop_epoch
            .map_or_else(|| "none".into(), |d| d.to_string()),
    );
    spec.insert("data_seed".into(), task.data_seed.to_string());
    spec.insert("model_seed".into(), model_seed.to_string());
    spec.insert("shuffle_seed".into(), shuffle_seed.to_string());
    spec.insert("repeat".into(), repeat.to_string());
    common::write_manifest(ManifestInput {
        dir,
        run_id,
        kind,
        hyper: hp,
        spec,
        master_seed,
        run_seed: seed,
        started,
    })?;
    Ok(result)
}

/// Smoothed mean gradient norm, averaged over the given runs.
pub fn norm_curve(
    logs: &[&TrainLog],
    window: usize,
    source: NormSource,
) -> CliResult<Vec<(f64, f64)>> {
    let curves = logs
        .iter()
        .map(|log| {
            mean_norm_series_of(&log.rows, window, source).map(|s| {
                s.into_iter()
                    .map(|(t, v)| (t as f64, v))
                    .collect::<Vec<_>>()
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(common::mean_curve(&curves))
}

/// Fraction of aligned points where `a >= b`.
pub fn dominance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    a.iter().zip(b).filter(|(p, q)| p.1 >= q.1).count() as f64 / n as f64
}

#[derive(Debug, Clone, Serialize)]
struct SummaryRow {
    optimizer: String,
    repeats: usize,
    diverged: usize,
    mean_test_accuracy: Option<f64>,
    run_test_accuracies: String,
    mean_final_train_loss: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct NormRow {
    optimizer: String,
    step: u64,
    raw_norm: f64,
    consumed_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
struct DominanceRow {
    optimizer: String,
    baseline: String,
    source: String,
    fraction: f64,
}

pub fn run(args: &TrainArgs) -> CliResult<()> {
    let common = &args.common;
    common::check_repeats(common)?;
    let kinds = common::optimizers(common, &DEFAULT_OPTIMIZERS)?;
    let hp = common::hyper_axes(common, HyperParams::<f64>::default().alpha)?.single()?;
    let batch: usize = common::single(
        "batch-size",
        &common::parse_list(
            "batch-size",
            &common.batch_size,
            vec![adanorm_core::nn::DEFAULT_BATCH_SIZE],
        )?,
    )?;
    if batch == 0 {
        return Err(CliError::Usage("--batch-size must be >= 1".into()));
    }
    let task = Task::new(&args.task, common.seed)?;
    let steps = task.total_steps(batch);
    if args.window == 0 || args.window > steps {
        return Err(CliError::Usage(format!(
            "--window must be in 1..={steps} (the number of optimizer steps)"
        )));
    }

    let out = common::out_dir(common, "train");
    common::create_dir(&out)?;
    let mut summary = Vec::new();
    let mut norms = Vec::new();
    let mut acc_series = Vec::new();
    let mut loss_series = Vec::new();
    let mut raw_series = Vec::new();
    let mut consumed_series = Vec::new();
    let mut curves: Vec<(OptimizerKind, Vec<(f64, f64)>, Vec<(f64, f64)>)> = Vec::new();
    let mut failed = Vec::new();

    for &kind in &kinds {
        let mut logs = Vec::new();
        let mut accs = Vec::new();
        for r in 0..common.repeats {
            let run_id = format!("train-{kind}-r{r}");
            let dir = out.join(kind.name()).join(format!("run-{r}"));
            let log = train_run(&task, kind, hp, batch, common.seed, r, &run_id, &dir)?;
            accs.push(log.as_ref().map(TrainLog::final_test_accuracy));
            logs.extend(log);
        }
        let ok: Vec<&TrainLog> = logs.iter().collect();
        summary.push(SummaryRow {
            optimizer: kind.name().into(),
            repeats: common.repeats,
            diverged: common.repeats - ok.len(),
            mean_test_accuracy: common::mean(accs.iter().flatten().copied()),
            run_test_accuracies: common::join_values(&accs),
            mean_final_train_loss: common::mean(
                ok.iter()
                    .filter_map(|l| l.epochs.last())
                    .map(|e| e.train_loss),
            ),
        });
        println!(
            "{:<14} test accuracy mean {} runs [{}]",
            kind.name(),
            summary
                .last()
                .unwrap()
                .mean_test_accuracy
                .map_or_else(|| "-".into(), |m| format!("{m:.4}")),
            summary.last().unwrap().run_test_accuracies
        );
        if ok.is_empty() {
            failed.push(kind.name().to_string());
            continue;
        }

        let per_epoch = |f: fn(&adanorm_core::nn::EpochSummary) -> f64| {
            let c: Vec<Vec<(f64, f64)>> = ok
                .iter()
                .map(|l| l.epochs.iter().map(|e| (e.epoch as f64, f(e))).collect())
                .collect();
            common::mean_curve(&c)
        };
        acc_series.push(Series::new(kind.name(), per_epoch(|e| e.test_accuracy)));
        loss_series.push(Series::new(kind.name(), per_epoch(|e| e.train_loss)));

        let raw = norm_curve(&ok, args.window, NormSource::Raw)?;
        let consumed = norm_curve(&ok, args.window, NormSource::Corrected)?;
        for (r, c) in raw.iter().zip(&consumed) {
            norms.push(NormRow {
                optimizer: kind.name().into(),
                step: r.0 as u64,
                raw_norm: r.1,
                consumed_norm: c.1,
            });
        }
        raw_series.push(Series::new(kind.name(), raw.clone()));
        consumed_series.push(Series::new(kind.name(), consumed.clone()));
        curves.push((kind, raw, consumed));
    }

    let mut dominance_rows = Vec::new();
    for (kind, raw, consumed) in &curves {
        if !kind.is_norm_corrected() {
            continue;
        }
        if let Some((_, base_raw, base_consumed)) = curves.iter().find(|c| c.0 == kind.base()) {
            for (source, a, b) in [
                ("consumed", consumed, base_consumed),
                ("raw", raw, base_raw),
            ] {
                let fraction = dominance(a, b);
                println!(
                    "{kind} >= {} on {source} gradient norm at {:.1}% of smoothed points",
                    kind.base(),
                    100.0 * fraction
                );
                dominance_rows.push(DominanceRow {
                    optimizer: kind.name().into(),
                    baseline: kind.base().name().into(),
                    source: source.into(),
                    fraction,
                });
            }
        }
    }

    write_records(out.join("summary.csv"), &summary)?;
    write_records(out.join("norms.csv"), &norms)?;
    if !dominance_rows.is_empty() {
        write_records(out.join("dominance.csv"), &dominance_rows)?;
    }
    if common.svg_enabled() && !acc_series.is_empty() {
        let chart = |title: &str, y: &str, log_y: bool| ChartAxes {
            title: title.into(),
            x_label: "epoch".into(),
            y_label: y.into(),
            log_y,
        };
        render_line_chart(
            &acc_series,
            &chart("Test accuracy", "accuracy", false),
            out.join("accuracy.svg"),
        )?;
        render_line_chart(
            &loss_series,
            &chart("Training loss", "loss", true),
            out.join("loss.svg"),
        )?;
        let norm_axes = |title: &str| ChartAxes {
            title: format!("{title} (window {})", args.window),
            x_label: "iteration".into(),
            y_label: "mean gradient norm".into(),
            log_y: true,
        };
        render_line_chart(
            &consumed_series,
            &norm_axes("Gradient norm fed to the moments"),
            out.join("norm.svg"),
        )?;
        render_line_chart(
            &raw_series,
            &norm_axes("Raw minibatch gradient norm"),
            out.join("norm_raw.svg"),
        )?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Diverged(failed))
    }
}
