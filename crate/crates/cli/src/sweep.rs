//! `sweep`: a Cartesian grid of MLP training runs.

use adanorm_core::optim::{HyperParams, NormTarget, OptimizerKind};
use adanorm_core::telemetry::write_records;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::SweepArgs;
use crate::common::{self, HyperAxes};
use crate::error::{CliError, CliResult};
use crate::train::{train_run, Task};

/// One grid point. Every cell is trained `repeats` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub optimizer: OptimizerKind,
    pub gamma: f64,
    pub alpha: f64,
    pub batch_size: usize,
    pub norm_target: NormTarget,
}

impl Cell {
    fn hyper(&self, axes: &HyperAxes) -> HyperParams<f64> {
        axes.base
            .with_gamma(self.gamma)
            .with_alpha(self.alpha)
            .with_norm_target(self.norm_target)
    }
}

/// Cells in row-major order: optimizer, gamma, alpha, batch size, norm target.
pub fn grid(
    optimizers: &[OptimizerKind],
    axes: &HyperAxes,
    batch_sizes: &[usize],
) -> CliResult<Vec<Cell>> {
    let named = [
        ("optimizer", optimizers.len()),
        ("gamma", axes.gamma.len()),
        ("alpha", axes.alpha.len()),
        ("batch-size", batch_sizes.len()),
        ("norm-target", axes.norm_target.len()),
    ];
    if let Some((name, _)) = named.iter().find(|(_, n)| *n == 0) {
        return Err(CliError::Usage(format!(
            "empty grid: --{name} has no values"
        )));
    }
    let mut cells = Vec::new();
    for &optimizer in optimizers {
        for &gamma in &axes.gamma {
            for &alpha in &axes.alpha {
                for &batch_size in batch_sizes {
                    for &norm_target in &axes.norm_target {
                        cells.push(Cell {
                            optimizer,
                            gamma,
                            alpha,
                            batch_size,
                            norm_target,
                        });
                    }
                }
            }
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, Serialize)]
struct SummaryRow {
    cell: usize,
    optimizer: String,
    gamma: f64,
    alpha: f64,
    batch_size: usize,
    norm_target: String,
    repeats: usize,
    diverged: usize,
    mean_test_accuracy: Option<f64>,
    run_test_accuracies: String,
    mean_final_train_loss: Option<f64>,
    best: bool,
}

/// Index of the best cell: highest mean accuracy, then lowest final loss,
/// then lowest index.
fn best_cell(rows: &[SummaryRow]) -> Option<usize> {
    let mut best: Option<&SummaryRow> = None;
    for row in rows {
        let (Some(acc), Some(loss)) = (row.mean_test_accuracy, row.mean_final_train_loss) else {
            continue;
        };
        let better = match best {
            None => true,
            Some(b) => {
                let (bacc, bloss) = (
                    b.mean_test_accuracy.unwrap(),
                    b.mean_final_train_loss.unwrap(),
                );
                acc > bacc || (acc == bacc && loss < bloss)
            }
        };
        if better {
            best = Some(row);
        }
    }
    best.map(|b| b.cell)
}

pub fn run(args: &SweepArgs) -> CliResult<()> {
    let common = &args.common;
    common::check_repeats(common)?;
    let optimizers = common::optimizers(common, &[OptimizerKind::AdamNorm])?;
    let axes = common::hyper_axes(common, HyperParams::<f64>::default().alpha)?;
    let batch_sizes: Vec<usize> = common::parse_list(
        "batch-size",
        &common.batch_size,
        vec![adanorm_core::nn::DEFAULT_BATCH_SIZE],
    )?;
    if batch_sizes.contains(&0) {
        return Err(CliError::Usage("--batch-size values must be >= 1".into()));
    }
    let cells = grid(&optimizers, &axes, &batch_sizes)?;
    let jobs = match args.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be >= 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let task = Task::new(&args.task, common.seed)?;

    let out = common::out_dir(common, "sweep");
    common::create_dir(&out)?;
    let runs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..common.repeats).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.min(runs.len()))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let results: Vec<CliResult<Option<(f64, f64)>>> = pool.install(|| {
        runs.par_iter()
            .map(|&(c, r)| {
                let cell = &cells[c];
                let dir = out.join(format!("cell-{c:03}")).join(format!("run-{r}"));
                let run_id = format!("sweep-c{c}-r{r}");
                let log = train_run(
                    &task,
                    cell.optimizer,
                    cell.hyper(&axes),
                    cell.batch_size,
                    common.seed,
                    r,
                    &run_id,
                    &dir,
                )?;
                Ok(log.map(|l| {
                    let last = l.epochs.last().expect("at least one epoch");
                    (last.test_accuracy, last.train_loss)
                }))
            })
            .collect()
    });
    let results = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let mut rows: Vec<SummaryRow> = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let runs = &results[c * common.repeats..(c + 1) * common.repeats];
            let accs: Vec<Option<f64>> = runs.iter().map(|r| r.map(|x| x.0)).collect();
            SummaryRow {
                cell: c,
                optimizer: cell.optimizer.name().into(),
                gamma: cell.gamma,
                alpha: cell.alpha,
                batch_size: cell.batch_size,
                norm_target: cell.norm_target.to_string(),
                repeats: common.repeats,
                diverged: runs.iter().filter(|r| r.is_none()).count(),
                mean_test_accuracy: common::mean(runs.iter().flatten().map(|x| x.0)),
                run_test_accuracies: common::join_values(&accs),
                mean_final_train_loss: common::mean(runs.iter().flatten().map(|x| x.1)),
                best: false,
            }
        })
        .collect();
    let best = best_cell(&rows);
    for row in &mut rows {
        row.best = Some(row.cell) == best;
        println!(
            "cell {:>3} {:<14} gamma {:<6} alpha {:<7} batch {:<4} target {:<6} accuracy {}{}",
            row.cell,
            row.optimizer,
            row.gamma,
            row.alpha,
            row.batch_size,
            row.norm_target,
            row.mean_test_accuracy
                .map_or_else(|| "diverged".into(), |a| format!("{a:.4}")),
            if row.best { "  <- best" } else { "" }
        );
    }
    write_records(out.join("summary.csv"), &rows)?;

    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.diverged == r.repeats)
        .map(|r| format!("cell {}", r.cell))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Diverged(failed))
    }
}
