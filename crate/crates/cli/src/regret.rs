//! `regret`: online convex regret of each optimizer on generated sequences.

use std::collections::BTreeMap;

use adanorm_core::optim::{make_optimizer, OptimizerKind};
use adanorm_core::problems::{
    convex_sequence, fit_sqrt, play, regret, regret_at_horizons, SequenceGenerator, StepSchedule,
    SEQUENCE_DIM,
};
use adanorm_core::telemetry::{render_line_chart, write_records, ChartAxes, Series};
use adanorm_core::Tensor;
use serde::Serialize;

use crate::args::RegretArgs;
use crate::common::{self, ManifestInput};
use crate::error::{CliError, CliResult};

/// Step size scaled by `1/sqrt(t)` in the default schedule.
pub const DEFAULT_REGRET_ALPHA: f64 = 1.0;
const CHART_POINTS: usize = 1000;

#[derive(Debug, Clone, Serialize)]
struct CurveRow {
    t: usize,
    regret: f64,
    average_regret: f64,
}

#[derive(Debug, Clone, Serialize)]
struct HorizonRow {
    optimizer: String,
    horizon: usize,
    mean_regret: f64,
    mean_average_regret: f64,
    run_regrets: String,
}

#[derive(Debug, Clone, Serialize)]
struct FitRow {
    optimizer: String,
    c: f64,
    r_squared: f64,
    average_regret_decreasing: bool,
}

pub fn run(args: &RegretArgs) -> CliResult<()> {
    let common = &args.common;
    common::check_repeats(common)?;
    let kinds = common::optimizers(common, &[OptimizerKind::AdamNorm])?;
    let hp = common::hyper_axes(common, DEFAULT_REGRET_ALPHA)?.single()?;
    if common.batch_size.is_some() {
        return Err(CliError::Usage(
            "--batch-size does not apply to regret".into(),
        ));
    }
    let generator: SequenceGenerator = args
        .generator
        .parse()
        .map_err(|e| CliError::Usage(format!("--generator: {e}")))?;
    let schedule: StepSchedule = args
        .schedule
        .parse()
        .map_err(|e| CliError::Usage(format!("--schedule: {e}")))?;
    if args.horizon == 0 {
        return Err(CliError::Usage("--horizon must be >= 1".into()));
    }
    let mut horizons = args.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    if horizons.is_empty() || horizons[0] == 0 || *horizons.last().unwrap() > args.horizon {
        return Err(CliError::Usage(format!(
            "--horizons must be non-empty and lie in 1..={}",
            args.horizon
        )));
    }

    let out = common::out_dir(common, "regret");
    common::create_dir(&out)?;
    let start = Tensor::zeros(&[SEQUENCE_DIM]);
    let mut horizon_rows = Vec::new();
    let mut fit_rows = Vec::new();
    let mut regret_series = Vec::new();
    let mut average_series = Vec::new();
    let mut failed = Vec::new();

    for &kind in &kinds {
        let mut curves = Vec::new();
        let mut at_horizons: Vec<Vec<f64>> = Vec::new();
        for r in 0..common.repeats {
            let started = common::timestamp();
            let seed = common::run_seed(common.seed, r);
            let run_id = format!("regret-{kind}-r{r}");
            let dir = out.join(kind.name()).join(format!("run-{r}"));
            common::create_dir(&dir)?;
            let seq = convex_sequence::<f64>(generator, args.horizon, seed)?;

            let mut spec = BTreeMap::new();
            spec.insert("command".into(), "regret".into());
            spec.insert("generator".into(), generator.to_string());
            spec.insert("horizon".into(), args.horizon.to_string());
            spec.insert("schedule".into(), args.schedule.clone());
            spec.insert("repeat".into(), r.to_string());

            let curve = regret(
                &seq,
                &mut make_optimizer(kind, hp, &[vec![SEQUENCE_DIM]])?,
                &start,
                schedule,
            );
            let suffered = play(
                &seq,
                &mut make_optimizer(kind, hp, &[vec![SEQUENCE_DIM]])?,
                &start,
                schedule,
            );
            match (curve, suffered) {
                (Ok(curve), Ok(suffered)) => {
                    let rows: Vec<CurveRow> = curve
                        .iter()
                        .map(|p| CurveRow {
                            t: p.t,
                            regret: p.regret,
                            average_regret: p.average,
                        })
                        .collect();
                    write_records(dir.join("regret.csv"), &rows)?;
                    let at = regret_at_horizons(&seq, &suffered, &horizons)?;
                    at_horizons.push(at.into_iter().map(|(_, r)| r).collect());
                    curves.push(curve);
                }
                (Err(adanorm_core::Error::NonFinite { what, step }), _)
                | (_, Err(adanorm_core::Error::NonFinite { what, step })) => {
                    spec.insert(
                        "diverged".into(),
                        format!("non-finite {what} at step {step}"),
                    );
                }
                (Err(e), _) | (_, Err(e)) => return Err(e.into()),
            }
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
        }
        if curves.is_empty() {
            failed.push(kind.name().to_string());
            println!("{:<14} diverged in every repeat", kind.name());
            continue;
        }

        let n = at_horizons.len() as f64;
        let means: Vec<f64> = (0..horizons.len())
            .map(|k| at_horizons.iter().map(|v| v[k]).sum::<f64>() / n)
            .collect();
        for (k, &h) in horizons.iter().enumerate() {
            let runs: Vec<Option<f64>> = at_horizons.iter().map(|v| Some(v[k])).collect();
            horizon_rows.push(HorizonRow {
                optimizer: kind.name().into(),
                horizon: h,
                mean_regret: means[k],
                mean_average_regret: means[k] / h as f64,
                run_regrets: common::join_values(&runs),
            });
        }
        let decreasing = horizons.len() >= 2 && {
            let last = horizons.len() - 1;
            means[last] / (horizons[last] as f64) < means[0] / (horizons[0] as f64)
        };
        let fit = if horizons.len() >= 2 {
            Some(fit_sqrt(
                &horizons
                    .iter()
                    .copied()
                    .zip(means.iter().copied())
                    .collect::<Vec<_>>(),
            )?)
        } else {
            None
        };
        if let Some(fit) = fit {
            fit_rows.push(FitRow {
                optimizer: kind.name().into(),
                c: fit.c,
                r_squared: fit.r_squared,
                average_regret_decreasing: decreasing,
            });
        }
        println!(
            "{:<14} R(T)/T {} fit R = c*sqrt(T): {}",
            kind.name(),
            horizons
                .iter()
                .zip(&means)
                .map(|(h, m)| format!("T={h}: {:.5}", m / *h as f64))
                .collect::<Vec<_>>()
                .join(", "),
            fit.map_or_else(
                || "-".into(),
                |f| format!("c = {:.4}, R^2 = {:.4}", f.c, f.r_squared)
            )
        );

        let mean_of = |f: fn(&adanorm_core::problems::RegretPoint<f64>) -> f64| {
            let c: Vec<Vec<(f64, f64)>> = curves
                .iter()
                .map(|c| c.iter().map(|p| (p.t as f64, f(p))).collect())
                .collect();
            common::thin(&common::mean_curve(&c), CHART_POINTS)
        };
        regret_series.push(Series::new(kind.name(), mean_of(|p| p.regret)));
        average_series.push(Series::new(kind.name(), mean_of(|p| p.average)));
    }

    write_records(out.join("horizons.csv"), &horizon_rows)?;
    write_records(out.join("fit.csv"), &fit_rows)?;
    if common.svg_enabled() && !regret_series.is_empty() {
        let axes = |title: &str, y: &str| ChartAxes {
            title: title.into(),
            x_label: "t".into(),
            y_label: y.into(),
            log_y: false,
        };
        render_line_chart(
            &regret_series,
            &axes("Cumulative regret", "R(t)"),
            out.join("regret.svg"),
        )?;
        render_line_chart(
            &average_series,
            &axes("Average regret", "R(t)/t"),
            out.join("average_regret.svg"),
        )?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Diverged(failed))
    }
}
