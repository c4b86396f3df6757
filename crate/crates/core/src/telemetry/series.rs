use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::optim::update_history;

use super::MetricRow;

/// Which norm a smoothed series is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormSource {
    /// The minibatch gradient norm, `g_norm`.
    #[default]
    Raw,
    /// Norm of the gradient fed to the moments: `e_t` when the correction
    /// fired, `g_norm` otherwise.
    Corrected,
}

impl NormSource {
    pub fn of(self, row: &MetricRow) -> f64 {
        match self {
            NormSource::Corrected if row.correction_applied => row.e_t,
            _ => row.g_norm,
        }
    }
}

/// Smoothed mean of the raw gradient norm per step; see [`mean_norm_series_of`].
pub fn mean_norm_series(rows: &[MetricRow], window: usize) -> Result<Vec<(u64, f64)>> {
    mean_norm_series_of(rows, window, NormSource::Raw)
}

/// Smoothed mean gradient norm per step.
///
/// Norms are first averaged across tensors at each step, then a sliding mean
/// over `window` consecutive steps is taken. Only full windows are emitted,
/// each labelled with the step at its centre (index `start + (window - 1) / 2`),
/// so a series of length `n` yields `n - window + 1` points.
pub fn mean_norm_series_of(
    rows: &[MetricRow],
    window: usize,
    source: NormSource,
) -> Result<Vec<(u64, f64)>> {
    if window == 0 {
        return Err(Error::InvalidArgument(
            "smoothing window must be >= 1".into(),
        ));
    }
    if rows.is_empty() {
        return Err(Error::Empty("metric rows"));
    }
    let mut per_step: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let slot = per_step.entry(r.step).or_insert((0.0, 0));
        slot.0 += source.of(r);
        slot.1 += 1;
    }
    let steps: Vec<(u64, f64)> = per_step
        .into_iter()
        .map(|(step, (sum, n))| (step, sum / n as f64))
        .collect();
    if window > steps.len() {
        return Err(Error::InvalidArgument(format!(
            "window {window} exceeds the {} logged steps",
            steps.len()
        )));
    }
    let centre = (window - 1) / 2;
    Ok(steps
        .windows(window)
        .map(|w| {
            let mean = w.iter().map(|p| p.1).sum::<f64>() / window as f64;
            (w[centre].0, mean)
        })
        .collect())
}

/// Recomputes the gradient-norm history from a logged `g_norm` column,
/// starting from `e_0 = 0`. Uses the optimizer's own arithmetic, so an `f64`
/// run is reproduced bit for bit.
pub fn replay_history(gamma: f64, g_norms: &[f64]) -> Vec<f64> {
    let mut e = 0.0;
    g_norms
        .iter()
        .map(|&g| {
            e = update_history(e, gamma, g);
            e
        })
        .collect()
}
