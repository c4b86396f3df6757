//! Metric capture: CSV logs, run manifests, smoothing and SVG charts.
//!
//! Metric CSVs have a fixed column order
//! (`run_id, step, epoch, tensor_id, loss, g_norm, e_t, correction_applied,
//! effective_alpha`), use `.` decimals and `true`/`false` booleans, and write
//! floats in shortest round-trip form so a re-parse is lossless. Timestamps
//! live only in the manifest.

mod chart;
mod manifest;
mod metrics;
mod series;

pub use chart::{render_line_chart, render_line_chart_svg, ChartAxes, Series};
pub use manifest::RunManifest;
pub use metrics::{read_metrics, read_records, write_records, MetricRow, MetricSink};
pub use series::{mean_norm_series, mean_norm_series_of, replay_history, NormSource};

/// Default smoothing window (in steps) for gradient-norm charts.
pub const DEFAULT_SMOOTHING_WINDOW: usize = 100;
