use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 9] = [
    "run_id",
    "step",
    "epoch",
    "tensor_id",
    "loss",
    "g_norm",
    "e_t",
    "correction_applied",
    "effective_alpha",
];

/// One optimizer step on one parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub run_id: String,
    pub step: u64,
    pub epoch: Option<u64>,
    pub tensor_id: String,
    pub loss: f64,
    pub g_norm: f64,
    pub e_t: f64,
    pub correction_applied: bool,
    pub effective_alpha: f64,
}

impl MetricRow {
    pub fn check_finite(&self) -> Result<()> {
        let fields = [
            ("loss", self.loss),
            ("g_norm", self.g_norm),
            ("e_t", self.e_t),
            ("effective_alpha", self.effective_alpha),
        ];
        match fields.iter().find(|(_, x)| !x.is_finite()) {
            Some(&(what, _)) => Err(Error::NonFinite {
                what,
                step: self.step,
            }),
            None => Ok(()),
        }
    }
}

/// Appends [`MetricRow`]s to a CSV file.
///
/// Rejects non-finite values and steps that do not strictly increase per
/// `(run_id, tensor_id)`. Not meant to be shared between threads.
pub struct MetricSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    last_step: HashMap<(String, String), u64>,
    rows: usize,
}

impl MetricSink {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        // serde would only emit the header alongside the first row
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(BufWriter::new(file));
        writer
            .write_record(COLUMNS)
            .map_err(|e| Error::csv(&path, e))?;
        Ok(Self {
            path,
            writer,
            last_step: HashMap::new(),
            rows: 0,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Number of rows recorded so far.
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn record(&mut self, row: &MetricRow) -> Result<()> {
        row.check_finite()?;
        let key = (row.run_id.clone(), row.tensor_id.clone());
        if let Some(&prev) = self.last_step.get(&key) {
            if row.step <= prev {
                return Err(Error::InvalidArgument(format!(
                    "step {} does not follow {prev} for run `{}` tensor `{}`",
                    row.step, row.run_id, row.tensor_id
                )));
            }
        }
        self.writer
            .serialize(row)
            .map_err(|e| Error::csv(&self.path, e))?;
        self.last_step.insert(key, row.step);
        self.rows += 1;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }

    /// Flushes and closes the file.
    pub fn finish(mut self) -> Result<()> {
        self.flush()?;
        let inner = self
            .writer
            .into_inner()
            .map_err(|e| Error::io(&self.path, e.into_error()))?;
        inner
            .into_inner()
            .map_err(|e| Error::io(&self.path, e.into_error()))?
            .sync_all()
            .map_err(|e| Error::io(&self.path, e))
    }
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<MetricRow>> {
    read_records(path)
}

/// Reads any headed CSV file into serde records.
pub fn read_records<R: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<R>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<R>, _>>()
        .map_err(|e| Error::csv(path, e))
}

/// Writes serde records to a headed CSV file.
pub fn write_records<R: Serialize>(path: impl AsRef<Path>, records: &[R]) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in records {
        writer.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
