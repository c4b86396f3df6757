use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::optim::Optimizer;
use crate::rng::rng_from;
use crate::scalar::Scalar;
use crate::telemetry::MetricRow;

use super::{Dataset, MlpModel, DEFAULT_BATCH_SIZE, TENSOR_IDS};

/// Factor applied to the step size once the drop epoch has passed.
pub const LR_DROP_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub shuffle_seed: u64,
    /// Epochs run at the initial step size; later epochs use
    /// `alpha * LR_DROP_FACTOR`. `None` keeps the step size constant.
    pub lr_drop_epoch: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: DEFAULT_BATCH_SIZE,
            shuffle_seed: 0,
            lr_drop_epoch: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        if let Some(d) = self.lr_drop_epoch {
            if d > self.epochs {
                return Err(Error::InvalidArgument(format!(
                    "lr drop epoch {d} is past the last epoch {}",
                    self.epochs
                )));
            }
        }
        Ok(())
    }

    /// Step size used during `epoch` (1-based).
    pub fn alpha_for_epoch<T: Scalar>(&self, base: T, epoch: usize) -> T {
        match self.lr_drop_epoch {
            Some(d) if epoch > d => base * T::lit(LR_DROP_FACTOR),
            _ => base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    /// Sample-weighted mean of the minibatch losses seen during the epoch.
    pub train_loss: f64,
    pub test_accuracy: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochSummary>,
    /// One row per optimizer step and parameter tensor.
    pub rows: Vec<MetricRow>,
}

impl TrainLog {
    pub fn final_test_accuracy(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.test_accuracy)
    }
}

/// Trains `model` in place on the training split.
///
/// Each epoch visits the training indices in a Fisher-Yates order drawn from
/// `(shuffle_seed, epoch)`; the final batch of an epoch may be short.
pub fn train<T: Scalar>(
    model: &mut MlpModel<T>,
    data: &Dataset<T>,
    optimizer: &mut Optimizer<T>,
    config: &TrainConfig,
    run_id: &str,
) -> Result<TrainLog> {
    config.validate()?;
    if optimizer.steps() != 0 {
        return Err(Error::InvalidArgument(
            "training needs a fresh optimizer".into(),
        ));
    }
    if model.input_dim() != data.input_dim() || model.classes() != data.classes() {
        return Err(Error::InvalidArgument(format!(
            "model expects {} inputs / {} classes, data has {} / {}",
            model.input_dim(),
            model.classes(),
            data.input_dim(),
            data.classes()
        )));
    }
    let test = data.batch(data.test_indices())?;
    let base_alpha = optimizer.learning_rate();
    let mut order = data.train_indices().to_vec();
    let mut log = TrainLog {
        epochs: Vec::with_capacity(config.epochs),
        rows: Vec::new(),
    };
    let mut step = 0u64;

    for epoch in 1..=config.epochs {
        let alpha = config.alpha_for_epoch(base_alpha, epoch);
        optimizer.set_learning_rate(alpha);
        order.shuffle(&mut rng_from(config.shuffle_seed, epoch as u64));

        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            step += 1;
            let batch = data.batch(chunk)?;
            let (loss, grads) = model.forward_backward(&batch).map_err(|e| match e {
                Error::NonFinite { what, .. } => Error::NonFinite { what, step },
                other => other,
            })?;
            if !loss.is_finite() {
                return Err(Error::NonFinite { what: "loss", step });
            }
            let reports = optimizer
                .step(model.params_mut(), &grads)
                .map_err(|e| match e {
                    Error::NonFinite { what, .. } => Error::NonFinite { what, step },
                    other => other,
                })?;
            loss_sum += loss.as_f64() * chunk.len() as f64;
            for (id, r) in TENSOR_IDS.iter().zip(&reports) {
                log.rows.push(MetricRow {
                    run_id: run_id.to_string(),
                    step,
                    epoch: Some(epoch as u64),
                    tensor_id: (*id).to_string(),
                    loss: loss.as_f64(),
                    g_norm: r.g_norm.as_f64(),
                    e_t: r.e_after.as_f64(),
                    correction_applied: r.correction_applied,
                    effective_alpha: alpha.as_f64(),
                });
            }
        }
        log.epochs.push(EpochSummary {
            epoch,
            train_loss: loss_sum / order.len() as f64,
            test_accuracy: model.accuracy(&test)?,
            alpha: alpha.as_f64(),
        });
    }
    optimizer.set_learning_rate(base_alpha);
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::make_blobs;
    use crate::optim::{make_optimizer, HyperParams, OptimizerKind};

    fn setup(alpha: f64) -> (MlpModel<f64>, Dataset<f64>, Optimizer<f64>) {
        let data = make_blobs(200, 5, 3, 1.0, 1).unwrap();
        let model = MlpModel::new(5, 8, 3, 2).unwrap();
        let opt = make_optimizer(
            OptimizerKind::AdamNorm,
            HyperParams::default().with_alpha(alpha),
            &model.shapes(),
        )
        .unwrap();
        (model, data, opt)
    }

    #[test]
    fn zero_step_size_changes_nothing() {
        let (mut model, data, mut opt) = setup(0.0);
        let before = model.clone();
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 32,
            ..Default::default()
        };
        let log = train(&mut model, &data, &mut opt, &cfg, "r").unwrap();
        assert_eq!(model, before);
        let losses: Vec<f64> = log.epochs.iter().map(|e| e.train_loss).collect();
        for l in &losses[1..] {
            assert!((l - losses[0]).abs() < 1e-12, "{losses:?}");
        }
    }

    #[test]
    fn step_size_drops_after_configured_epoch() {
        let (mut model, data, mut opt) = setup(0.01);
        let cfg = TrainConfig {
            epochs: 4,
            batch_size: 50,
            shuffle_seed: 3,
            lr_drop_epoch: Some(2),
        };
        let log = train(&mut model, &data, &mut opt, &cfg, "r").unwrap();
        let alphas: Vec<f64> = log.epochs.iter().map(|e| e.alpha).collect();
        assert_eq!(alphas, vec![0.01, 0.01, 0.01 * 0.1, 0.01 * 0.1]);
        let first_dropped = log.rows.iter().find(|r| r.epoch == Some(3)).unwrap();
        let last_before = log.rows.iter().rev().find(|r| r.epoch == Some(2)).unwrap();
        assert_eq!(
            first_dropped.effective_alpha,
            last_before.effective_alpha * 0.1
        );
    }

    #[test]
    fn steps_and_rows_line_up() {
        let (mut model, data, mut opt) = setup(0.01);
        let cfg = TrainConfig {
            epochs: 2,
            batch_size: 64,
            ..Default::default()
        };
        let log = train(&mut model, &data, &mut opt, &cfg, "r").unwrap();
        // 160 training samples -> batches of 64, 64, 32
        assert_eq!(log.rows.len(), 2 * 3 * 4);
        assert_eq!(log.rows.last().unwrap().step, 6);
        assert!(train(&mut model, &data, &mut opt, &cfg, "r").is_err());
    }

    #[test]
    fn invalid_config() {
        let (mut model, data, mut opt) = setup(0.01);
        let cfg = TrainConfig {
            epochs: 2,
            lr_drop_epoch: Some(3),
            ..Default::default()
        };
        assert!(train(&mut model, &data, &mut opt, &cfg, "r").is_err());
        let cfg = TrainConfig {
            batch_size: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
