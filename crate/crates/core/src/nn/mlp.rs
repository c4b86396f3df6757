use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

use super::Batch;

/// Names of the parameter tensors, in [`MlpModel::params`] order.
pub const TENSOR_IDS: [&str; 4] = ["w1", "b1", "w2", "b2"];

/// `logits = relu(x W1 + b1) W2 + b2`, trained with softmax cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T> {
    params: [Tensor<T>; 4],
}

impl<T: Scalar> MlpModel<T> {
    /// He-initialised weights (`N(0, 2 / fan_in)`), zero biases.
    pub fn new(d_in: usize, hidden: usize, classes: usize, seed: u64) -> Result<Self> {
        check_sizes(d_in, hidden, classes)?;
        let mut rng = rng_from(seed, 0);
        let mut init = |rows: usize, cols: usize| {
            let sd = (2.0 / rows as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    T::lit(sd * z)
                })
                .collect();
            Tensor::from_vec(data, vec![rows, cols])
        };
        let w1 = init(d_in, hidden)?;
        let w2 = init(hidden, classes)?;
        Self::from_params([w1, Tensor::zeros(&[hidden]), w2, Tensor::zeros(&[classes])])
    }

    /// All-zero parameters: every input gets uniform class probabilities.
    pub fn zeros(d_in: usize, hidden: usize, classes: usize) -> Result<Self> {
        check_sizes(d_in, hidden, classes)?;
        Self::from_params([
            Tensor::zeros(&[d_in, hidden]),
            Tensor::zeros(&[hidden]),
            Tensor::zeros(&[hidden, classes]),
            Tensor::zeros(&[classes]),
        ])
    }

    pub fn from_params(params: [Tensor<T>; 4]) -> Result<Self> {
        let [w1, b1, w2, b2] = &params;
        let bad = || {
            Error::InvalidArgument(format!(
                "inconsistent MLP shapes {:?} {:?} {:?} {:?}",
                w1.shape(),
                b1.shape(),
                w2.shape(),
                b2.shape()
            ))
        };
        let (_, h) = w1.dims2().ok_or_else(bad)?;
        let (h2, c) = w2.dims2().ok_or_else(bad)?;
        if h2 != h || b1.shape() != [h] || b2.shape() != [c] {
            return Err(bad());
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[Tensor<T>; 4] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor<T>; 4] {
        &mut self.params
    }

    pub fn shapes(&self) -> Vec<Vec<usize>> {
        self.params.iter().map(|p| p.shape().to_vec()).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.params[0].shape()[0]
    }

    pub fn hidden(&self) -> usize {
        self.params[0].shape()[1]
    }

    pub fn classes(&self) -> usize {
        self.params[3].len()
    }

    fn hidden_pre(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        x.matmul(&self.params[0])?.add_row_vector(&self.params[1])
    }

    /// Raw class scores, one row per input row.
    pub fn logits(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let a1 = self.hidden_pre(x)?.map(relu);
        a1.matmul(&self.params[2])?.add_row_vector(&self.params[3])
    }

    /// Row-wise softmax of the logits.
    pub fn probabilities(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let logits = self.logits(x)?;
        let c = self.classes();
        let mut out = logits.into_data();
        for row in out.chunks_exact_mut(c) {
            softmax_in_place(row);
        }
        Tensor::from_vec(out, vec![x.shape()[0], c])
    }

    pub fn predict(&self, x: &Tensor<T>) -> Result<Vec<usize>> {
        let logits = self.logits(x)?;
        Ok(logits
            .data()
            .chunks_exact(self.classes())
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, T::neg_infinity()), |best, (k, &v)| {
                        if v > best.1 {
                            (k, v)
                        } else {
                            best
                        }
                    })
                    .0
            })
            .collect())
    }

    /// Fraction of rows whose arg-max prediction equals the label.
    pub fn accuracy(&self, batch: &Batch<T>) -> Result<f64> {
        let pred = self.predict(&batch.x)?;
        let hits = pred.iter().zip(&batch.y).filter(|(p, y)| p == y).count();
        Ok(hits as f64 / batch.len() as f64)
    }

    /// Mean softmax cross-entropy over the batch and its exact gradient with
    /// respect to `[W1, b1, W2, b2]`.
    pub fn forward_backward(&self, batch: &Batch<T>) -> Result<(T, [Tensor<T>; 4])> {
        if batch.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let c = self.classes();
        if let Some(&bad) = batch.y.iter().find(|&&y| y >= c) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside 0..{c}"
            )));
        }
        let rows = batch.len();
        let z1 = self.hidden_pre(&batch.x)?;
        let a1 = z1.map(relu);
        let logits = a1
            .matmul(&self.params[2])?
            .add_row_vector(&self.params[3])?;
        if !logits.is_finite() {
            return Err(Error::NonFinite {
                what: "activation",
                step: 0,
            });
        }

        let inv_n = T::one() / T::from_usize_lossy(rows);
        let mut loss = T::zero();
        let mut delta = logits.into_data();
        for (row, &y) in delta.chunks_exact_mut(c).zip(&batch.y) {
            let lse = log_sum_exp(row);
            loss += lse - row[y];
            softmax_in_place(row);
            row[y] -= T::one();
            for v in row.iter_mut() {
                *v *= inv_n;
            }
        }
        let loss = loss * inv_n;
        let delta = Tensor::from_vec(delta, vec![rows, c])?;

        let g_w2 = a1.transpose()?.matmul(&delta)?;
        let g_b2 = delta.sum_rows()?;
        let da1 = delta.matmul(&self.params[2].transpose()?)?;
        let dz1 = da1.zip_with(&z1, |d, z| if z > T::zero() { d } else { T::zero() })?;
        let g_w1 = batch.x.transpose()?.matmul(&dz1)?;
        let g_b1 = dz1.sum_rows()?;
        Ok((loss, [g_w1, g_b1, g_w2, g_b2]))
    }

    /// Mean cross-entropy only.
    pub fn loss(&self, batch: &Batch<T>) -> Result<T> {
        Ok(self.forward_backward(batch)?.0)
    }
}

fn check_sizes(d_in: usize, hidden: usize, classes: usize) -> Result<()> {
    if d_in == 0 || hidden == 0 || classes == 0 {
        return Err(Error::InvalidArgument(format!(
            "MLP sizes must be positive, got {d_in}x{hidden}x{classes}"
        )));
    }
    Ok(())
}

fn relu<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

fn log_sum_exp<T: Scalar>(row: &[T]) -> T {
    let max = row.iter().copied().fold(T::neg_infinity(), T::max);
    max + row
        .iter()
        .fold(T::zero(), |acc, &v| acc + (v - max).exp())
        .ln()
}

fn softmax_in_place<T: Scalar>(row: &mut [T]) {
    let max = row.iter().copied().fold(T::neg_infinity(), T::max);
    let mut total = T::zero();
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}
