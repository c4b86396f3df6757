use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Fraction of each class assigned to the training split.
const TRAIN_FRACTION: f64 = 0.8;

/// Labelled samples with a fixed train/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Tensor<T>,
    y: Vec<usize>,
    classes: usize,
    train: Vec<usize>,
    test: Vec<usize>,
}

/// A minibatch: `x` is `rows x d_in`, `y` holds one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub x: Tensor<T>,
    pub y: Vec<usize>,
}

impl<T: Scalar> Batch<T> {
    pub fn new(x: Tensor<T>, y: Vec<usize>) -> Result<Self> {
        let (rows, _) = x.dims2().ok_or_else(|| Error::InvalidShape {
            shape: x.shape().to_vec(),
            len: x.len(),
        })?;
        if rows != y.len() {
            return Err(Error::InvalidArgument(format!(
                "{rows} rows but {} labels",
                y.len()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Gaussian blobs, one per class, with features standardized to zero mean
/// and unit variance.
///
/// Class centres are standard normal vectors; sample `i` gets label
/// `i % classes` and sits at its centre plus `spread * N(0, I)` noise. Each
/// class is split 80/20 into train and test, so every class needs at least two
/// samples (`n >= 2 * classes`).
pub fn make_blobs<T: Scalar>(
    n: usize,
    d_in: usize,
    classes: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset<T>> {
    if classes == 0 || d_in == 0 {
        return Err(Error::InvalidArgument(
            "blobs need d_in >= 1 and classes >= 1".into(),
        ));
    }
    if n < 2 * classes {
        return Err(Error::InvalidArgument(format!(
            "{n} samples cannot cover {classes} classes in both splits (need >= {})",
            2 * classes
        )));
    }
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "spread must be positive, got {spread}"
        )));
    }

    let mut rng = rng_from(seed, 0);
    let centres: Vec<f64> = (0..classes * d_in)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let mut rng = rng_from(seed, 1);
    let y: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let mut raw = Vec::with_capacity(n * d_in);
    for &label in &y {
        for j in 0..d_in {
            let z: f64 = StandardNormal.sample(&mut rng);
            raw.push(centres[label * d_in + j] + spread * z);
        }
    }
    standardize(&mut raw, n, d_in);
    let x = Tensor::from_vec(raw.into_iter().map(T::lit).collect(), vec![n, d_in])?;

    let mut rng = rng_from(seed, 2);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..classes {
        let mut members: Vec<usize> = (c..n).step_by(classes).collect();
        members.shuffle(&mut rng);
        let k =
            ((members.len() as f64 * TRAIN_FRACTION).floor() as usize).clamp(1, members.len() - 1);
        train.extend_from_slice(&members[..k]);
        test.extend_from_slice(&members[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Dataset {
        x,
        y,
        classes,
        train,
        test,
    })
}

fn standardize(data: &mut [f64], n: usize, d: usize) {
    for j in 0..d {
        let mean = (0..n).map(|i| data[i * d + j]).sum::<f64>() / n as f64;
        let var = (0..n)
            .map(|i| (data[i * d + j] - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        let sd = var.sqrt();
        for i in 0..n {
            let v = &mut data[i * d + j];
            *v -= mean;
            if sd > 0.0 {
                *v /= sd;
            }
        }
    }
}

impl<T: Scalar> Dataset<T> {
    pub fn features(&self) -> &Tensor<T> {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn input_dim(&self) -> usize {
        self.x.shape()[1]
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.train
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test
    }

    pub fn batch(&self, indices: &[usize]) -> Result<Batch<T>> {
        let x = self.x.gather_rows(indices)?;
        Batch::new(x, indices.iter().map(|&i| self.y[i]).collect())
    }

    /// Number of samples per class.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.classes];
        for &c in &self.y {
            h[c] += 1;
        }
        h
    }
}
