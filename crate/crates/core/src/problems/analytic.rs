use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

use super::{check_dim, Problem};

/// `f(x) = 0.5 * sum_i d_i x_i^2` with `d` log-spaced over `[1, condition]`.
#[derive(Debug, Clone)]
pub struct QuadraticBowl<T> {
    diag: Vec<T>,
    condition: T,
}

pub fn quadratic_bowl<T: Scalar>(dim: usize, condition_number: T) -> Result<QuadraticBowl<T>> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "quadratic bowl needs dim >= 1".into(),
        ));
    }
    if !(condition_number >= T::one()) || !condition_number.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "condition number must be finite and >= 1, got {condition_number}"
        )));
    }
    let diag = (0..dim)
        .map(|i| {
            if dim == 1 {
                T::one()
            } else {
                let frac = T::lit(i as f64 / (dim - 1) as f64);
                condition_number.powf(frac)
            }
        })
        .collect();
    Ok(QuadraticBowl {
        diag,
        condition: condition_number,
    })
}

impl<T: Scalar> QuadraticBowl<T> {
    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }
}

impl<T: Scalar> Problem<T> for QuadraticBowl<T> {
    fn name(&self) -> String {
        format!("quadratic-d{}-k{}", self.diag.len(), self.condition)
    }

    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn eval(&self, x: &Tensor<T>) -> Result<(T, Tensor<T>)> {
        check_dim(x, self.dim())?;
        let half = T::lit(0.5);
        let mut loss = T::zero();
        let mut grad = Vec::with_capacity(self.diag.len());
        for (&d, &xi) in self.diag.iter().zip(x.data()) {
            loss += half * d * xi * xi;
            grad.push(d * xi);
        }
        Ok((loss, Tensor::vector(grad)))
    }

    fn optimum(&self) -> Option<(Tensor<T>, T)> {
        Some((Tensor::zeros(&[self.dim()]), T::zero()))
    }

    fn start_point(&self) -> Tensor<T> {
        Tensor::full(&[self.dim()], T::one())
    }
}

/// `f(x) = sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2`.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    dim: usize,
}

pub fn rosenbrock(dim: usize) -> Result<Rosenbrock> {
    if dim < 2 {
        return Err(Error::InvalidArgument("rosenbrock needs dim >= 2".into()));
    }
    Ok(Rosenbrock { dim })
}

impl<T: Scalar> Problem<T> for Rosenbrock {
    fn name(&self) -> String {
        format!("rosenbrock-d{}", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Tensor<T>) -> Result<(T, Tensor<T>)> {
        check_dim(x, self.dim)?;
        let x = x.data();
        let hundred = T::lit(100.0);
        let two = T::lit(2.0);
        let mut loss = T::zero();
        let mut grad = vec![T::zero(); self.dim];
        for i in 0..self.dim - 1 {
            let a = x[i + 1] - x[i] * x[i];
            let b = T::one() - x[i];
            loss += hundred * a * a + b * b;
            grad[i] += -T::lit(400.0) * x[i] * a - two * b;
            grad[i + 1] += two * hundred * a;
        }
        Ok((loss, Tensor::vector(grad)))
    }

    fn optimum(&self) -> Option<(Tensor<T>, T)> {
        Some((Tensor::full(&[self.dim], T::one()), T::zero()))
    }

    fn start_point(&self) -> Tensor<T> {
        let mut x = vec![T::one(); self.dim];
        for (i, xi) in x.iter_mut().enumerate() {
            if i % 2 == 0 {
                *xi = T::lit(-1.2);
            }
        }
        Tensor::vector(x)
    }
}
