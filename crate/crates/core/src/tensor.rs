//! Dense row-major tensors.
//!
//! Only what the optimizers and the two-layer network need: per-element
//! arithmetic, an L2 norm, and a plain matrix product. There is no implicit
//! broadcasting; binary operations require identical shapes and the few
//! row-wise helpers used by the network are spelled out explicitly.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    data: Vec<T>,
    shape: Vec<usize>,
}

/// Binary per-element operations between two tensors of equal shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Unary per-element operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Square,
    Sqrt,
    Abs,
    Sigmoid,
}

/// Operations between a tensor and a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarOp {
    Scale,
    AddScalar,
}

/// Any per-element operation together with its right-hand side.
#[derive(Debug, Clone, Copy)]
pub enum Elementwise<'a, T> {
    Binary(BinaryOp, &'a Tensor<T>),
    Unary(UnaryOp),
    Scalar(ScalarOp, T),
}

/// Applies `op` to every element of `a`.
pub fn elementwise<T: Scalar>(a: &Tensor<T>, op: Elementwise<'_, T>) -> Result<Tensor<T>> {
    match op {
        Elementwise::Binary(op, b) => a.zip_with(b, |x, y| apply_binary(op, x, y)),
        Elementwise::Unary(op) => Ok(a.map(|x| apply_unary(op, x))),
        Elementwise::Scalar(ScalarOp::Scale, s) => Ok(a.map(|x| x * s)),
        Elementwise::Scalar(ScalarOp::AddScalar, s) => Ok(a.map(|x| x + s)),
    }
}

#[inline]
fn apply_binary<T: Scalar>(op: BinaryOp, x: T, y: T) -> T {
    match op {
        BinaryOp::Add => x + y,
        BinaryOp::Sub => x - y,
        BinaryOp::Mul => x * y,
        BinaryOp::Div => x / y,
    }
}

#[inline]
fn apply_unary<T: Scalar>(op: UnaryOp, x: T) -> T {
    match op {
        UnaryOp::Square => x * x,
        UnaryOp::Sqrt => x.sqrt(),
        UnaryOp::Abs => x.abs(),
        UnaryOp::Sigmoid => sigmoid(x),
    }
}

#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

impl<T: Scalar> Tensor<T> {
    pub fn from_vec(data: Vec<T>, shape: Vec<usize>) -> Result<Self> {
        if shape.contains(&0) || shape.iter().product::<usize>() != data.len() {
            return Err(Error::InvalidShape {
                shape,
                len: data.len(),
            });
        }
        Ok(Self { data, shape })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, T::zero())
    }

    pub fn full(shape: &[usize], value: T) -> Self {
        assert!(
            !shape.is_empty() && shape.iter().all(|&d| d > 0),
            "tensor extents must be positive, got {shape:?}"
        );
        Self {
            data: vec![value; shape.iter().product()],
            shape: shape.to_vec(),
        }
    }

    /// One-dimensional tensor holding `data`.
    ///
    /// # Panics
    /// If `data` is empty.
    pub fn vector(data: Vec<T>) -> Self {
        let n = data.len();
        Self::from_vec(data, vec![n]).expect("vector must be non-empty")
    }

    pub fn scalar(x: T) -> Self {
        Self::vector(vec![x])
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        Self::from_vec(data, vec![rows, cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = T::one();
        }
        t
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Rows and columns of a rank-2 tensor.
    pub fn dims2(&self) -> Option<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Some((r, c)),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            data: self.data.iter().map(|&x| f(x)).collect(),
            shape: self.shape.clone(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&x, &y)| f(x, y))
                .collect(),
            shape: self.shape.clone(),
        })
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        elementwise(self, Elementwise::Binary(BinaryOp::Add, other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        elementwise(self, Elementwise::Binary(BinaryOp::Sub, other))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        elementwise(self, Elementwise::Binary(BinaryOp::Mul, other))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        elementwise(self, Elementwise::Binary(BinaryOp::Div, other))
    }

    pub fn square(&self) -> Self {
        self.map(|x| x * x)
    }

    pub fn sqrt(&self) -> Self {
        self.map(|x| x.sqrt())
    }

    pub fn abs(&self) -> Self {
        self.map(|x| x.abs())
    }

    pub fn sigmoid(&self) -> Self {
        self.map(sigmoid)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn add_scalar(&self, s: T) -> Self {
        self.map(|x| x + s)
    }

    pub fn sum(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x)
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&x, &y)| acc + x * y))
    }

    /// Euclidean norm of the flattened buffer; 0 for an all-zero tensor.
    pub fn l2_norm(&self) -> T {
        l2_norm_of(&self.data)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        matmul(self, other)
    }

    pub fn transpose(&self) -> Result<Self> {
        let (r, c) = self.dims2().ok_or_else(|| Error::InvalidShape {
            shape: self.shape.clone(),
            len: self.len(),
        })?;
        let mut out = vec![T::zero(); r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = self.data[i * c + j];
            }
        }
        Self::from_vec(out, vec![c, r])
    }

    /// Adds a length-`cols` vector to every row of a `rows x cols` matrix.
    pub fn add_row_vector(&self, row: &Self) -> Result<Self> {
        let (_, c) = self.dims2().ok_or_else(|| Error::ShapeMismatch {
            left: self.shape.clone(),
            right: row.shape.clone(),
        })?;
        if row.shape != [c] {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: row.shape.clone(),
            });
        }
        let mut out = self.clone();
        for chunk in out.data.chunks_exact_mut(c) {
            for (x, &b) in chunk.iter_mut().zip(&row.data) {
                *x += b;
            }
        }
        Ok(out)
    }

    /// Column sums of a matrix, as a vector of length `cols`.
    pub fn sum_rows(&self) -> Result<Self> {
        let (_, c) = self.dims2().ok_or_else(|| Error::InvalidShape {
            shape: self.shape.clone(),
            len: self.len(),
        })?;
        let mut out = vec![T::zero(); c];
        for chunk in self.data.chunks_exact(c) {
            for (acc, &x) in out.iter_mut().zip(chunk) {
                *acc += x;
            }
        }
        Ok(Self::vector(out))
    }

    /// Selects rows of a matrix by index.
    pub fn gather_rows(&self, indices: &[usize]) -> Result<Self> {
        let (r, c) = self.dims2().ok_or_else(|| Error::InvalidShape {
            shape: self.shape.clone(),
            len: self.len(),
        })?;
        if indices.is_empty() {
            return Err(Error::Empty("row selection"));
        }
        let mut out = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            if i >= r {
                return Err(Error::InvalidArgument(format!(
                    "row index {i} out of range for {r} rows"
                )));
            }
            out.extend_from_slice(&self.data[i * c..(i + 1) * c]);
        }
        Self::from_vec(out, vec![indices.len(), c])
    }
}

pub(crate) fn l2_norm_of<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Standard matrix product of an `m x k` and a `k x n` matrix.
pub fn matmul<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let mismatch = || Error::MatmulMismatch {
        left: a.shape.clone(),
        right: b.shape.clone(),
    };
    let (m, k) = a.dims2().ok_or_else(mismatch)?;
    let (k2, n) = b.dims2().ok_or_else(mismatch)?;
    if k != k2 {
        return Err(mismatch());
    }
    let mut out = vec![T::zero(); m * n];
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a.data[i * k + p];
            if aip == T::zero() {
                continue;
            }
            let b_row = &b.data[p * n..(p + 1) * n];
            for (o, &bpj) in out_row.iter_mut().zip(b_row) {
                *o += aip * bpj;
            }
        }
    }
    Tensor::from_vec(out, vec![m, n])
}
