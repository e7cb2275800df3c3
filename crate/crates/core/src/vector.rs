//! Embedding vectors and the elementary operations on them.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VectorError {
    #[error("embedding has no components")]
    Empty,
    #[error("embedding component {index} is not finite")]
    NonFinite { index: usize },
    #[error("vector norm {norm:e} is at or below the degenerate threshold")]
    DegenerateVector { norm: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

impl VectorError {
    pub fn class(&self) -> &'static str {
        match self {
            VectorError::Empty => "EmptyEmbedding",
            VectorError::NonFinite { .. } => "NonFinite",
            VectorError::DegenerateVector { .. } => "DegenerateVector",
            VectorError::DimensionMismatch { .. } => "DimensionMismatch",
        }
    }
}

/// A fixed-dimension real vector for one utterance in one model space.
///
/// Always non-empty with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T: Scalar = f64> {
    values: Vec<T>,
}

impl<T: Scalar> Embedding<T> {
    pub fn new(values: Vec<T>) -> Result<Self, VectorError> {
        if values.is_empty() {
            return Err(VectorError::Empty);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(VectorError::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn norm(&self) -> T {
        norm(&self.values)
    }

    pub fn dot(&self, other: &Self) -> Result<T, VectorError> {
        check_dims(self.dim(), other.dim())?;
        Ok(dot(&self.values, &other.values))
    }

    /// Multiplies every component by `s`.
    pub fn scaled(&self, s: T) -> Result<Self, VectorError> {
        Self::new(self.values.iter().map(|&v| v * s).collect())
    }
}

fn check_dims(left: usize, right: usize) -> Result<(), VectorError> {
    if left != right {
        return Err(VectorError::DimensionMismatch { left, right });
    }
    Ok(())
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Checks that `n` exceeds the degenerate threshold.
pub(crate) fn check_norm<T: Scalar>(n: T) -> Result<T, VectorError> {
    if n > T::degenerate_eps() {
        Ok(n)
    } else {
        Err(VectorError::DegenerateVector {
            norm: n.to_f64_lossy(),
        })
    }
}

/// Returns `v / ||v||`.
pub fn l2_normalize<T: Scalar>(v: &Embedding<T>) -> Result<Embedding<T>, VectorError> {
    let n = check_norm(v.norm())?;
    Ok(Embedding {
        values: v.values.iter().map(|&x| x / n).collect(),
    })
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine<T: Scalar>(a: &Embedding<T>, b: &Embedding<T>) -> Result<T, VectorError> {
    check_dims(a.dim(), b.dim())?;
    cosine_slices(&a.values, &b.values)
}

pub(crate) fn cosine_slices<T: Scalar>(a: &[T], b: &[T]) -> Result<T, VectorError> {
    check_dims(a.len(), b.len())?;
    let na = check_norm(norm(a))?;
    let nb = check_norm(norm(b))?;
    let c = dot(a, b) / (na * nb);
    Ok(c.max(-T::one()).min(T::one()))
}
