//! Floating point abstraction shared by the vector, gating, fusion and metric code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};

/// Real scalar the scoring math is generic over: `f32` or `f64`.
///
/// Pipelines that read and write files use `f64` throughout; `f32` is
/// supported for callers that hold single precision embeddings in memory.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Norm at or below which a vector is treated as degenerate.
    fn degenerate_eps() -> Self {
        Self::from_f64(1e-12).expect("epsilon is representable")
    }

    /// Lossy conversion from `f64` for constants.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal is representable")
    }

    /// Lossy conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
