//! Scalar abstraction so the whole pipeline runs at f32 or f64.

use num_traits::{Float, FloatConst, NumAssign};
use std::fmt::{Debug, Display};

/// Floating-point scalar the toolkit is generic over.
pub trait Scalar:
    Float + FloatConst + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn into_f64(self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn into_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn into_f64(self) -> f64 {
        self
    }
}
