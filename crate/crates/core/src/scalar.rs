//! Scalar abstraction for measurement averages and accuracies.
//!
//! Labels produced by the measurement functions are integers (seed flags,
//! attendance counts, cascade lengths), so every average is a ratio of
//! integers. Any type that can represent such ratios works: `f32`, `f64`, or
//! an exact rational such as [`num_rational::Ratio<i64>`].

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + PartialOrd + Clone + Debug + Display + Send + Sync
{
    fn from_count(count: usize) -> Self {
        Self::from_usize(count).expect("count representable in scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + FromPrimitive
        + ToPrimitive
        + PartialOrd
        + Clone
        + Debug
        + Display
        + Send
        + Sync
{
}
