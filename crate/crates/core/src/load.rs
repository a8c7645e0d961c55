//! Numeric kinds a load vector can hold.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

/// Token counts (`i64`) for discrete processes, reals (`f64`) for continuous ones.
pub trait Load:
    Copy
    + Send
    + Sync
    + Debug
    + Display
    + Default
    + PartialOrd
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    const DISCRETE: bool;

    fn to_f64(self) -> f64;

    /// `None` if `v` is not representable, e.g. fractional for a discrete load.
    fn from_f64(v: f64) -> Option<Self>;

    fn zero() -> Self {
        Self::default()
    }
}

impl Load for i64 {
    const DISCRETE: bool = true;

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn from_f64(v: f64) -> Option<Self> {
        (v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
    }
}

impl Load for f64 {
    const DISCRETE: bool = false;

    fn to_f64(self) -> f64 {
        self
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }
}

/// Convert a real vector to loads of kind `L`, failing on the first entry
/// that does not fit.
pub fn convert<L: Load>(values: &[f64]) -> Option<Vec<L>> {
    values.iter().map(|&v| L::from_f64(v)).collect()
}
