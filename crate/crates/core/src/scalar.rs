use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Embedding coordinate type.
///
/// Arithmetic on chromosomes (crossover, mutation, difference vectors) happens
/// in `Self`; distances are always accumulated in `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Send + Sync + Serialize + DeserializeOwned + 'static
{
    #[inline]
    fn widen(self) -> f64 {
        // Float -> f64 cannot fail for f32/f64.
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn narrow(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(Self::nan)
    }

    /// Raw bit pattern widened to 64 bits, for bit-exact comparisons.
    fn bits(self) -> u64;
}

impl Scalar for f32 {
    fn bits(self) -> u64 {
        u64::from(self.to_bits())
    }
}

impl Scalar for f64 {
    fn bits(self) -> u64 {
        self.to_bits()
    }
}
