use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type used for brevity penalties and composed BLEU scores.
///
/// Match counts and precisions stay in exact integer arithmetic; only the
/// exponential/logarithmic composition is carried out in `Scalar`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    #[inline]
    fn from_ratio(numer: u64, denom: u64) -> Self {
        Self::from_u64(numer).unwrap() / Self::from_u64(denom).unwrap()
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}
