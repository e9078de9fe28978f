//! Numeric abstraction shared by the bounds kernel.
//!
//! Every formula in this crate only needs ring operations, ordering and
//! halving, so it runs unchanged over `f32`, `f64` and exact rationals.
//! Exact types report a zero tolerance: comparisons are exact there.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Scalar type usable for probabilities and payoffs.
pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Comparison tolerance corresponding to an `f64` epsilon.
    ///
    /// Floating types never go below a few ulps of their own precision;
    /// exact types return zero.
    fn tolerance(eps: f64) -> Self;

    /// False for NaN and infinities.
    fn is_finite_scalar(&self) -> bool;

    /// `num / den` as exactly as the type allows. `None` when `den == 0`
    /// or the ratio is not representable.
    fn ratio(num: u64, den: u64) -> Option<Self>;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half(self) -> Self {
        self / Self::two()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn tolerance(eps: f64) -> Self {
        eps.max(4.0 * f64::EPSILON)
    }

    fn is_finite_scalar(&self) -> bool {
        self.is_finite()
    }

    fn ratio(num: u64, den: u64) -> Option<Self> {
        (den != 0).then(|| num as f64 / den as f64)
    }
}

impl Scalar for f32 {
    fn tolerance(eps: f64) -> Self {
        (eps as f32).max(16.0 * f32::EPSILON)
    }

    fn is_finite_scalar(&self) -> bool {
        self.is_finite()
    }

    fn ratio(num: u64, den: u64) -> Option<Self> {
        (den != 0).then(|| (num as f64 / den as f64) as f32)
    }
}

// Ratio<i64> overflows (and panics in debug builds) once denominators grow
// large; it is intended for small, hand-checked inputs.
impl Scalar for Ratio<i64> {
    fn tolerance(_eps: f64) -> Self {
        Ratio::from_integer(0)
    }

    fn is_finite_scalar(&self) -> bool {
        true
    }

    fn ratio(num: u64, den: u64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let num = i64::try_from(num).ok()?;
        let den = i64::try_from(den).ok()?;
        Some(Ratio::new(num, den))
    }
}

/// Largest element; `None` for an empty iterator.
pub fn max_all<S: Scalar>(values: impl IntoIterator<Item = S>) -> Option<S> {
    values.into_iter().reduce(S::max_of)
}

/// Smallest element; `None` for an empty iterator.
pub fn min_all<S: Scalar>(values: impl IntoIterator<Item = S>) -> Option<S> {
    values.into_iter().reduce(S::min_of)
}
