//! Floating point abstraction shared by the numeric kernels.
//!
//! Everything that does real arithmetic (Hawkes intensities, ensemble
//! statistics, centralities, regression) is written against [`Scalar`] so it
//! can run in `f32` or `f64`. The pipeline itself uses `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent
    /// finite `f64` values at all, which does not happen for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Mean of a slice, zero for an empty slice.
pub fn mean<F: Scalar>(xs: &[F]) -> F {
    if xs.is_empty() {
        return F::zero();
    }
    xs.iter().copied().sum::<F>() / F::from_count(xs.len())
}

/// Linear-interpolated quantile (the "type 7" definition) of unsorted data.
pub fn quantile<F: Scalar>(xs: &[F], q: F) -> Option<F> {
    if xs.is_empty() {
        return None;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let h = F::from_count(sorted.len() - 1) * q;
    let lo = h.floor();
    let lo_idx = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let hi_idx = (lo_idx + 1).min(sorted.len() - 1);
    Some(sorted[lo_idx] + (h - lo) * (sorted[hi_idx] - sorted[lo_idx]))
}
