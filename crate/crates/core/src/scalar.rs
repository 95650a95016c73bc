//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! Two tiers:
//!
//! * [`Scalar`] covers the ring operations, absolute value and ordering. It is
//!   implemented for `f32`, `f64` and the exact rationals `Ratio<i64>` /
//!   `Ratio<i128>`. Everything that only needs `+ - * /`, `|.|` and `max`
//!   (trees, distances, nonlinear expectations, optimal stopping,
//!   decompositions, convolutions) is written against this trait, so the same
//!   code runs in exact arithmetic.
//! * [`Real`] adds the transcendental functions (`sqrt`, `exp`, ...) through
//!   [`num_traits::Float`]; generators, the backward-induction oracle and the
//!   viscosity checkers need it.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed};

pub trait Scalar:
    Copy
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + Send
    + Sync
    + 'static
{
    /// False for NaN and infinities; always true for exact types.
    fn is_finite_value(&self) -> bool;

    /// Converts an `f64` literal. Panics if the target cannot represent it,
    /// which only happens for non-finite inputs.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| panic!("literal {x} not representable"))
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(|| panic!("count {n} not representable"))
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

    /// `max(self, 0)`.
    fn pos_part(self) -> Self {
        self.max_of(Self::zero())
    }

    /// `max(-self, 0)`.
    fn neg_part(self) -> Self {
        (-self).max_of(Self::zero())
    }

    /// Nearest `f64`, for reporting and error messages.
    fn as_f64(self) -> f64;

    /// Relative round-off allowance for identities that hold exactly in
    /// exact arithmetic. Zero for rationals.
    fn roundoff() -> Self {
        Self::zero()
    }
}

/// Scalars with a floating-point representation.
pub trait Real: Scalar + Float {}

impl Scalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn as_f64(self) -> f64 {
        self
    }

    fn roundoff() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn as_f64(self) -> f64 {
        self as f64
    }

    fn roundoff() -> Self {
        1e-4
    }
}

impl Scalar for Ratio<i64> {
    fn is_finite_value(&self) -> bool {
        true
    }

    fn as_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Scalar for Ratio<i128> {
    fn is_finite_value(&self) -> bool {
        true
    }

    fn as_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Real for f64 {}
impl Real for f32 {}

/// Maximum of a nonempty iterator; `None` when empty.
pub fn max_all<S: Scalar>(it: impl IntoIterator<Item = S>) -> Option<S> {
    it.into_iter().reduce(S::max_of)
}

/// Sup-norm of a slice (0 for an empty slice).
pub fn sup_norm<S: Scalar>(values: &[S]) -> S {
    values.iter().map(|v| v.abs()).fold(S::zero(), S::max_of)
}
