//! Exact rational numbers, the ground truth for both case studies.
//!
//! Backed by `num_rational::BigRational`, which keeps every value in canonical
//! form (positive denominator, numerator and denominator coprime).

use num_bigint::BigInt;
use num_traits::FromPrimitive;

pub type Rational = num_rational::BigRational;

pub fn from_int(value: impl Into<BigInt>) -> Rational {
    Rational::from_integer(value.into())
}

/// The exact value denoted by a finite binary64 number.
pub fn from_f64(value: f64) -> Option<Rational> {
    if value.is_finite() {
        Rational::from_f64(value)
    } else {
        None
    }
}
