//! Numeric abstraction shared by the exact and floating-point solver paths.
//!
//! Probabilities are always *stored* as arbitrary-precision rationals; the
//! [`Scalar`] trait lets the solvers run either exactly over those rationals
//! or approximately over `f64`. In float mode every comparison goes through
//! an explicit tolerance, in exact mode the tolerance is zero.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Field-like scalar used by the solvers. Implemented for [`BigRational`]
/// (exact mode) and `f64` (tolerance mode).
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact and tolerances are ignored.
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;

    fn abs_val(&self) -> Self;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// `a >= b` up to `tol` (i.e. `a >= b - tol`).
pub fn ge_tol<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    *a >= b.clone() - tol.clone()
}

/// `a == b` up to `tol`.
pub fn eq_tol<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    (a.clone() - b.clone()).abs_val() <= *tol
}

/// Lossy conversion that survives numerators/denominators far beyond the
/// `f64` range (the reduction constants overflow `to_f64` on the naive
/// path for extreme inputs, so divide in integer space first).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Scale down both sides by a common power of two until they fit.
    let bits = num.bits().max(den.bits());
    if bits <= 900 {
        let n = to_f64_big(num);
        let d = to_f64_big(den);
        return n / d;
    }
    let shift = bits - 512;
    let n = to_f64_big(&(num >> shift));
    let d = to_f64_big(&(den >> shift));
    n / d
}

fn to_f64_big(i: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    i.to_f64().unwrap_or(f64::INFINITY)
}

/// Exact conversion: every finite `f64` is a rational number.
pub fn f64_to_rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Rational from an integer pair.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `base^exp` for rationals with a nonnegative integer exponent.
pub fn pow(base: &BigRational, exp: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_comparisons() {
        assert!(ge_tol(&0.999_999_999_9_f64, &1.0, &1e-9));
        assert!(!ge_tol(&0.99_f64, &1.0, &1e-9));
        assert!(ge_tol(&ratio(1, 3), &ratio(1, 3), &BigRational::zero()));
        assert!(!ge_tol(
            &ratio(1, 3),
            &(ratio(1, 3) + ratio(1, 1_000_000_000)),
            &BigRational::zero()
        ));
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = pow(&int(12), 400);
        let r = BigRational::new(big.numer().clone(), BigInt::from(2) * big.numer());
        assert!((rational_to_f64(&r) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f64_round_trip_is_exact() {
        let r = f64_to_rational(0.1).unwrap();
        assert_eq!(rational_to_f64(&r), 0.1);
    }
}
