//! Integer types the solver kernels run on.
//!
//! Kernels are generic over [`Energy`]. A polynomial whose
//! `|offset| + sum |coeff|` bound fits comfortably in a machine word runs on
//! `i64` or `i128`; anything larger runs on `BigInt`. Every width is exact,
//! the choice only affects speed.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

use crate::poly::BinaryPolynomial;

pub(crate) trait Energy: Clone + Ord + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    /// Caller guarantees the value fits.
    fn from_big(v: &BigInt) -> Self;
    fn to_big(&self) -> BigInt;
    fn add_assign(&mut self, rhs: &Self);
    fn sub_assign(&mut self, rhs: &Self);
    fn is_positive(&self) -> bool;
    fn negated(&self) -> Self;
    /// `self < threshold` for a finite, non-negative float threshold, decided
    /// by comparing against the integer `ceil(threshold) - 1`.
    fn below(&self, threshold: f64) -> bool;

    /// Sum of `coeffs[t]` over `t` with `masks[t] & word == masks[t]`.
    #[inline]
    fn masked_sum(masks: &[u64], coeffs: &[Self], word: u64) -> Self {
        let mut d = Self::zero();
        for (m, c) in masks.iter().zip(coeffs) {
            if word & m == *m {
                d.add_assign(c);
            }
        }
        d
    }
}

impl Energy for i64 {
    #[inline]
    fn zero() -> Self {
        0
    }
    fn from_big(v: &BigInt) -> Self {
        v.to_i64().expect("energy width chosen too small")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    #[inline]
    fn add_assign(&mut self, rhs: &Self) {
        *self += *rhs;
    }
    #[inline]
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= *rhs;
    }
    #[inline]
    fn is_positive(&self) -> bool {
        *self > 0
    }
    #[inline]
    fn negated(&self) -> Self {
        -*self
    }
    #[inline]
    fn below(&self, threshold: f64) -> bool {
        let c = threshold.ceil();
        if c >= 9.2e18 {
            return true;
        }
        *self < c as i64
    }

    #[inline]
    fn masked_sum(masks: &[u64], coeffs: &[i64], word: u64) -> i64 {
        // Branch-free so the loop vectorizes. Wrapping is exact here: the
        // width was chosen so that no partial sum can overflow.
        masks
            .iter()
            .zip(coeffs)
            .fold(0i64, |acc, (m, c)| acc.wrapping_add(c & -((word & m == *m) as i64)))
    }
}

impl Energy for i128 {
    #[inline]
    fn zero() -> Self {
        0
    }
    fn from_big(v: &BigInt) -> Self {
        v.to_i128().expect("energy width chosen too small")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    #[inline]
    fn add_assign(&mut self, rhs: &Self) {
        *self += *rhs;
    }
    #[inline]
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= *rhs;
    }
    #[inline]
    fn is_positive(&self) -> bool {
        *self > 0
    }
    #[inline]
    fn negated(&self) -> Self {
        -*self
    }
    #[inline]
    fn below(&self, threshold: f64) -> bool {
        let c = threshold.ceil();
        if c >= 1.7e38 {
            return true;
        }
        *self < c as i128
    }
}

impl Energy for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_big(v: &BigInt) -> Self {
        v.clone()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn is_positive(&self) -> bool {
        self.sign() == num_bigint::Sign::Plus
    }
    fn negated(&self) -> Self {
        -self
    }
    fn below(&self, threshold: f64) -> bool {
        match BigInt::from_f64(threshold.ceil()) {
            Some(c) => *self < c,
            None => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Width {
    I64,
    I128,
    Big,
}

impl Width {
    /// Any partial sum or single-flip delta is bounded by twice
    /// `|offset| + sum |coeff|`; leave two more bits of headroom.
    pub(crate) fn for_poly(poly: &BinaryPolynomial) -> Width {
        let bits = poly.abs_bound().bits();
        if bits + 3 < 63 {
            Width::I64
        } else if bits + 3 < 127 {
            Width::I128
        } else {
            Width::Big
        }
    }
}

/// Runs a generic kernel at the width a polynomial needs.
macro_rules! dispatch_width {
    ($poly:expr, $f:ident ( $($arg:expr),* $(,)? )) => {
        match $crate::solvers::energy::Width::for_poly($poly) {
            $crate::solvers::energy::Width::I64 => $f::<i64>($($arg),*),
            $crate::solvers::energy::Width::I128 => $f::<i128>($($arg),*),
            $crate::solvers::energy::Width::Big => $f::<num_bigint::BigInt>($($arg),*),
        }
    };
}
pub(crate) use dispatch_width;
