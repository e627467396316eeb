//! Scalar abstraction shared by the exact and floating-point code paths.
//!
//! Probability polynomials are evaluated either exactly (over
//! [`BigRational`]) or in floating point (`f32`/`f64`, with compensated
//! summation). Everything that only needs field arithmetic is written
//! against [`Scalar`].

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

pub trait Scalar: Clone + Debug + PartialOrd + Num {
    /// `num / den` in this scalar type.
    fn from_ratio(num: u64, den: u64) -> Self;

    fn from_biguint(n: &BigUint) -> Self;

    /// Lossy conversion, used only for reporting.
    fn to_f64_lossy(&self) -> f64;

    /// Sum of `terms`. Floating types override this with Neumaier summation.
    fn sum_all<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms.into_iter().fold(Self::zero(), |acc, t| acc + t)
    }

    /// `self^k` by repeated squaring.
    fn powu(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            k >>= 1;
        }
        acc
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_ratio(num: u64, den: u64) -> Self {
                (num as f64 / den as f64) as $t
            }

            fn from_biguint(n: &BigUint) -> Self {
                n.to_f64().unwrap_or(f64::INFINITY) as $t
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }

            fn sum_all<I: IntoIterator<Item = Self>>(terms: I) -> Self {
                neumaier_sum(terms)
            }

            fn powu(&self, k: u64) -> Self {
                self.powf(k as $t)
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_biguint(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Neumaier's improved Kahan summation.
pub fn neumaier_sum<T: num_traits::Float, I: IntoIterator<Item = T>>(terms: I) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp = comp + ((sum - t) + x);
        } else {
            comp = comp + ((x - t) + sum);
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let terms = [1.0f64, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(terms), 2.0);
    }

    #[test]
    fn rational_powers_are_exact() {
        let half = BigRational::from_ratio(1, 2);
        assert_eq!(half.powu(3), BigRational::from_ratio(1, 8));
        assert_eq!(half.powu(0), BigRational::from_ratio(1, 1));
    }
}
