//! Field abstraction for the second-moment engines.
//!
//! The transfer and Markov computations only need field operations and
//! exact powers of two, so they run unchanged over `f64`, `f32` and
//! arbitrary-precision rationals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_u64(v: u64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Lossy conversion; exact types take the nearest rational to `v`.
    fn from_f64(v: f64) -> Self;

    /// `2^e`, exact for rational types.
    fn pow2(e: i64) -> Self;

    fn powi(&self, e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_u64(v: u64) -> Self {
                v as $t
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            fn pow2(e: i64) -> Self {
                (2.0 as $t).powi(e as i32)
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

impl Scalar for BigRational {
    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(BigRational::zero)
    }

    fn pow2(e: i64) -> Self {
        let mag = BigInt::one() << e.unsigned_abs();
        if e >= 0 {
            BigRational::from_integer(mag)
        } else {
            BigRational::new(BigInt::one(), mag)
        }
    }
}
