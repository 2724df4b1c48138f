//! Scalar abstraction for the exact solvers.
//!
//! Event-driven solvers only need field arithmetic and ordering, so they run on
//! `f64`, `f32` and arbitrary-precision rationals alike. Numerical solvers are
//! written for `f64` directly.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Field:
    Num + Signed + PartialOrd + Clone + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance under which two plateau values are treated as equal.
    fn merge_tol() -> Self;

    fn near(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::merge_tol()
    }

    fn from_usize(k: usize) -> Self {
        <Self as FromPrimitive>::from_usize(k).expect("usize conversion")
    }

    /// Lossy conversion used for floating diagnostics (perimeters, norms).
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Field for f64 {
    fn merge_tol() -> Self {
        1e-12
    }
}

impl Field for f32 {
    fn merge_tol() -> Self {
        1e-5
    }
}

impl Field for BigRational {
    fn merge_tol() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
}

/// Integer power by repeated multiplication; exact for rationals.
pub fn powi<T: Field>(x: &T, k: u32) -> T {
    num_traits::pow(x.clone(), k as usize)
}

/// Exact rational from a decimal string like `"0.375"` or `"3/8"`.
pub fn rational(s: &str) -> Option<BigRational> {
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(a, b));
    }
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, den);
    Some(if neg { -r } else { r })
}
