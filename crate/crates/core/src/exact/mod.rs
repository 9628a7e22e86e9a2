//! Exact scalars, the coefficient ring `Q[w]` (with `w` standing for `i*pi`),
//! combinatorial helpers, and fixed-point balls for numeric evaluation.

mod ball;
mod coeffw;
mod complex;

pub use ball::{ComplexBall, Precision, RealBall};
pub(crate) use ball::{ln_rational, principal_arg};
pub use coeffw::{coeffw_eval, CoeffW};
pub use complex::ComplexRational;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar, always stored in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Arbitrary-precision integer.
pub type Integer = BigInt;

/// Shorthand for the rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for an integral rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Binomial coefficient `C(n, k)`; zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> Integer {
    if k < 0 || k as u64 > n {
        return Integer::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = Integer::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `sum_{k=a}^{b} 1/k^p`. Empty ranges give zero; a range containing `k = 0` is a pole.
pub fn power_sum(p: u32, a: i64, b: i64) -> Result<Rational> {
    if a > b {
        return Ok(Rational::zero());
    }
    if a <= 0 && b >= 0 {
        return Err(Error::Pole(format!("power_sum range [{a}, {b}] contains 0")));
    }
    let mut acc = Rational::zero();
    for k in a..=b {
        acc += Rational::new(BigInt::one(), BigInt::from(k).pow(p));
    }
    Ok(acc)
}

/// Integer power of a rational with a possibly negative exponent.
pub fn rat_powi(q: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(q.clone(), e as usize)
    } else {
        num_traits::pow(q.recip(), (-e) as usize)
    }
}

/// Returns `Some(n)` when `q` is an integer.
pub fn as_integer(q: &Rational) -> Option<BigInt> {
    q.is_integer().then(|| q.to_integer())
}
