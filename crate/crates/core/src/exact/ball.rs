//! Fixed-point balls with a tracked worst-case rounding radius.
//!
//! A [`RealBall`] at precision `p` stores an integer midpoint `m` and an integer
//! radius `r`, both in units of `2^-p`, and encloses `[(m - r) 2^-p, (m + r) 2^-p]`.
//! Every operation rounds its midpoint to nearest and widens the radius so the
//! enclosure stays valid.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer as _;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use super::Rational;
use crate::error::{Error, Result};

/// Guard bits used when computing transcendental constants.
const GUARD_BITS: u32 = 32;

/// Binary working precision for numeric evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::InvalidArgument(format!(
                "precision must be at least {} bits, got {bits}",
                Self::MIN_BITS
            )));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(192)
    }
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// Round `x / 2^s` to nearest.
fn round_shift(x: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    (x + (BigInt::one() << (s as usize - 1))) >> s as usize
}

/// `ceil(x / 2^s)` for a nonnegative `x`.
fn ceil_shift(x: &BigUint, s: u32) -> BigUint {
    if s == 0 {
        return x.clone();
    }
    (x + ((BigUint::one() << s as usize) - 1u32)) >> s as usize
}

/// Round `n / d` to nearest for `d > 0`.
fn div_round(n: &BigInt, d: &BigInt) -> (BigInt, bool) {
    let (q, r) = n.div_mod_floor(d);
    let exact = r.is_zero();
    if (&r << 1usize) >= *d {
        (q + 1, exact)
    } else {
        (q, exact)
    }
}

fn scale_f64(x: f64, exp: i32) -> f64 {
    // powi underflows/overflows past about 2^1000, so split large exponents.
    let mut out = x;
    let mut left = exp;
    while left != 0 {
        let step = left.clamp(-1000, 1000);
        out *= 2f64.powi(step);
        left -= step;
    }
    out
}

/// Upper bound on `n * 2^-prec` as an `f64`.
fn ulps_to_f64_up(n: &BigUint, prec: u32) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let v = n.to_f64().unwrap_or(f64::INFINITY);
    scale_f64(v, -(prec as i32)) * (1.0 + 1e-15)
}

/// Smallest ulp count `n` with `n * 2^-prec >= x`, for `x >= 0`.
fn f64_to_ulps_up(x: f64, prec: u32) -> BigUint {
    if x <= 0.0 {
        return BigUint::zero();
    }
    let scaled = scale_f64(x * (1.0 + 1e-15), prec as i32).ceil();
    BigUint::from_f64(scaled).unwrap_or_else(|| BigUint::one() << (prec as usize + 1100)) + 1u32
}

/// A real interval `[mid - rad, mid + rad]` in fixed point at `prec` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealBall {
    mid: BigInt,
    rad: BigUint,
    prec: u32,
}

impl RealBall {
    pub fn zero(prec: Precision) -> Self {
        Self::raw_zero(prec.bits())
    }

    fn raw_zero(prec: u32) -> Self {
        RealBall { mid: BigInt::zero(), rad: BigUint::zero(), prec }
    }

    pub fn from_integer(n: &BigInt, prec: Precision) -> Self {
        Self::raw_integer(n, prec.bits())
    }

    fn raw_integer(n: &BigInt, prec: u32) -> Self {
        RealBall { mid: n << prec as usize, rad: BigUint::zero(), prec }
    }

    pub fn from_rational(q: &Rational, prec: Precision) -> Self {
        Self::raw_rational(q, prec.bits())
    }

    fn raw_rational(q: &Rational, prec: u32) -> Self {
        let (mid, exact) = div_round(&(q.numer() << prec as usize), q.denom());
        let rad = if exact { BigUint::zero() } else { BigUint::one() };
        RealBall { mid, rad, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mid_raw(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad_raw(&self) -> &BigUint {
        &self.rad
    }

    /// Midpoint as an exact rational.
    pub fn mid_rational(&self) -> Rational {
        Rational::new(self.mid.clone(), pow2(self.prec))
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid_rational().to_f64().unwrap_or(f64::NAN)
    }

    /// Upper bound on the radius.
    pub fn rad_f64(&self) -> f64 {
        ulps_to_f64_up(&self.rad, self.prec)
    }

    /// Upper bound on `|x|` for every `x` in the ball.
    pub fn upper_abs_f64(&self) -> f64 {
        ulps_to_f64_up(&(self.mid.magnitude() + &self.rad), self.prec)
    }

    /// Widen by an absolute amount given as an upper bound in `f64`.
    pub fn add_error(&mut self, bound: f64) {
        self.rad += f64_to_ulps_up(bound, self.prec);
    }

    fn add_error_ulps(&mut self, ulps: &BigUint) {
        self.rad += ulps;
    }

    fn check_prec(&self, other: &Self) {
        assert_eq!(self.prec, other.prec, "mixed-precision ball arithmetic");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_prec(other);
        RealBall { mid: &self.mid + &other.mid, rad: &self.rad + &other.rad, prec: self.prec }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_prec(other);
        RealBall { mid: &self.mid - &other.mid, rad: &self.rad + &other.rad, prec: self.prec }
    }

    pub fn neg(&self) -> Self {
        RealBall { mid: -&self.mid, rad: self.rad.clone(), prec: self.prec }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_prec(other);
        let prod = &self.mid * &other.mid;
        let mid = round_shift(&prod, self.prec);
        let low_bits_zero = prod.is_zero() || prod.trailing_zeros().unwrap_or(0) >= self.prec as u64;
        let cross = self.mid.magnitude() * &other.rad + other.mid.magnitude() * &self.rad + &self.rad * &other.rad;
        let mut rad = ceil_shift(&cross, self.prec);
        if !low_bits_zero {
            rad += 1u32;
        }
        RealBall { mid, rad, prec: self.prec }
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        RealBall { mid: &self.mid * n, rad: &self.rad * n.magnitude(), prec: self.prec }
    }

    /// Divide by a nonzero integer.
    pub fn div_int(&self, d: &BigInt) -> Self {
        assert!(!d.is_zero(), "division of a ball by zero");
        let (mid, exact) = if d.is_positive() { div_round(&self.mid, d) } else { div_round(&-&self.mid, &-d) };
        let dm = d.magnitude();
        let mut rad = (&self.rad + (dm - 1u32)) / dm;
        if !exact {
            rad += 1u32;
        }
        RealBall { mid, rad, prec: self.prec }
    }

    pub fn mul_rational(&self, q: &Rational) -> Self {
        self.mul_int(q.numer()).div_int(q.denom())
    }

    /// Re-express at a lower precision.
    fn round_to(&self, prec: u32) -> Self {
        assert!(prec <= self.prec);
        let s = self.prec - prec;
        let mid = round_shift(&self.mid, s);
        let mut rad = ceil_shift(&self.rad, s);
        if s > 0 {
            rad += 1u32;
        }
        RealBall { mid, rad, prec }
    }

    /// Decimal rendering of the midpoint with `digits` fractional digits, trailing zeros trimmed.
    pub fn mid_decimal(&self, digits: u32) -> String {
        let scaled = &self.mid * BigInt::from(10u32).pow(digits);
        let (n, _) = div_round(&scaled, &pow2(self.prec));
        format_scaled_decimal(&n, digits)
    }

    pub fn pi(prec: Precision) -> Self {
        pi_raw(prec.bits())
    }
}

fn format_scaled_decimal(n: &BigInt, digits: u32) -> String {
    let neg = n.sign() == Sign::Minus;
    let s = n.magnitude().to_string();
    let d = digits as usize;
    let (int_part, frac_part) = if s.len() > d {
        (s[..s.len() - d].to_string(), s[s.len() - d..].to_string())
    } else {
        ("0".to_string(), format!("{s:0>d$}"))
    };
    let frac = frac_part.trim_end_matches('0');
    let body = if frac.is_empty() { int_part } else { format!("{int_part}.{frac}") };
    if neg && body != "0" {
        format!("-{body}")
    } else {
        body
    }
}

/// `atan(a/b)` for `|a| <= b`, via Euler's series
/// `atan x = sum_n 4^n (n!)^2 / (2n+1)! * x^(2n+1) / (1+x^2)^(n+1)`.
fn atan_frac_raw(a: &BigInt, b: &BigInt, wp: u32) -> RealBall {
    assert!(b.is_positive() && a.magnitude() <= b.magnitude());
    if a.is_zero() {
        return RealBall::raw_zero(wp);
    }
    let a2 = a * a;
    let s = &a2 + b * b;
    let mut term = RealBall::raw_rational(&Rational::new(a * b, s.clone()), wp);
    let mut sum = term.clone();
    let mut n: u64 = 0;
    loop {
        term = term.mul_int(&(BigInt::from(2 * n + 2) * &a2)).div_int(&(BigInt::from(2 * n + 3) * &s));
        n += 1;
        sum = sum.add(&term);
        if term.mid.magnitude() <= &term.rad {
            // ratio of consecutive terms is at most 1/2, so the rest is bounded by the last term
            let tail = term.mid.magnitude() + &term.rad;
            sum.add_error_ulps(&tail);
            return sum;
        }
    }
}

/// `atanh(a/b)` for `|a/b| <= 1/3`.
fn atanh_frac_raw(a: &BigInt, b: &BigInt, wp: u32) -> RealBall {
    assert!(b.is_positive() && a.magnitude() * 3u32 <= *b.magnitude());
    let a2 = a * a;
    let b2 = b * b;
    let mut power = RealBall::raw_rational(&Rational::new(a.clone(), b.clone()), wp);
    let mut sum = power.clone();
    let mut n: u64 = 0;
    loop {
        power = power.mul_int(&a2).div_int(&b2);
        n += 1;
        sum = sum.add(&power.div_int(&BigInt::from(2 * n + 1)));
        if power.mid.magnitude() <= &power.rad {
            let tail = power.mid.magnitude() + &power.rad;
            sum.add_error_ulps(&tail);
            return sum;
        }
    }
}

fn pi_raw(prec: u32) -> RealBall {
    let wp = prec + GUARD_BITS;
    let one = BigInt::one();
    let x5 = atan_frac_raw(&one, &BigInt::from(5), wp);
    let x239 = atan_frac_raw(&one, &BigInt::from(239), wp);
    x5.mul_int(&BigInt::from(16)).sub(&x239.mul_int(&BigInt::from(4))).round_to(prec)
}

fn ln2_raw(wp: u32) -> RealBall {
    atanh_frac_raw(&BigInt::one(), &BigInt::from(3), wp).mul_int(&BigInt::from(2))
}

/// Natural logarithm of a positive rational.
pub(crate) fn ln_rational(q: &Rational, prec: Precision) -> Result<RealBall> {
    if !q.is_positive() {
        return Err(Error::InvalidArgument(format!("logarithm of nonpositive rational {q}")));
    }
    let wp = prec.bits() + GUARD_BITS;
    let mut k = q.numer().bits() as i64 - q.denom().bits() as i64;
    let mut r = q / super::rat_powi(&super::int(2), k);
    let four_thirds = super::rat(4, 3);
    let two_thirds = super::rat(2, 3);
    while r > four_thirds {
        r /= super::int(2);
        k += 1;
    }
    while r < two_thirds {
        r *= super::int(2);
        k -= 1;
    }
    let s = (&r - super::int(1)) / (&r + super::int(1));
    let main = atanh_frac_raw(s.numer(), s.denom(), wp).mul_int(&BigInt::from(2));
    let total = main.add(&ln2_raw(wp).mul_int(&BigInt::from(k)));
    Ok(total.round_to(prec.bits()))
}

/// Principal argument of `x + iy` in `(-pi, pi]`, for `(x, y) != (0, 0)`.
pub(crate) fn principal_arg(x: &Rational, y: &Rational, prec: Precision) -> Result<RealBall> {
    if x.is_zero() && y.is_zero() {
        return Err(Error::InvalidArgument("argument of zero".into()));
    }
    let p = prec.bits();
    let wp = p + GUARD_BITS;
    let pi = pi_raw(wp);
    let half_pi = pi.div_int(&BigInt::from(2));
    let atan_q = |q: Rational| -> RealBall {
        let q = q.reduced();
        atan_frac_raw(q.numer(), q.denom(), wp)
    };
    let out = if y.abs() <= x.abs() {
        let base = atan_q(y / x);
        if x.is_positive() {
            base
        } else if y.is_negative() {
            base.sub(&pi)
        } else {
            base.add(&pi)
        }
    } else {
        // |y| > |x|: arg = sign(y) pi/2 - atan(x/y)
        let base = atan_q(x / y);
        if y.is_positive() {
            half_pi.sub(&base)
        } else {
            half_pi.neg().sub(&base)
        }
    };
    Ok(out.round_to(p))
}

/// A complex ball stored as a pair of real balls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexBall {
    pub re: RealBall,
    pub im: RealBall,
}

impl ComplexBall {
    pub fn zero(prec: Precision) -> Self {
        ComplexBall { re: RealBall::zero(prec), im: RealBall::zero(prec) }
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_real(RealBall::from_integer(&BigInt::one(), prec))
    }

    pub fn from_real(re: RealBall) -> Self {
        let im = RealBall::raw_zero(re.prec);
        ComplexBall { re, im }
    }

    pub fn from_rationals(re: &Rational, im: &Rational, prec: Precision) -> Self {
        ComplexBall { re: RealBall::from_rational(re, prec), im: RealBall::from_rational(im, prec) }
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexBall { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ComplexBall { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> Self {
        ComplexBall { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        ComplexBall { re, im }
    }

    pub fn mul_real(&self, r: &RealBall) -> Self {
        ComplexBall { re: self.re.mul(r), im: self.im.mul(r) }
    }

    pub fn mul_rational(&self, q: &Rational) -> Self {
        ComplexBall { re: self.re.mul_rational(q), im: self.im.mul_rational(q) }
    }

    /// Multiply by `i`.
    pub fn mul_i(&self) -> Self {
        ComplexBall { re: self.im.neg(), im: self.re.clone() }
    }

    /// Widen so the ball covers any point within `bound` (in modulus) of it.
    pub fn add_error(&mut self, bound: f64) {
        self.re.add_error(bound);
        self.im.add_error(bound);
    }

    /// Midpoint with zero radius.
    pub fn midpoint(&self) -> Self {
        let strip = |r: &RealBall| RealBall { mid: r.mid.clone(), rad: BigUint::zero(), prec: r.prec };
        ComplexBall { re: strip(&self.re), im: strip(&self.im) }
    }

    /// Upper bound on the modulus error of the midpoint.
    pub fn rad_f64(&self) -> f64 {
        self.re.rad_f64() + self.im.rad_f64()
    }

    pub fn mid_abs_f64(&self) -> f64 {
        self.re.mid_f64().hypot(self.im.mid_f64())
    }

    /// Upper bound on `|x|` over the ball.
    pub fn upper_abs_f64(&self) -> f64 {
        self.re.upper_abs_f64().hypot(self.im.upper_abs_f64()) * (1.0 + 1e-15)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec
    }

    /// `"a+bi"` rendering of the midpoint.
    pub fn mid_decimal(&self, digits: u32) -> String {
        let re = self.re.mid_decimal(digits);
        let im = self.im.mid_decimal(digits);
        if im == "0" {
            re
        } else if im.starts_with('-') {
            format!("{re}{im}i")
        } else {
            format!("{re}+{im}i")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    const PI_50: &str = "3.14159265358979323846264338327950288419716939937510";

    fn prec(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    #[test]
    fn precision_floor() {
        assert!(Precision::new(63).is_err());
        assert_eq!(Precision::new(64).unwrap().bits(), 64);
    }

    #[test]
    fn pi_digits() {
        let p = RealBall::pi(prec(256));
        let s = p.mid_decimal(50);
        // the last digit may round
        assert_eq!(&s[..50], &PI_50[..50]);
        assert!(p.rad_f64() < 1e-70);
    }

    #[test]
    fn ln_and_arg_values() {
        let ln2 = ln_rational(&int(2), prec(128)).unwrap();
        assert!((ln2.mid_f64() - std::f64::consts::LN_2).abs() < 1e-15);
        let ln_tenth = ln_rational(&rat(1, 10), prec(128)).unwrap();
        assert!((ln_tenth.mid_f64() + 10f64.ln()).abs() < 1e-15);
        let a = principal_arg(&int(-1), &int(0), prec(128)).unwrap();
        assert!((a.mid_f64() - std::f64::consts::PI).abs() < 1e-15);
        let a = principal_arg(&rat(3, 2), &rat(1, 2), prec(128)).unwrap();
        assert!((a.mid_f64() - (1f64 / 3.0).atan()).abs() < 1e-15);
        let a = principal_arg(&int(-1), &int(-3), prec(128)).unwrap();
        assert!((a.mid_f64() - (-3f64).atan2(-1.0)).abs() < 1e-15);
        assert!(principal_arg(&int(0), &int(0), prec(128)).is_err());
    }

    #[test]
    fn balls_enclose_exact_rational_products() {
        let p = prec(96);
        let a = rat(1, 3);
        let b = rat(-22, 7);
        let ab = RealBall::from_rational(&a, p).mul(&RealBall::from_rational(&b, p));
        let err = (ab.mid_rational() - &a * &b).abs();
        assert!(err <= Rational::new(BigInt::from(ab.rad_raw().clone()), pow2(96)));
    }

    #[test]
    fn decimal_rendering() {
        let p = prec(64);
        assert_eq!(RealBall::from_rational(&rat(5, 2), p).mid_decimal(10), "2.5");
        assert_eq!(RealBall::from_rational(&rat(-1, 4), p).mid_decimal(10), "-0.25");
        assert_eq!(RealBall::from_rational(&int(73), p).mid_decimal(10), "73");
    }
}
