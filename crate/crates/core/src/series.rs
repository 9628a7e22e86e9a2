//! Truncated Laurent series in `z` with coefficients polynomial in `log z`.
//!
//! A [`LogSeries`] stores `sum_{m, e} c(m, e) (log z)^m z^e` densely over a
//! window `e_min..=e_max`. Coefficients above `e_max` are exactly zero. Below
//! `e_min` they are zero only when the series is not `truncated`; otherwise
//! they are unknown, and every operation keeps the window on which the result
//! is provably exact.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{
    ln_rational, principal_arg, CoeffW, ComplexBall, ComplexRational, Precision, Rational, RealBall,
};

#[derive(Debug, Clone)]
pub struct LogSeries {
    e_min: i64,
    e_max: i64,
    truncated: bool,
    /// `slices[m][e - e_min]`
    slices: Vec<Vec<CoeffW>>,
}

impl LogSeries {
    /// An all-zero series over `e_min..=e_max` with log powers `0..=max_log_power`.
    pub fn with_window(e_min: i64, e_max: i64, truncated: bool, max_log_power: usize) -> Self {
        assert!(e_min <= e_max, "empty window [{e_min}, {e_max}]");
        let width = (e_max - e_min + 1) as usize;
        LogSeries { e_min, e_max, truncated, slices: vec![vec![CoeffW::zero(); width]; max_log_power + 1] }
    }

    pub fn zero() -> Self {
        Self::with_window(0, 0, false, 0)
    }

    /// `c (log z)^m z^e`, exact everywhere.
    pub fn monomial(c: CoeffW, m: usize, e: i64) -> Self {
        let mut s = Self::with_window(e, e, false, m);
        s.set(m, e, c);
        s
    }

    /// A log-free polynomial or Laurent polynomial `sum_e c_e z^e` with `c_e` at index `e - e_min`.
    pub fn from_rationals(e_min: i64, coeffs: Vec<Rational>, truncated: bool) -> Self {
        assert!(!coeffs.is_empty());
        let e_max = e_min + coeffs.len() as i64 - 1;
        LogSeries { e_min, e_max, truncated, slices: vec![coeffs.into_iter().map(CoeffW::constant).collect()] }
    }

    pub fn e_min(&self) -> i64 {
        self.e_min
    }

    pub fn e_max(&self) -> i64 {
        self.e_max
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Lowest exponent known exactly, or `None` when the series is exact everywhere.
    pub fn exact_from(&self) -> Option<i64> {
        self.truncated.then_some(self.e_min)
    }

    /// Highest log power with a nonzero coefficient (0 for the zero series).
    pub fn max_log_power(&self) -> usize {
        self.slices
            .iter()
            .rposition(|slice| slice.iter().any(|c| !c.is_zero()))
            .unwrap_or(0)
    }

    /// Highest `w`-degree across all coefficients.
    pub fn max_w_degree(&self) -> usize {
        self.terms().filter_map(|(_, _, c)| c.degree()).max().unwrap_or(0)
    }

    /// Coefficient of `(log z)^m z^e`; zero outside the stored window.
    pub fn coeff(&self, m: usize, e: i64) -> CoeffW {
        if e < self.e_min || e > self.e_max || m >= self.slices.len() {
            return CoeffW::zero();
        }
        self.slices[m][(e - self.e_min) as usize].clone()
    }

    fn coeff_ref(&self, m: usize, e: i64) -> Option<&CoeffW> {
        if e < self.e_min || e > self.e_max || m >= self.slices.len() {
            return None;
        }
        Some(&self.slices[m][(e - self.e_min) as usize])
    }

    pub fn set(&mut self, m: usize, e: i64, c: CoeffW) {
        assert!(e >= self.e_min && e <= self.e_max, "exponent {e} outside window");
        if m >= self.slices.len() {
            let width = self.slices[0].len();
            self.slices.resize(m + 1, vec![CoeffW::zero(); width]);
        }
        self.slices[m][(e - self.e_min) as usize] = c;
    }

    /// Nonzero stored terms as `(m, e, coeff)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, i64, &CoeffW)> + '_ {
        self.slices.iter().enumerate().flat_map(move |(m, slice)| {
            slice
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(i, c)| (m, self.e_min + i as i64, c))
        })
    }

    /// The log-power-`m` slice as a log-free series on the same window.
    pub fn log_slice(&self, m: usize) -> LogSeries {
        let mut out = Self::with_window(self.e_min, self.e_max, self.truncated, 0);
        if let Some(slice) = self.slices.get(m) {
            out.slices[0] = slice.clone();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms().next().is_none()
    }

    fn map_coeffs(&self, f: impl Fn(&CoeffW) -> CoeffW) -> LogSeries {
        LogSeries {
            e_min: self.e_min,
            e_max: self.e_max,
            truncated: self.truncated,
            slices: self.slices.iter().map(|s| s.iter().map(&f).collect()).collect(),
        }
    }

    pub fn neg(&self) -> LogSeries {
        self.map_coeffs(|c| -c)
    }

    pub fn scale_rational(&self, q: &Rational) -> LogSeries {
        self.map_coeffs(|c| c.scale(q))
    }

    pub fn sub(&self, other: &LogSeries) -> LogSeries {
        ls_add(self, &other.neg())
    }
}

/// Sum of two series on the tightest window exact for both.
pub fn ls_add(a: &LogSeries, b: &LogSeries) -> LogSeries {
    let truncated = a.truncated || b.truncated;
    let e_min = match (a.exact_from(), b.exact_from()) {
        (Some(x), Some(y)) => x.max(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => a.e_min.min(b.e_min),
    };
    let e_max = a.e_max.max(b.e_max);
    let mp = a.slices.len().max(b.slices.len()) - 1;
    let mut out = LogSeries::with_window(e_min, e_max, truncated, mp);
    for src in [a, b] {
        for (m, slice) in src.slices.iter().enumerate() {
            for (i, c) in slice.iter().enumerate() {
                let e = src.e_min + i as i64;
                if e >= e_min && !c.is_zero() {
                    out.slices[m][(e - e_min) as usize] += c;
                }
            }
        }
    }
    out
}

/// Multiply every coefficient by `c`.
pub fn ls_scale(c: &CoeffW, a: &LogSeries) -> LogSeries {
    a.map_coeffs(|x| x * c)
}

/// Multiply by `log z`.
pub fn ls_mul_log(a: &LogSeries) -> LogSeries {
    let width = a.slices[0].len();
    let mut slices = Vec::with_capacity(a.slices.len() + 1);
    slices.push(vec![CoeffW::zero(); width]);
    slices.extend(a.slices.iter().cloned());
    LogSeries { e_min: a.e_min, e_max: a.e_max, truncated: a.truncated, slices }
}

/// Multiply by `z`.
pub fn ls_mul_z(a: &LogSeries) -> LogSeries {
    LogSeries { e_min: a.e_min + 1, e_max: a.e_max + 1, truncated: a.truncated, slices: a.slices.clone() }
}

/// The Euler operator `z d/dz`:
/// `delta((log z)^m z^e) = e (log z)^m z^e + m (log z)^(m-1) z^e`.
pub fn ls_delta(a: &LogSeries) -> LogSeries {
    let mut out = LogSeries::with_window(a.e_min, a.e_max, a.truncated, a.slices.len() - 1);
    for m in 0..a.slices.len() {
        for i in 0..a.slices[m].len() {
            let e = a.e_min + i as i64;
            let mut c = a.slices[m][i].scale(&Rational::from_integer(e.into()));
            if let Some(next) = a.slices.get(m + 1) {
                c += &next[i].scale(&Rational::from_integer(((m + 1) as i64).into()));
            }
            out.slices[m][i] = c;
        }
    }
    out
}

/// Semantic equality: same exactness and identical coefficients wherever either is stored.
impl PartialEq for LogSeries {
    fn eq(&self, other: &Self) -> bool {
        if self.exact_from() != other.exact_from() {
            return false;
        }
        let lo = self.e_min.min(other.e_min);
        let hi = self.e_max.max(other.e_max);
        let mp = self.slices.len().max(other.slices.len());
        let zero = CoeffW::zero();
        (0..mp).all(|m| {
            (lo..=hi).all(|e| {
                self.coeff_ref(m, e).unwrap_or(&zero) == other.coeff_ref(m, e).unwrap_or(&zero)
            })
        })
    }
}

impl fmt::Display for LogSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{c}]")?;
            match m {
                0 => {}
                1 => write!(f, " log(z)")?,
                _ => write!(f, " log(z)^{m}")?,
            }
            if e != 0 {
                write!(f, " z^{e}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if self.truncated {
            write!(f, " + O(z^{})", self.e_min - 1)?;
        }
        Ok(())
    }
}

/// A point `z` with `|z| > 1` and a working precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPoint {
    z: ComplexRational,
    prec: Precision,
}

impl EvalPoint {
    pub fn new(z: ComplexRational, prec: Precision) -> Result<Self> {
        if z.norm_sqr() <= Rational::one() {
            return Err(Error::InvalidArgument(format!("evaluation point {z} must satisfy |z| > 1")));
        }
        Ok(EvalPoint { z, prec })
    }

    pub fn z(&self) -> &ComplexRational {
        &self.z
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    /// Lower bound on `|z|`.
    pub fn abs_lower(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.z.norm_sqr().to_f64().unwrap_or(f64::INFINITY).sqrt() * (1.0 - 1e-15)
    }
}

/// A proven upper bound on the modulus of a discarded tail.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct TailBound(f64);

impl TailBound {
    pub fn new(bound: f64) -> Result<Self> {
        if bound.is_nan() || bound < 0.0 {
            return Err(Error::InvalidArgument(format!("tail bound must be nonnegative, got {bound}")));
        }
        Ok(TailBound(bound))
    }

    pub fn zero() -> Self {
        TailBound(0.0)
    }

    pub fn bound(self) -> f64 {
        self.0
    }
}

/// `log z = ln|z| + i arg(z)` on the branch `-3pi/2 < arg(z) <= pi/2`.
///
/// The argument is the principal one, shifted down by `2 pi` in the open
/// second quadrant and on the negative real axis.
pub fn log_branch(z: &ComplexRational, prec: Precision) -> Result<ComplexBall> {
    if z.is_zero() {
        return Err(Error::InvalidArgument("log of zero".into()));
    }
    let ln_abs = ln_rational(&z.norm_sqr(), prec)?.div_int(&2.into());
    let mut arg = principal_arg(&z.re, &z.im, prec)?;
    if z.re.is_negative() && !z.im.is_negative() {
        arg = arg.sub(&RealBall::pi(prec).mul_int(&2.into()));
    }
    Ok(ComplexBall { re: ln_abs, im: arg })
}

/// Evaluate the stored window at `pt` with `w := i pi`; the radius covers
/// rounding plus `tail`.
pub fn ls_eval(a: &LogSeries, pt: &EvalPoint, tail: TailBound) -> ComplexBall {
    let prec = pt.prec;
    let mut acc = ComplexBall::zero(prec);
    if !a.is_zero() {
        let mp = a.max_log_power();
        let wmax = a.max_w_degree();
        let log_z = log_branch(&pt.z, prec).expect("EvalPoint excludes z = 0");
        let w = ComplexBall::from_real(RealBall::pi(prec)).mul_i();
        let zinv = pt.z.inv().expect("EvalPoint excludes z = 0");
        // exact powers of z across the window, rounded once each
        let mut zpows = Vec::with_capacity((a.e_max - a.e_min + 1) as usize);
        let mut cur = if a.e_min >= 0 {
            pt.z.powi(a.e_min).expect("nonnegative power")
        } else {
            zinv.powi(-a.e_min).expect("nonnegative power")
        };
        for _ in a.e_min..=a.e_max {
            zpows.push(cur.to_ball(prec));
            cur = cur.mul(&pt.z);
        }
        let mut log_pow = ComplexBall::one(prec);
        for m in 0..=mp {
            let mut by_w = vec![ComplexBall::zero(prec); wmax + 1];
            for (i, c) in a.slices[m].iter().enumerate() {
                for (p, q) in c.coeffs().iter().enumerate() {
                    if !q.is_zero() {
                        by_w[p] = by_w[p].add(&zpows[i].mul_rational(q));
                    }
                }
            }
            let mut slice = ComplexBall::zero(prec);
            for part in by_w.iter().rev() {
                slice = slice.mul(&w).add(part);
            }
            acc = acc.add(&slice.mul(&log_pow));
            log_pow = log_pow.mul(&log_z);
        }
    }
    acc.add_error(tail.bound());
    acc
}

/// Exact value at `z` of an untruncated, log-free series with rational coefficients.
pub fn ls_eval_exact(a: &LogSeries, z: &ComplexRational) -> Result<ComplexRational> {
    if a.truncated {
        return Err(Error::InvalidArgument("exact evaluation needs an untruncated series".into()));
    }
    if a.max_log_power() > 0 || a.max_w_degree() > 0 {
        return Err(Error::InvalidArgument("exact evaluation needs a log-free rational series".into()));
    }
    let mut acc = ComplexRational::zero();
    for (_, e, c) in a.terms() {
        acc = acc.add(&z.powi(e)?.scale(&c.coeff(0)));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn mono(q: i64, m: usize, e: i64) -> LogSeries {
        LogSeries::monomial(CoeffW::constant(int(q)), m, e)
    }

    fn prec() -> Precision {
        Precision::new(128).unwrap()
    }

    fn pt(re: Rational, im: Rational) -> EvalPoint {
        EvalPoint::new(ComplexRational::new(re, im), prec()).unwrap()
    }

    #[test]
    fn add_examples() {
        assert!(ls_add(&mono(1, 0, -1), &mono(-1, 0, -1)).is_zero());
        let f = LogSeries::from_rationals(0, vec![int(1), int(4)], false);
        assert_eq!(ls_add(&f, &LogSeries::zero()), f);
        let a = LogSeries::with_window(-10, -2, true, 0);
        let b = LogSeries::with_window(-8, -3, true, 0);
        let s = ls_add(&a, &b);
        assert_eq!(s.e_min(), -8);
        assert!(s.truncated());
    }

    #[test]
    fn scale_examples() {
        let f = ls_add(&mono(3, 1, -2), &mono(5, 0, -4));
        assert!(ls_scale(&CoeffW::zero(), &f).is_zero());
        assert_eq!(ls_scale(&CoeffW::one(), &f), f);
        let g = ls_scale(&-&CoeffW::w(), &f);
        assert_eq!(g.coeff(1, -2), CoeffW::monomial(int(-3), 1));
    }

    #[test]
    fn mul_log_and_mul_z() {
        let a = mono(1, 0, -2);
        let la = ls_mul_log(&a);
        assert_eq!(la, mono(1, 1, -2));
        assert_eq!(la.max_log_power(), 1);
        assert!(ls_mul_log(&LogSeries::zero()).is_zero());
        assert_eq!(ls_mul_z(&mono(1, 0, -1)), mono(1, 0, 0));
        assert_eq!(ls_mul_z(&mono(1, 1, -3)), mono(1, 1, -2));
        let w = ls_mul_z(&LogSeries::with_window(-40, 2, true, 0));
        assert_eq!((w.e_min(), w.e_max()), (-39, 3));
    }

    #[test]
    fn delta_monomial_rule() {
        let d = ls_delta(&mono(1, 2, -3));
        assert_eq!(d, ls_add(&mono(-3, 2, -3), &mono(2, 1, -3)));
        assert!(ls_delta(&mono(1, 0, 0)).is_zero());
        assert_eq!(ls_delta(&mono(1, 0, 5)), mono(5, 0, 5));
    }

    #[test]
    fn log_branch_examples() {
        let l = log_branch(&ComplexRational::real(int(-2)), prec()).unwrap();
        assert!((l.re.mid_f64() - 2f64.ln()).abs() < 1e-15);
        assert!((l.im.mid_f64() + std::f64::consts::PI).abs() < 1e-15);
        let l = log_branch(&ComplexRational::new(int(0), int(1)), prec()).unwrap();
        assert!(l.re.mid_f64().abs() < 1e-30);
        assert!((l.im.mid_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let l = log_branch(&ComplexRational::new(int(0), int(-2)), prec()).unwrap();
        assert!((l.re.mid_f64() - 2f64.ln()).abs() < 1e-15);
        assert!((l.im.mid_f64() + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // open second quadrant lands below -pi
        let l = log_branch(&ComplexRational::new(int(-1), int(1)), prec()).unwrap();
        assert!((l.im.mid_f64() + 1.25 * std::f64::consts::PI).abs() < 1e-15);
        assert!(log_branch(&ComplexRational::zero(), prec()).is_err());
    }

    #[test]
    fn eval_point_requires_outside_unit_disk() {
        assert!(EvalPoint::new(ComplexRational::real(int(1)), prec()).is_err());
        assert!(EvalPoint::new(ComplexRational::new(rat(3, 5), rat(4, 5)), prec()).is_err());
        assert!(EvalPoint::new(ComplexRational::new(rat(3, 5), rat(5, 5)), prec()).is_ok());
    }

    #[test]
    fn eval_small_examples() {
        let v = ls_eval(&mono(1, 0, -1), &pt(int(2), int(0)), TailBound::zero());
        assert_eq!(v.re.mid_f64(), 0.5);
        let v = ls_eval(&mono(1, 1, 0), &pt(int(2), int(0)), TailBound::zero());
        assert!((v.re.mid_f64() - 2f64.ln()).abs() < 1e-15);
        assert!(v.rad_f64() < 1e-35);
        let v = ls_eval(&mono(1, 0, -1), &pt(int(2), int(0)), TailBound::new(1e-3).unwrap());
        assert!(v.re.rad_f64() >= 1e-3);
    }

    #[test]
    fn exact_eval_of_polynomial() {
        let f = LogSeries::from_rationals(0, vec![int(1), int(4)], false);
        assert_eq!(ls_eval_exact(&f, &ComplexRational::one()).unwrap(), ComplexRational::real(int(5)));
        assert!(ls_eval_exact(&LogSeries::with_window(-3, -1, true, 0), &ComplexRational::one()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn series(truncated: bool) -> impl Strategy<Value = LogSeries> {
            (-6i64..3, proptest::collection::vec(proptest::collection::vec((-9i64..9, 1i64..5, -3i64..3), 1..6), 1..4))
                .prop_map(move |(e_min, slices)| {
                    let width = slices.iter().map(Vec::len).max().unwrap();
                    let mut s = LogSeries::with_window(e_min, e_min + width as i64 - 1, truncated, slices.len() - 1);
                    for (m, slice) in slices.iter().enumerate() {
                        for (i, &(n, d, wn)) in slice.iter().enumerate() {
                            let c = CoeffW::new(vec![rat(n, d), rat(wn, d)]);
                            s.set(m, e_min + i as i64, c);
                        }
                    }
                    s
                })
        }

        fn any_series() -> impl Strategy<Value = LogSeries> {
            prop_oneof![series(false), series(true)]
        }

        /// `z d/dz` of each term computed in plain f64 complex arithmetic.
        fn termwise_delta_f64(a: &LogSeries, z: (f64, f64)) -> (f64, f64) {
            use num_traits::ToPrimitive;
            let (x, y) = z;
            let mut arg = y.atan2(x);
            if arg > std::f64::consts::FRAC_PI_2 {
                arg -= 2.0 * std::f64::consts::PI;
            }
            let l = ((x * x + y * y).sqrt().ln(), arg);
            let cmul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
            let cpow = |b: (f64, f64), n: i64| {
                let r = (b.0 * b.0 + b.1 * b.1).sqrt().powi(n as i32);
                let t = b.1.atan2(b.0) * n as f64;
                (r * t.cos(), r * t.sin())
            };
            let mut acc = (0.0, 0.0);
            for (m, e, c) in a.terms() {
                let cw = (c.coeff(0).to_f64().unwrap(), c.coeff(1).to_f64().unwrap() * std::f64::consts::PI);
                let ze = cpow(z, e);
                let lm = if m == 0 { (1.0, 0.0) } else { cpow(l, m as i64) };
                let mut d = cmul((e as f64, 0.0), lm);
                if m > 0 {
                    let lm1 = if m == 1 { (1.0, 0.0) } else { cpow(l, m as i64 - 1) };
                    d = (d.0 + m as f64 * lm1.0, d.1 + m as f64 * lm1.1);
                }
                let t = cmul(cmul(cw, d), ze);
                acc = (acc.0 + t.0, acc.1 + t.1);
            }
            acc
        }

        proptest! {
            #[test]
            fn delta_is_linear(a in any_series(), b in any_series()) {
                prop_assert_eq!(ls_delta(&ls_add(&a, &b)), ls_add(&ls_delta(&a), &ls_delta(&b)));
            }

            #[test]
            fn delta_product_rule_with_z(a in any_series()) {
                let lhs = ls_delta(&ls_mul_z(&a));
                let rhs = ls_add(&ls_mul_z(&a), &ls_mul_z(&ls_delta(&a)));
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn delta_commutes_with_log_up_to_identity(a in any_series()) {
                let lhs = ls_delta(&ls_mul_log(&a));
                let rhs = ls_add(&ls_mul_log(&ls_delta(&a)), &a);
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn eval_of_delta_matches_termwise_derivative(
                a in series(false),
                re in -8i64..8, im in -8i64..8,
            ) {
                prop_assume!(re * re + im * im > 4);
                let z = ComplexRational::new(rat(re, 2), rat(im, 2));
                let point = EvalPoint::new(z, Precision::new(128).unwrap()).unwrap();
                let v = ls_eval(&ls_delta(&a), &point, TailBound::zero());
                let expected = termwise_delta_f64(&a, (re as f64 / 2.0, im as f64 / 2.0));
                let scale = 1.0 + expected.0.abs() + expected.1.abs();
                prop_assert!((v.re.mid_f64() - expected.0).abs() <= v.re.rad_f64() + 1e-11 * scale);
                prop_assert!((v.im.mid_f64() - expected.1).abs() <= v.im.rad_f64() + 1e-11 * scale);
            }

            #[test]
            fn branch_identity_on_right_half_plane(re in 1i64..400, im in -400i64..400, d in 1i64..40) {
                let z = ComplexRational::new(rat(re, d), rat(im, d));
                prop_assume!(z.norm_sqr() > Rational::one());
                let p = Precision::new(128).unwrap();
                let lhs = log_branch(&z.neg(), p).unwrap();
                let rhs = log_branch(&z, p).unwrap();
                let diff_re = lhs.re.sub(&rhs.re);
                let diff_im = lhs.im.sub(&rhs.im).add(&RealBall::pi(p));
                prop_assert!(diff_re.mid_f64().abs() <= diff_re.rad_f64());
                prop_assert!(diff_im.mid_f64().abs() <= diff_im.rad_f64());
            }
        }
    }
}
