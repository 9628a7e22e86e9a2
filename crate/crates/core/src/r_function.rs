//! The rational function `R(t, nu) = prod_{j=1}^{nu} (t - j) / prod_{j=0}^{nu} (t + j)`,
//! t-derivatives of its powers, and tail bounds for the series built from them.
//!
//! Derivatives of `R^m` are computed two ways. Away from the zeros `t = 1..nu`
//! we use `R^m * B_p(m g_1, ..., m g_p)` with `g_q` the derivatives of `log R`
//! and `B_p` the complete Bell polynomial. On the zeros, where `log R` has
//! poles, we expand numerator and denominator as Taylor polynomials in
//! `h = t - t0` and divide the truncated series.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::Rational;

/// A point `(t, nu)` away from the poles `t = 0, -1, ..., -nu` of `R`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RPoint {
    t: Rational,
    nu: u32,
}

impl RPoint {
    pub fn new(t: Rational, nu: u32) -> Result<Self> {
        if t.is_integer() && !t.is_positive() && t >= -Rational::from_integer(nu.into()) {
            return Err(Error::Pole(format!("R(t, {nu}) has a pole at t = {t}")));
        }
        Ok(RPoint { t, nu })
    }

    pub fn integer(t: i64, nu: u32) -> Result<Self> {
        Self::new(Rational::from_integer(t.into()), nu)
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    /// True when `t` is one of the zeros `1, ..., nu` of `R`.
    pub fn on_zero_set(&self) -> bool {
        self.t.is_integer() && self.t.is_positive() && self.t <= Rational::from_integer(self.nu.into())
    }
}

/// Order `p` of the t-derivative and exponent `m = 2 + l` of `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DerivOrder {
    p: u8,
    m: u8,
}

impl DerivOrder {
    pub const MAX_P: u8 = 3;

    pub fn new(p: u8, m: u8) -> Result<Self> {
        if p > Self::MAX_P {
            return Err(Error::InvalidArgument(format!("derivative order {p} exceeds 3")));
        }
        if !(2..=4).contains(&m) {
            return Err(Error::InvalidArgument(format!("power {m} of R must be 2, 3 or 4")));
        }
        Ok(DerivOrder { p, m })
    }

    /// Order `p` on `R^(2+l)`.
    pub fn for_level(p: u8, l: u8) -> Result<Self> {
        Self::new(p, l + 2)
    }

    pub fn p(self) -> u8 {
        self.p
    }

    pub fn m(self) -> u8 {
        self.m
    }
}

pub fn r_eval(pt: &RPoint) -> Rational {
    let mut num = Rational::one();
    for j in 1..=pt.nu as i64 {
        num *= &pt.t - Rational::from_integer(j.into());
    }
    let mut den = Rational::one();
    for j in 0..=pt.nu as i64 {
        den *= &pt.t + Rational::from_integer(j.into());
    }
    num / den
}

/// `g_p = (d/dt)^p log R = (-1)^(p-1) (p-1)! [sum_{j=1}^{nu} (t-j)^-p - sum_{j=0}^{nu} (t+j)^-p]`.
pub fn log_deriv(p: u32, pt: &RPoint) -> Result<Rational> {
    if p == 0 {
        return Err(Error::InvalidArgument("log_deriv needs p >= 1".into()));
    }
    if pt.on_zero_set() {
        return Err(Error::Pole(format!("log R(t, {}) has a pole at t = {}", pt.nu, pt.t)));
    }
    let mut s = Rational::zero();
    for j in 1..=pt.nu as i64 {
        s += Rational::one() / num_traits::pow(&pt.t - Rational::from_integer(j.into()), p as usize);
    }
    for j in 0..=pt.nu as i64 {
        s -= Rational::one() / num_traits::pow(&pt.t + Rational::from_integer(j.into()), p as usize);
    }
    let fact: BigInt = (1..p as u64).product::<u64>().into();
    let sign = if p % 2 == 1 { 1 } else { -1 };
    Ok(s * Rational::from_integer(fact * sign))
}

/// Complete Bell polynomials `B_0..B_3`.
fn bell(p: u8, x: &[Rational]) -> Rational {
    match p {
        0 => Rational::one(),
        1 => x[0].clone(),
        2 => &x[0] * &x[0] + &x[1],
        3 => &x[0] * &x[0] * &x[0] + Rational::from_integer(3.into()) * &x[0] * &x[1] + &x[2],
        _ => unreachable!("derivative order is capped at 3"),
    }
}

/// `(d/dt)^p (R^m)` at `pt`, exact.
pub fn d_r_pow(ord: DerivOrder, pt: &RPoint) -> Rational {
    if ord.p == 0 {
        return num_traits::pow(r_eval(pt), ord.m as usize);
    }
    if pt.on_zero_set() {
        return d_r_pow_taylor(ord, pt);
    }
    let m = Rational::from_integer(ord.m.into());
    let xs: Vec<Rational> = (1..=ord.p as u32)
        .map(|q| &m * log_deriv(q, pt).expect("off the zero set"))
        .collect();
    num_traits::pow(r_eval(pt), ord.m as usize) * bell(ord.p, &xs)
}

fn truncated_mul(a: &[Rational], b: &[Rational], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `prod_j (c_j + h)^m` as a Taylor polynomial in `h` truncated to degree `< len`.
fn shifted_product(constants: impl Iterator<Item = Rational>, m: u8, len: usize) -> Vec<Rational> {
    let mut acc = vec![Rational::zero(); len];
    acc[0] = Rational::one();
    for c in constants {
        let linear = [c, Rational::one()];
        for _ in 0..m {
            acc = truncated_mul(&acc, &linear, len);
        }
    }
    acc
}

/// `(d/dt)^p (R^m)` by Taylor-expanding numerator and denominator of `R^m` at `t`
/// and dividing the truncated series. Valid at every non-pole, including the zeros of `R`.
pub fn d_r_pow_taylor(ord: DerivOrder, pt: &RPoint) -> Rational {
    let len = ord.p as usize + 1;
    let t = &pt.t;
    let nu = pt.nu as i64;
    let num = shifted_product((1..=nu).map(|j| t - Rational::from_integer(j.into())), ord.m, len);
    let den = shifted_product((0..=nu).map(|j| t + Rational::from_integer(j.into())), ord.m, len);
    let mut quot: Vec<Rational> = Vec::with_capacity(len);
    for k in 0..len {
        let mut c = num[k].clone();
        for i in 1..=k {
            c -= &den[i] * &quot[k - i];
        }
        quot.push(c / &den[0]);
    }
    let fact: BigInt = (1..=ord.p as u64).product::<u64>().into();
    &quot[ord.p as usize] * Rational::from_integer(fact)
}

/// Whether `(d/dt)^p R^(2+l)` vanishes at every `t = 1..nu` for all `p < 2 + l`.
pub fn zero_order_check(l: u8, nu: u32) -> bool {
    let m = l + 2;
    (1..=nu as i64).all(|j| {
        let pt = RPoint::integer(j, nu).expect("positive t is never a pole");
        (0..m).all(|p| d_r_pow_taylor(DerivOrder::new(p, m).expect("p < m <= 4"), &pt).is_zero())
    })
}

/// Upper bound on `sum_{t >= t0} |(d/dt)^p R^(2+l)(t, nu)| z_abs^-t`.
pub fn tail_bound(l: u8, p: u8, nu: u32, t0: u64, z_abs: f64) -> Result<f64> {
    tail_bound_weighted(l, p, nu, t0, z_abs, 0)
}

/// Upper bound on `sum_{t >= t0} t^q |(d/dt)^p R^(2+l)(t, nu)| z_abs^-t`.
///
/// Uses `|R| <= 1` and `|g_k(t)| <= (k-1)! (2 nu + 1) / (t - nu)^k` for `t > nu`,
/// so `|(R^m)^(p)| <= B_p(m|g_1|, ..., m|g_p|)`, a majorant that decreases in `t`.
/// The weighted geometric part is summed explicitly until the term ratio drops
/// below one and closed with a geometric series after that.
pub fn tail_bound_weighted(l: u8, p: u8, nu: u32, t0: u64, z_abs: f64, q: u32) -> Result<f64> {
    let ord = DerivOrder::for_level(p, l)?;
    if t0 < nu as u64 + 1 {
        return Err(Error::InvalidArgument(format!("tail start {t0} must exceed nu = {nu}")));
    }
    if z_abs.is_nan() || z_abs <= 1.0 {
        return Err(Error::InvalidArgument(format!("|z| = {z_abs} must exceed 1")));
    }
    let m = ord.m as f64;
    let gap = (t0 - nu as u64) as f64;
    let spread = (2 * nu + 1) as f64;
    let g: Vec<f64> = (1..=p as i32)
        .map(|k| {
            let fact: f64 = (1..k).map(f64::from).product();
            m * fact * spread / gap.powi(k)
        })
        .collect();
    let majorant = match p {
        0 => 1.0,
        1 => g[0],
        2 => g[0] * g[0] + g[1],
        _ => g[0] * g[0] * g[0] + 3.0 * g[0] * g[1] + g[2],
    };
    Ok(majorant * weighted_geometric_sum(t0, z_abs, q))
}

/// Upper bound on `sum_{t >= t0} t^q z_abs^-t`.
fn weighted_geometric_sum(t0: u64, z_abs: f64, q: u32) -> f64 {
    let ln_z = z_abs.ln();
    let term = |t: u64| ((q as f64) * (t as f64).ln() - (t as f64) * ln_z).exp();
    let mut sum = 0.0;
    let mut t = t0;
    loop {
        let ratio = ((t as f64 + 1.0) / t as f64).powi(q as i32) / z_abs;
        if ratio < 1.0 {
            return sum + term(t) / (1.0 - ratio);
        }
        sum += term(t);
        t += 1;
    }
}

/// Exact `|(d/dt)^p R^m|` summed against `t^q z_abs^-t` over `t0..t0+count`, in f64.
/// Used to check [`tail_bound_weighted`] against brute force.
pub fn partial_tail(l: u8, p: u8, nu: u32, t0: u64, count: u64, z_abs: f64, q: u32) -> Result<f64> {
    let ord = DerivOrder::for_level(p, l)?;
    let mut sum = 0.0;
    for t in t0..t0 + count {
        let d = d_r_pow(ord, &RPoint::integer(t as i64, nu)?);
        let v = d.abs().to_f64().unwrap_or(f64::INFINITY);
        sum += v * ((q as f64) * (t as f64).ln() - (t as f64) * z_abs.ln()).exp();
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, power_sum, rat};

    fn pt(t: i64, nu: u32) -> RPoint {
        RPoint::integer(t, nu).unwrap()
    }

    #[test]
    fn poles_are_rejected() {
        assert!(RPoint::integer(0, 3).is_err());
        assert!(RPoint::integer(-3, 3).is_err());
        assert!(RPoint::integer(-4, 3).is_ok());
        assert!(RPoint::new(rat(-1, 2), 3).is_ok());
    }

    #[test]
    fn r_eval_examples() {
        assert_eq!(r_eval(&pt(5, 2)), rat(2, 35));
        assert_eq!(r_eval(&pt(3, 0)), rat(1, 3));
        assert_eq!(r_eval(&pt(1, 2)), int(0));
    }

    #[test]
    fn log_deriv_examples() {
        assert_eq!(log_deriv(1, &pt(5, 2)).unwrap(), rat(31, 420));
        assert_eq!(log_deriv(1, &pt(3, 0)).unwrap(), rat(-1, 3));
        // -(1/16 + 1/9) + (1/25 + 1/36 + 1/49), from the direct sums
        let direct = -(rat(1, 16) + rat(1, 9)) + rat(1, 25) + rat(1, 36) + rat(1, 49);
        assert_eq!(log_deriv(2, &pt(5, 2)).unwrap(), direct);
        assert!(matches!(log_deriv(1, &pt(2, 2)), Err(Error::Pole(_))));
    }

    #[test]
    fn log_deriv_agrees_with_power_sums() {
        let p = pt(9, 4);
        let s = power_sum(2, 9 - 4, 9 - 1).unwrap() - power_sum(2, 9, 9 + 4).unwrap();
        assert_eq!(log_deriv(2, &p).unwrap(), -s);
    }

    #[test]
    fn d_r_pow_examples() {
        let o = |p, m| DerivOrder::new(p, m).unwrap();
        assert_eq!(d_r_pow(o(0, 3), &pt(5, 2)), num_traits::pow(rat(2, 35), 3));
        let expected = int(2) * rat(31, 420) * rat(2, 35) * rat(2, 35);
        assert_eq!(d_r_pow(o(1, 2), &pt(5, 2)), expected);
        assert_eq!(d_r_pow(o(1, 2), &pt(1, 2)), int(0));
        assert!(DerivOrder::new(4, 2).is_err());
        assert!(DerivOrder::new(1, 5).is_err());
    }

    #[test]
    fn bell_and_taylor_paths_agree_off_the_zero_set() {
        for nu in 0..6u32 {
            for m in 2..=4u8 {
                for p in 0..=3u8 {
                    for t in [rat(1, 2), rat(-7, 3), rat(11, 1), rat(25, 4), rat(-13, 2)] {
                        let point = RPoint::new(t, nu).unwrap();
                        let ord = DerivOrder::new(p, m).unwrap();
                        assert_eq!(d_r_pow(ord, &point), d_r_pow_taylor(ord, &point));
                    }
                }
            }
        }
    }

    #[test]
    fn functional_equation_in_nu() {
        for nu in 1..8u32 {
            for t in [rat(17, 3), rat(-1, 5), int(40)] {
                let a = r_eval(&RPoint::new(t.clone(), nu).unwrap());
                let b = r_eval(&RPoint::new(t.clone(), nu - 1).unwrap());
                let nu_q = Rational::from_integer(nu.into());
                assert_eq!(a / b, (&t - &nu_q) / (&t + &nu_q));
            }
        }
    }

    #[test]
    fn zero_order_examples() {
        assert!(zero_order_check(0, 3));
        assert!(zero_order_check(2, 1));
        assert!(zero_order_check(0, 0));
        for l in 0..=2 {
            for nu in 0..=12 {
                assert!(zero_order_check(l, nu), "l={l} nu={nu}");
            }
        }
    }

    #[test]
    fn zero_order_is_sharp() {
        // the derivative of order 2 + l does not vanish at the zeros
        for l in 0..=1u8 {
            let ord = DerivOrder::new(l + 2, l + 2).unwrap();
            assert!(!d_r_pow_taylor(ord, &pt(1, 3)).is_zero());
        }
    }

    #[test]
    fn tail_bound_geometric_case() {
        for nu in [1u32, 4, 9] {
            for t0 in [nu as u64 + 1, 20, 61] {
                let b = tail_bound(1, 0, nu, t0, 2.0).unwrap();
                assert!(b <= 2f64.powi(-(t0 as i32) + 1), "nu={nu} t0={t0}: {b}");
            }
        }
    }

    #[test]
    fn tail_bound_monotone_in_modulus() {
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let z_abs = 1.1 + 0.25 * k as f64;
            let b = tail_bound_weighted(2, 3, 5, 30, z_abs, 4).unwrap();
            assert!(b <= last);
            last = b;
        }
    }

    #[test]
    fn tail_bound_preconditions() {
        assert!(tail_bound(0, 0, 5, 5, 2.0).is_err());
        assert!(tail_bound(0, 0, 5, 6, 1.0).is_err());
        assert!(tail_bound(0, 4, 5, 6, 2.0).is_err());
    }

    #[test]
    fn tail_bound_dominates_brute_force() {
        let cases: [(u8, u8, u32, u64, f64, u32); 10] = [
            (0, 0, 1, 2, 1.5, 0),
            (0, 1, 3, 10, 2.0, 0),
            (1, 2, 2, 5, 1.25, 0),
            (2, 3, 4, 9, 3.0, 0),
            (1, 1, 6, 30, 1.1, 0),
            (2, 0, 8, 12, 1.58, 0),
            (0, 3, 5, 7, 2.5, 0),
            (2, 2, 3, 61, 1.58, 5),
            (1, 3, 7, 40, 1.3, 3),
            (0, 2, 2, 3, 4.0, 7),
        ];
        for (l, p, nu, t0, z, q) in cases {
            let bound = tail_bound_weighted(l, p, nu, t0, z, q).unwrap();
            let brute = partial_tail(l, p, nu, t0, 500, z, q).unwrap();
            assert!(brute <= bound, "{:?}: brute {brute} > bound {bound}", (l, p, nu, t0, z, q));
        }
    }
}
