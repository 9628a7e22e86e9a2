//! The functions `f_{l,k}(z, nu)` and `f^vee_{l,k}(z, nu)` as [`LogSeries`], and
//! the columns `Y_{l,k}(z; nu)` built from them.
//!
//! Every member is a `Q[w]`-combination of `(log z)^m` times one of four
//! basic pieces: the polynomial `f_{l,1}`, and the tail sums
//! `(-1)^p / p! * sum_t z^-t (d/dt)^p R^(2+l)(t, nu)` for `p = 0..3`
//! (`f_{l,2}`, `f_{l,4}`, `f_{l,6}`, `f_{l,8}`). The compositions are written
//! once against [`FamilyAlgebra`] and instantiated both for series and for the
//! [`TailProfile`] used in numeric tail bounds.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::exact::{binomial, rat, CoeffW, Rational};
use crate::r_function::{d_r_pow, tail_bound_weighted, DerivOrder, RPoint};
use crate::series::{ls_add, ls_delta, ls_mul_log, ls_scale, LogSeries};

/// Admissible `k` for each level `l`.
pub const K_SETS: [&[u8]; 3] = [&[1, 2, 3], &[1, 2, 3, 5], &[1, 2, 3, 5, 7]];

pub fn k_set(l: u8) -> Result<&'static [u8]> {
    K_SETS
        .get(l as usize)
        .copied()
        .ok_or_else(|| Error::InvalidIndex(format!("l must be 0, 1 or 2, got {l}")))
}

/// `(l, k, nu)` with `k` in the index set of level `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyIndex {
    l: u8,
    k: u8,
    nu: u32,
}

impl FamilyIndex {
    pub fn new(l: u8, k: u8, nu: u32) -> Result<Self> {
        let ks = k_set(l)?;
        if !ks.contains(&k) {
            return Err(Error::InvalidIndex(format!("k = {k} is not in K_{l} = {ks:?}")));
        }
        Ok(FamilyIndex { l, k, nu })
    }

    pub fn l(self) -> u8 {
        self.l
    }

    pub fn k(self) -> u8 {
        self.k
    }

    pub fn nu(self) -> u32 {
        self.nu
    }

    pub fn with_nu(self, nu: u32) -> Self {
        FamilyIndex { nu, ..self }
    }

    /// Length `4 + 2l` of the column `Y`.
    pub fn dim(self) -> usize {
        4 + 2 * self.l as usize
    }
}

/// Series are exact for all exponents `>= -T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Truncation(u32);

impl Truncation {
    pub fn new(t: u32, idx: &FamilyIndex) -> Result<Self> {
        let floor = idx.nu + 4 + 2 * idx.l as u32;
        if t < floor {
            return Err(Error::InvalidArgument(format!(
                "truncation T = {t} is below nu + 4 + 2l = {floor}"
            )));
        }
        Ok(Truncation(t))
    }

    /// `T = 2 nu + 40`
    pub fn default_for(nu: u32) -> Self {
        Truncation(2 * nu + 40)
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Where the tail sums start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailStart {
    /// `t = nu + 1`, the primary definition.
    AfterNu,
    /// `t = 1`, relying on the zeros of `R^(2+l)` at `t = 1..nu`.
    One,
}

/// The operations the family is assembled from.
pub trait FamilyAlgebra {
    type Elem: Clone;

    /// `f_{l,1}`
    fn poly(&self) -> Self::Elem;
    /// `(-1)^p / p! * sum_t z^-t (d/dt)^p R^(2+l)`
    fn tail(&self, p: u8) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, c: &CoeffW, a: &Self::Elem) -> Self::Elem;
    fn mul_log(&self, a: &Self::Elem) -> Self::Elem;

    fn scale_q(&self, q: Rational, a: &Self::Elem) -> Self::Elem {
        self.scale(&CoeffW::constant(q), a)
    }

    fn mul_log_n(&self, n: usize, a: &Self::Elem) -> Self::Elem {
        (0..n).fold(a.clone(), |acc, _| self.mul_log(&acc))
    }
}

fn f3<A: FamilyAlgebra>(a: &A) -> A::Elem {
    a.add(&a.mul_log(&a.tail(0)), &a.tail(1))
}

/// `1/2 log^2 f2 + log f4 + f6`
fn f5<A: FamilyAlgebra>(a: &A) -> A::Elem {
    let t = a.add(&a.scale_q(rat(1, 2), &a.mul_log_n(2, &a.tail(0))), &a.mul_log(&a.tail(1)));
    a.add(&t, &a.tail(2))
}

/// `-1/2 log^2 f2 + log f3 + f6`
fn f5_second_form<A: FamilyAlgebra>(a: &A) -> A::Elem {
    let t = a.add(&a.scale_q(rat(-1, 2), &a.mul_log_n(2, &a.tail(0))), &a.mul_log(&f3(a)));
    a.add(&t, &a.tail(2))
}

/// `-w f3 + f5`
fn f5_vee<A: FamilyAlgebra>(a: &A) -> A::Elem {
    a.add(&a.scale(&-&CoeffW::w(), &f3(a)), &f5(a))
}

/// `1/6 log^3 f2 - 1/2 log^2 f3 + log f5 + f8`
fn f7<A: FamilyAlgebra>(a: &A) -> A::Elem {
    let t = a.add(&a.scale_q(rat(1, 6), &a.mul_log_n(3, &a.tail(0))), &a.scale_q(rat(-1, 2), &a.mul_log_n(2, &f3(a))));
    let t = a.add(&t, &a.mul_log(&f5(a)));
    a.add(&t, &a.tail(3))
}

/// `-1/3 log^3 f2 + 1/2 log^2 f3 + f8 + log (f5 + 1/2 log^2 f2 - log f3)`
fn f7_long_form<A: FamilyAlgebra>(a: &A) -> A::Elem {
    let head = a.add(&a.scale_q(rat(-1, 3), &a.mul_log_n(3, &a.tail(0))), &a.scale_q(rat(1, 2), &a.mul_log_n(2, &f3(a))));
    let head = a.add(&head, &a.tail(3));
    let inner = a.add(&f5(a), &a.scale_q(rat(1, 2), &a.mul_log_n(2, &a.tail(0))));
    let inner = a.add(&inner, &a.scale_q(rat(-1, 1), &a.mul_log(&f3(a))));
    a.add(&head, &a.mul_log(&inner))
}

/// `f7 + (2 pi^2 / 3) f3`, with `2 pi^2 / 3 = -(2/3) w^2`.
fn f7_vee<A: FamilyAlgebra>(a: &A) -> A::Elem {
    a.add(&f7(a), &a.scale(&CoeffW::monomial(rat(-2, 3), 2), &f3(a)))
}

/// `f^vee_{l,k}`, which is `f_{l,k}` for `k = 1, 2, 3`.
fn vee<A: FamilyAlgebra>(a: &A, k: u8) -> A::Elem {
    match k {
        1 => a.poly(),
        2 => a.tail(0),
        3 => f3(a),
        5 => f5_vee(a),
        7 => f7_vee(a),
        _ => unreachable!("k validated by FamilyIndex"),
    }
}

/// Builds series for fixed `(l, nu, T)`.
struct SeriesAlgebra {
    l: u8,
    nu: u32,
    t_max: u32,
    start: TailStart,
}

impl FamilyAlgebra for SeriesAlgebra {
    type Elem = LogSeries;

    fn poly(&self) -> LogSeries {
        f1_series(self.l, self.nu)
    }

    fn tail(&self, p: u8) -> LogSeries {
        tail_series(self.l, self.nu, self.t_max, p, self.start)
    }

    fn add(&self, a: &LogSeries, b: &LogSeries) -> LogSeries {
        ls_add(a, b)
    }

    fn scale(&self, c: &CoeffW, a: &LogSeries) -> LogSeries {
        ls_scale(c, a)
    }

    fn mul_log(&self, a: &LogSeries) -> LogSeries {
        ls_mul_log(a)
    }
}

fn f1_series(l: u8, nu: u32) -> LogSeries {
    let exp = 2 + l as usize;
    let coeffs = (0..=nu as i64)
        .map(|k| {
            let odd = ((nu as i64 + k) * l as i64) % 2 == 1;
            let c = num_traits::pow(binomial(nu as u64, k), exp) * num_traits::pow(binomial(nu as u64 + k as u64, nu as i64), exp);
            Rational::from_integer(if odd { -c } else { c })
        })
        .collect();
    LogSeries::from_rationals(0, coeffs, false)
}

fn tail_series(l: u8, nu: u32, t_max: u32, p: u8, start: TailStart) -> LogSeries {
    let ord = DerivOrder::for_level(p, l).expect("p <= 3 and l <= 2");
    let first = match start {
        TailStart::AfterNu => nu + 1,
        TailStart::One => 1,
    };
    assert!(t_max >= first, "truncation {t_max} leaves no tail terms");
    let fact: i64 = (1..=p as i64).product();
    let sign = if p.is_multiple_of(2) { 1 } else { -1 };
    let factor = rat(sign, fact);
    let mut s = LogSeries::with_window(-(t_max as i64), -(first as i64), true, 0);
    for t in first..=t_max {
        let pt = RPoint::integer(t as i64, nu).expect("t >= 1 is never a pole");
        s.set(0, -(t as i64), CoeffW::constant(&factor * d_r_pow(ord, &pt)));
    }
    s
}

fn check_level(l: u8) -> Result<()> {
    k_set(l).map(|_| ())
}

fn algebra(l: u8, nu: u32, t_max: u32, start: TailStart) -> Result<SeriesAlgebra> {
    check_level(l)?;
    let first = if start == TailStart::AfterNu { nu + 1 } else { 1 };
    if t_max < first {
        return Err(Error::InvalidArgument(format!("truncation {t_max} leaves no tail terms for nu = {nu}")));
    }
    Ok(SeriesAlgebra { l, nu, t_max, start })
}

fn need_level(l: u8, min: u8, what: &str) -> Result<()> {
    check_level(l)?;
    if l < min {
        return Err(Error::InvalidIndex(format!("{what} is defined only for l >= {min}, got l = {l}")));
    }
    Ok(())
}

/// `f_{l,1}(z, nu) = sum_{k=0}^{nu} (-1)^((nu+k) l) C(nu,k)^(2+l) C(nu+k,nu)^(2+l) z^k`.
pub fn build_f1(l: u8, nu: u32) -> Result<LogSeries> {
    check_level(l)?;
    Ok(f1_series(l, nu))
}

pub fn build_f2(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    Ok(algebra(l, nu, t_max, TailStart::AfterNu)?.tail(0))
}

pub fn build_f3(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    Ok(f3(&algebra(l, nu, t_max, TailStart::AfterNu)?))
}

pub fn build_f4(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    Ok(algebra(l, nu, t_max, TailStart::AfterNu)?.tail(1))
}

pub fn build_f5(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    need_level(l, 1, "f_{l,5}")?;
    Ok(f5(&algebra(l, nu, t_max, TailStart::AfterNu)?))
}

/// `f_{l,5}` assembled from the second displayed form, `-1/2 log^2 f2 + log f3 + f6`.
pub fn build_f5_second_form(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    need_level(l, 1, "f_{l,5}")?;
    Ok(f5_second_form(&algebra(l, nu, t_max, TailStart::AfterNu)?))
}

pub fn build_f5_vee(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    need_level(l, 1, "f^vee_{l,5}")?;
    Ok(f5_vee(&algebra(l, nu, t_max, TailStart::AfterNu)?))
}

pub fn build_f6(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    need_level(l, 1, "f_{l,6}")?;
    Ok(algebra(l, nu, t_max, TailStart::AfterNu)?.tail(2))
}

pub fn build_f7(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    need_level(l, 2, "f_{l,7}")?;
    Ok(f7(&algebra(l, nu, t_max, TailStart::AfterNu)?))
}

/// `f_{l,7}` assembled from the long displayed form.
pub fn build_f7_long_form(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    need_level(l, 2, "f_{l,7}")?;
    Ok(f7_long_form(&algebra(l, nu, t_max, TailStart::AfterNu)?))
}

pub fn build_f7_vee(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    need_level(l, 2, "f^vee_{l,7}")?;
    Ok(f7_vee(&algebra(l, nu, t_max, TailStart::AfterNu)?))
}

pub fn build_f8(l: u8, nu: u32, t_max: u32) -> Result<LogSeries> {
    need_level(l, 2, "f_{l,8}")?;
    Ok(algebra(l, nu, t_max, TailStart::AfterNu)?.tail(3))
}

/// Tail piece `p` (i.e. `f_{l,2}`, `f_{l,4}`, `f_{l,6}`, `f_{l,8}` for `p = 0..3`)
/// with an explicit summation start.
pub fn build_tail(l: u8, nu: u32, t_max: u32, p: u8, start: TailStart) -> Result<LogSeries> {
    if p > DerivOrder::MAX_P {
        return Err(Error::InvalidArgument(format!("tail order {p} exceeds 3")));
    }
    Ok(algebra(l, nu, t_max, start)?.tail(p))
}

/// `f^vee_{l,k}(z, nu)` truncated at `T`.
pub fn build_vee(idx: FamilyIndex, t: Truncation) -> Result<LogSeries> {
    Ok(vee(&algebra(idx.l, idx.nu, t.0, TailStart::AfterNu)?, idx.k))
}

/// The column `Y_{l,k}(z; nu)` of `4 + 2l` series.
#[derive(Debug, Clone, PartialEq)]
pub struct YVector {
    idx: FamilyIndex,
    t: Truncation,
    entries: Vec<LogSeries>,
}

impl YVector {
    pub fn idx(&self) -> FamilyIndex {
        self.idx
    }

    pub fn truncation(&self) -> Truncation {
        self.t
    }

    pub fn entries(&self) -> &[LogSeries] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Entry `i` (1-based) is `(nu^-1 delta)^(i-1) f^vee_{l,k}`.
pub fn build_y(idx: FamilyIndex, t: Truncation) -> Result<YVector> {
    if idx.nu == 0 {
        return Err(Error::InvalidArgument("Y is defined for nu >= 1".into()));
    }
    let inv_nu = Rational::new(BigInt::one(), idx.nu.into());
    let mut entries = Vec::with_capacity(idx.dim());
    entries.push(build_vee(idx, t)?);
    while entries.len() < idx.dim() {
        let next = ls_delta(entries.last().expect("nonempty")).scale_rational(&inv_nu);
        entries.push(next);
    }
    Ok(YVector { idx, t, entries })
}

/// Thread-safe memo of `Y` columns keyed by `(l, k, nu, T)`.
#[derive(Debug, Default)]
pub struct SeriesCache {
    map: RwLock<HashMap<(FamilyIndex, Truncation), Arc<YVector>>>,
}

impl SeriesCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn y(&self, idx: FamilyIndex, t: Truncation) -> Result<Arc<YVector>> {
        if let Some(hit) = self.map.read().expect("cache lock poisoned").get(&(idx, t)) {
            return Ok(Arc::clone(hit));
        }
        // built outside the lock; a concurrent duplicate build is identical, first insert wins
        let built = Arc::new(build_y(idx, t)?);
        let mut map = self.map.write().expect("cache lock poisoned");
        Ok(Arc::clone(map.entry((idx, t)).or_insert(built)))
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The coefficients `gamma_(m,p)` in `f^vee = [poly] + sum gamma_(m,p) (log z)^m sum_t z^-t (d/dt)^p R^(2+l)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TailProfile {
    poly: bool,
    terms: BTreeMap<(usize, u8), CoeffW>,
}

impl TailProfile {
    pub fn has_poly(&self) -> bool {
        self.poly
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, u8), &CoeffW)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    /// Upper bound on the modulus of the part of `(nu^-1 delta)^j f^vee` discarded
    /// by truncation at `T`, at a point with `|z| >= z_abs` and `|log z| <= log_abs`.
    ///
    /// Uses `delta^j [(log z)^m z^-t] = sum_r C(j,r) m!/(m-r)! (-t)^(j-r) (log z)^(m-r) z^-t`.
    pub fn entry_tail_bound(&self, l: u8, nu: u32, t: Truncation, j: u32, z_abs: f64, log_abs: f64) -> Result<f64> {
        let t0 = t.get() as u64 + 1;
        let mut total = 0.0;
        for (&(m, p), gamma) in &self.terms {
            let mut inner = 0.0;
            for r in 0..=(j as usize).min(m) {
                let choose = binomial(j as u64, r as i64).to_string().parse::<f64>().unwrap_or(f64::INFINITY);
                let falling: f64 = ((m - r + 1)..=m).map(|x| x as f64).product();
                let weight = tail_bound_weighted(l, p, nu, t0, z_abs, j - r as u32)?;
                inner += choose * falling * log_abs.powi((m - r) as i32) * weight;
            }
            total += gamma.abs_bound() * inner;
        }
        Ok(total * (nu as f64).powi(-(j as i32)) * (1.0 + 1e-12))
    }
}

struct ProfileAlgebra;

impl FamilyAlgebra for ProfileAlgebra {
    type Elem = TailProfile;

    fn poly(&self) -> TailProfile {
        TailProfile { poly: true, terms: BTreeMap::new() }
    }

    fn tail(&self, p: u8) -> TailProfile {
        let fact: i64 = (1..=p as i64).product();
        let sign = if p.is_multiple_of(2) { 1 } else { -1 };
        TailProfile { poly: false, terms: BTreeMap::from([((0, p), CoeffW::constant(rat(sign, fact)))]) }
    }

    fn add(&self, a: &TailProfile, b: &TailProfile) -> TailProfile {
        let mut terms = a.terms.clone();
        for (k, v) in &b.terms {
            let e = terms.entry(*k).or_default();
            *e += v;
        }
        terms.retain(|_, v| !v.is_zero());
        TailProfile { poly: a.poly || b.poly, terms }
    }

    fn scale(&self, c: &CoeffW, a: &TailProfile) -> TailProfile {
        let mut terms: BTreeMap<_, _> = a.terms.iter().map(|(k, v)| (*k, v * c)).collect();
        terms.retain(|_, v| !v.is_zero());
        TailProfile { poly: a.poly && !c.is_zero(), terms }
    }

    fn mul_log(&self, a: &TailProfile) -> TailProfile {
        assert!(!a.poly, "the polynomial piece is never multiplied by log z");
        TailProfile { poly: false, terms: a.terms.iter().map(|(&(m, p), v)| ((m + 1, p), v.clone())).collect() }
    }
}

/// Structure of `f^vee_{l,k}` in terms of the basic tail sums.
pub fn tail_profile(idx: FamilyIndex) -> TailProfile {
    vee(&ProfileAlgebra, idx.k)
}
