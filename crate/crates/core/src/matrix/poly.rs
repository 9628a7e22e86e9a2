use std::fmt;

use num_traits::{One, Zero};

use crate::exact::{rat_powi, Rational};

/// Dense polynomial in `z` and `u` over Q; `coeffs[a][b]` multiplies `z^a u^b`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolyZU {
    coeffs: Vec<Vec<Rational>>,
}

impl PolyZU {
    fn normalized(mut coeffs: Vec<Vec<Rational>>) -> Self {
        for row in &mut coeffs {
            while row.last().is_some_and(Zero::is_zero) {
                row.pop();
            }
        }
        while coeffs.last().is_some_and(Vec::is_empty) {
            coeffs.pop();
        }
        PolyZU { coeffs }
    }

    pub fn zero() -> Self {
        PolyZU { coeffs: Vec::new() }
    }

    pub fn constant(q: Rational) -> Self {
        Self::normalized(vec![vec![q]])
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// `q z^a u^b`
    pub fn monomial(q: Rational, a: usize, b: usize) -> Self {
        let mut coeffs = vec![Vec::new(); a + 1];
        coeffs[a] = vec![Rational::zero(); b + 1];
        coeffs[a][b] = q;
        Self::normalized(coeffs)
    }

    pub fn z() -> Self {
        Self::monomial(Rational::one(), 1, 0)
    }

    pub fn u() -> Self {
        Self::monomial(Rational::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, a: usize, b: usize) -> Rational {
        self.coeffs.get(a).and_then(|r| r.get(b)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn z_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn u_degree(&self) -> Option<usize> {
        self.coeffs.iter().filter_map(|r| r.len().checked_sub(1)).max()
    }

    /// Coefficient of `z^a` as a polynomial in `u`.
    pub fn z_coeff(&self, a: usize) -> PolyZU {
        Self::normalized(vec![self.coeffs.get(a).cloned().unwrap_or_default()])
    }

    /// The constant part in `u` of the `z^a` coefficient; exact once `u` has been substituted.
    pub fn z_coeff_rational(&self, a: usize) -> Rational {
        self.coeff(a, 0)
    }

    pub fn add(&self, other: &PolyZU) -> PolyZU {
        let na = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..na)
            .map(|a| {
                let nb = self.coeffs.get(a).map_or(0, Vec::len).max(other.coeffs.get(a).map_or(0, Vec::len));
                (0..nb).map(|b| self.coeff(a, b) + other.coeff(a, b)).collect()
            })
            .collect();
        Self::normalized(coeffs)
    }

    pub fn neg(&self) -> PolyZU {
        PolyZU { coeffs: self.coeffs.iter().map(|r| r.iter().map(|c| -c).collect()).collect() }
    }

    pub fn sub(&self, other: &PolyZU) -> PolyZU {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &Rational) -> PolyZU {
        Self::normalized(self.coeffs.iter().map(|r| r.iter().map(|c| c * q).collect()).collect())
    }

    pub fn mul(&self, other: &PolyZU) -> PolyZU {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Vec::<Rational>::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (a1, r1) in self.coeffs.iter().enumerate() {
            for (a2, r2) in other.coeffs.iter().enumerate() {
                if r1.is_empty() || r2.is_empty() {
                    continue;
                }
                let row = &mut coeffs[a1 + a2];
                if row.len() < r1.len() + r2.len() - 1 {
                    row.resize(r1.len() + r2.len() - 1, Rational::zero());
                }
                for (b1, c1) in r1.iter().enumerate() {
                    if c1.is_zero() {
                        continue;
                    }
                    for (b2, c2) in r2.iter().enumerate() {
                        row[b1 + b2] += c1 * c2;
                    }
                }
            }
        }
        Self::normalized(coeffs)
    }

    pub fn pow(&self, e: u32) -> PolyZU {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Substitute a rational value for `u`.
    pub fn subst_u(&self, u: &Rational) -> PolyZU {
        let coeffs = self
            .coeffs
            .iter()
            .map(|r| {
                let v = r.iter().enumerate().fold(Rational::zero(), |acc, (b, c)| acc + c * rat_powi(u, b as i64));
                vec![v]
            })
            .collect();
        Self::normalized(coeffs)
    }

    /// Substitute a rational value for `z`.
    pub fn subst_z(&self, z: &Rational) -> PolyZU {
        let mut acc = PolyZU::zero();
        for (a, r) in self.coeffs.iter().enumerate() {
            let scaled: Vec<Rational> = r.iter().map(|c| c * rat_powi(z, a as i64)).collect();
            acc = acc.add(&Self::normalized(vec![scaled]));
        }
        acc
    }

    /// `u -> -u`
    pub fn negate_u(&self) -> PolyZU {
        PolyZU {
            coeffs: self
                .coeffs
                .iter()
                .map(|r| r.iter().enumerate().map(|(b, c)| if b % 2 == 1 { -c } else { c.clone() }).collect())
                .collect(),
        }
    }
}

impl From<Rational> for PolyZU {
    fn from(q: Rational) -> Self {
        Self::constant(q)
    }
}

impl fmt::Display for PolyZU {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (a, r) in self.coeffs.iter().enumerate() {
            for (b, c) in r.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{c}")?;
                match a {
                    0 => {}
                    1 => write!(f, "*z")?,
                    _ => write!(f, "*z^{a}")?,
                }
                match b {
                    0 => {}
                    1 => write!(f, "*u")?,
                    _ => write!(f, "*u^{b}")?,
                }
            }
        }
        Ok(())
    }
}

/// Square matrix of [`PolyZU`] entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    n: usize,
    entries: Vec<PolyZU>,
}

impl PolyMatrix {
    pub fn zero(n: usize) -> Self {
        PolyMatrix { n, entries: vec![PolyZU::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.set(i, i, PolyZU::one());
        }
        m
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zero(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, PolyZU::constant(Rational::from_integer(x.into())));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// 0-based entry.
    pub fn get(&self, i: usize, j: usize) -> &PolyZU {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: PolyZU) {
        self.entries[i * self.n + j] = p;
    }

    fn zip(&self, other: &PolyMatrix, f: impl Fn(&PolyZU, &PolyZU) -> PolyZU) -> PolyMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        PolyMatrix { n: self.n, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn map(&self, f: impl Fn(&PolyZU) -> PolyZU) -> PolyMatrix {
        PolyMatrix { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    pub fn add(&self, other: &PolyMatrix) -> PolyMatrix {
        self.zip(other, PolyZU::add)
    }

    pub fn sub(&self, other: &PolyMatrix) -> PolyMatrix {
        self.zip(other, PolyZU::sub)
    }

    pub fn scale(&self, p: &PolyZU) -> PolyMatrix {
        self.map(|e| e.mul(p))
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = PolyZU::zero();
                for k in 0..n {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(PolyZU::is_zero)
    }

    /// First nonzero entry in row-major order, 0-based.
    pub fn first_nonzero(&self) -> Option<(usize, usize, &PolyZU)> {
        self.entries.iter().enumerate().find(|(_, e)| !e.is_zero()).map(|(k, e)| (k / self.n, k % self.n, e))
    }

    /// Max absolute row sum, for matrices with constant entries.
    pub fn row_sum_norm(&self) -> Rational {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| num_traits::Signed::abs(&self.get(i, j).coeff(0, 0))).fold(Rational::zero(), |a, b| a + b))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn poly_basics() {
        let p = PolyZU::one().add(&PolyZU::z().mul(&PolyZU::constant(int(16)).add(&PolyZU::u().scale(&int(12)))));
        assert_eq!(p.coeff(1, 1), int(12));
        assert_eq!(p.z_degree(), Some(1));
        assert_eq!(p.u_degree(), Some(1));
        assert_eq!(p.to_string(), "1 + 16*z + 12*z*u");
        assert_eq!(p.subst_u(&rat(1, 2)).coeff(1, 0), int(22));
        assert_eq!(p.negate_u().coeff(1, 1), int(-12));
        assert!(p.sub(&p).is_zero());
        let one_minus_u = PolyZU::one().sub(&PolyZU::u());
        assert_eq!(one_minus_u.pow(3).coeff(0, 2), int(3));
    }

    #[test]
    fn matrix_product() {
        let a = PolyMatrix::from_integers(&[vec![1, 2], vec![3, 4]]);
        let b = a.mul(&PolyMatrix::identity(2));
        assert_eq!(a, b);
        let sq = a.mul(&a);
        assert_eq!(sq.get(0, 0).coeff(0, 0), int(7));
        assert_eq!(sq.get(1, 1).coeff(0, 0), int(22));
        assert_eq!(a.row_sum_norm(), int(7));
        assert_eq!(a.sub(&a).first_nonzero(), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn poly() -> impl Strategy<Value = PolyZU> {
            proptest::collection::vec((0usize..3, 0usize..3, -9i64..9), 0..5).prop_map(|ts| {
                ts.into_iter().fold(PolyZU::zero(), |acc, (a, b, c)| acc.add(&PolyZU::monomial(int(c), a, b)))
            })
        }

        proptest! {
            #[test]
            fn ring_axioms(a in poly(), b in poly(), c in poly()) {
                prop_assert_eq!(a.mul(&b), b.mul(&a));
                prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
                prop_assert_eq!(a.mul(&b).negate_u(), a.negate_u().mul(&b.negate_u()));
            }

            #[test]
            fn substitution_is_a_homomorphism(a in poly(), b in poly(), n in -5i64..5, d in 1i64..5) {
                let q = rat(n, d);
                prop_assert_eq!(a.mul(&b).subst_u(&q), a.subst_u(&q).mul(&b.subst_u(&q)));
                prop_assert_eq!(a.add(&b).subst_z(&q), a.subst_z(&q).add(&b.subst_z(&q)));
            }
        }
    }
}
