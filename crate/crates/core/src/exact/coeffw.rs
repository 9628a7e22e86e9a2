use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ComplexBall, Precision, Rational, RealBall};

/// A polynomial in the formal symbol `w` (read as `i*pi`) with rational coefficients.
///
/// Index `p` of the coefficient list holds the coefficient of `w^p`. Trailing
/// zeros are always stripped, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CoeffW {
    coeffs: Vec<Rational>,
}

impl CoeffW {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        CoeffW { coeffs }
    }

    pub fn zero() -> Self {
        CoeffW { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The symbol `w` itself.
    pub fn w() -> Self {
        CoeffW { coeffs: vec![Rational::zero(), Rational::one()] }
    }

    pub fn constant(q: Rational) -> Self {
        Self::new(vec![q])
    }

    /// `q * w^p`
    pub fn monomial(q: Rational, p: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); p + 1];
        coeffs[p] = q;
        Self::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in `w`; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, p: usize) -> Rational {
        self.coeffs.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        CoeffW { coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    /// Substitute `w := i*pi` in ball arithmetic.
    pub fn eval(&self, prec: Precision) -> ComplexBall {
        let mut acc = ComplexBall::zero(prec);
        if self.is_zero() {
            return acc;
        }
        if self.coeffs.len() == 1 {
            return ComplexBall::from_real(RealBall::from_rational(&self.coeffs[0], prec));
        }
        let w = ComplexBall::from_real(RealBall::pi(prec)).mul_i();
        // Horner in w
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&w).add(&ComplexBall::from_real(RealBall::from_rational(c, prec)));
        }
        acc
    }

    /// Upper bound on `|c(i*pi)|`.
    pub fn abs_bound(&self) -> f64 {
        let pi_up = std::f64::consts::PI * (1.0 + 1e-15);
        let mut acc = 0.0;
        let mut pw = 1.0;
        for c in &self.coeffs {
            acc += c.abs().to_f64().unwrap_or(f64::INFINITY) * pw;
            pw *= pi_up;
        }
        acc * (1.0 + 1e-14)
    }
}

/// Numeric substitution `w := i*pi` at the given precision.
pub fn coeffw_eval(c: &CoeffW, prec: Precision) -> ComplexBall {
    c.eval(prec)
}

impl From<Rational> for CoeffW {
    fn from(q: Rational) -> Self {
        Self::constant(q)
    }
}

impl Add<&CoeffW> for &CoeffW {
    type Output = CoeffW;
    fn add(self, rhs: &CoeffW) -> CoeffW {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|p| self.coeff(p) + rhs.coeff(p)).collect();
        CoeffW::new(coeffs)
    }
}

impl AddAssign<&CoeffW> for CoeffW {
    fn add_assign(&mut self, rhs: &CoeffW) {
        if rhs.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), Rational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }
}

impl Sub<&CoeffW> for &CoeffW {
    type Output = CoeffW;
    fn sub(self, rhs: &CoeffW) -> CoeffW {
        self + &(-rhs)
    }
}

impl Neg for &CoeffW {
    type Output = CoeffW;
    fn neg(self) -> CoeffW {
        CoeffW { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul<&CoeffW> for &CoeffW {
    type Output = CoeffW;
    fn mul(self, rhs: &CoeffW) -> CoeffW {
        if self.is_zero() || rhs.is_zero() {
            return CoeffW::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        CoeffW::new(coeffs)
    }
}

impl fmt::Display for CoeffW {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match p {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})w")?,
                _ => write!(f, "({c})w^{p}")?,
            }
        }
        Ok(())
    }
}
