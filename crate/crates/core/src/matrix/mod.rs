//! The matrices `S_l`, `V_l(i)`, `T_{n,lambda}` and `A_l(z; nu)`, with exact checks
//! of their structural identities.

pub mod constants;
mod poly;

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use poly::{PolyMatrix, PolyZU};

use crate::error::{Error, Result};
use crate::exact::Rational;
use constants::{S_FIRST_ROWS, V_DISPLAYS};

pub fn dim(l: u8) -> usize {
    4 + 2 * l as usize
}

fn check_l(l: u8) -> Result<()> {
    if l > 2 {
        return Err(Error::InvalidIndex(format!("l must be 0, 1 or 2, got {l}")));
    }
    Ok(())
}

/// Names one of the constant matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixId {
    S { l: u8 },
    V { l: u8, i: u8 },
}

impl MatrixId {
    pub fn l(self) -> u8 {
        match self {
            MatrixId::S { l } | MatrixId::V { l, .. } => l,
        }
    }
}

impl fmt::Display for MatrixId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixId::S { l } => write!(f, "S_{l}"),
            MatrixId::V { l, i } => write!(f, "V_{l}({i})"),
        }
    }
}

/// The full collection of constant matrices with prefactors multiplied through.
///
/// [`MatrixSet::standard`] holds the reference values; [`MatrixSet::perturbed`]
/// yields copies with one entry changed, for fault-injection runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSet {
    s: Vec<Vec<Vec<i64>>>,
    v: Vec<Vec<Vec<Vec<i64>>>>,
}

impl MatrixSet {
    pub fn standard() -> &'static MatrixSet {
        static SET: OnceLock<MatrixSet> = OnceLock::new();
        SET.get_or_init(|| {
            let s = S_FIRST_ROWS
                .iter()
                .map(|row| {
                    let n = row.len();
                    (0..n).map(|i| (0..n).map(|j| if j >= i { row[j - i] } else { 0 }).collect()).collect()
                })
                .collect();
            let v = V_DISPLAYS
                .iter()
                .map(|ds| {
                    ds.iter()
                        .map(|d| d.rows.iter().map(|r| r.iter().map(|x| d.prefactor * x).collect()).collect())
                        .collect()
                })
                .collect();
            MatrixSet { s, v }
        })
    }

    fn table(&self, id: MatrixId) -> Result<&Vec<Vec<i64>>> {
        check_l(id.l())?;
        match id {
            MatrixId::S { l } => Ok(&self.s[l as usize]),
            MatrixId::V { l, i } => self.v[l as usize].get(i as usize).ok_or_else(|| {
                Error::InvalidIndex(format!("V_{l}(i) needs 0 <= i <= {}, got {i}", 1 + l))
            }),
        }
    }

    /// Integer entries of a matrix, 0-based rows.
    pub fn entries(&self, id: MatrixId) -> Result<Vec<Vec<i64>>> {
        self.table(id).cloned()
    }

    pub fn matrix(&self, id: MatrixId) -> Result<PolyMatrix> {
        Ok(PolyMatrix::from_integers(self.table(id)?))
    }

    /// Every matrix of level `l`: `S_l` then `V_l(0..=1+l)`.
    pub fn ids(l: u8) -> Vec<MatrixId> {
        std::iter::once(MatrixId::S { l }).chain((0..=1 + l).map(|i| MatrixId::V { l, i })).collect()
    }

    /// Copy with entry `(row, col)` (0-based) of `id` shifted by `delta`.
    pub fn perturbed(&self, id: MatrixId, row: usize, col: usize, delta: i64) -> Result<MatrixSet> {
        let n = self.table(id)?.len();
        if row >= n || col >= n {
            return Err(Error::InvalidIndex(format!("entry ({row},{col}) outside {n}x{n} matrix {id}")));
        }
        let mut out = self.clone();
        match id {
            MatrixId::S { l } => out.s[l as usize][row][col] += delta,
            MatrixId::V { l, i } => out.v[l as usize][i as usize][row][col] += delta,
        }
        Ok(out)
    }

    /// `A_l(z; nu) = S_l + z sum_{i=0}^{1+l} nu^-i V_l(i)`.
    pub fn a_matrix(&self, l: u8, z: &ZArg, nu: &NuArg) -> Result<PolyMatrix> {
        check_l(l)?;
        let u = match nu {
            NuArg::Symbolic => PolyZU::u(),
            NuArg::NegSymbolic => PolyZU::u().neg(),
            NuArg::Value(0) => return Err(Error::DivisionByZero("A(z; nu) needs nu != 0".into())),
            NuArg::Value(n) => PolyZU::constant(Rational::new(BigInt::one(), BigInt::from(*n))),
        };
        let zp = match z {
            ZArg::Symbolic => PolyZU::z(),
            ZArg::Value(q) => PolyZU::constant(q.clone()),
        };
        let mut sum = PolyMatrix::zero(dim(l));
        for i in 0..=1 + l {
            sum = sum.add(&self.matrix(MatrixId::V { l, i })?.scale(&u.pow(i as u32)));
        }
        Ok(self.matrix(MatrixId::S { l })?.add(&sum.scale(&zp)))
    }

    /// Checks the four structural identities of level `l`.
    pub fn check_identities(&self, l: u8) -> Result<IdentityReport> {
        check_l(l)?;
        let n = dim(l);
        let t = t_matrix(&DiagSpec::constant(n, Rational::from_integer((-1).into())));
        let s = self.matrix(MatrixId::S { l })?;
        let vs = (0..=1 + l).map(|i| self.matrix(MatrixId::V { l, i })).collect::<Result<Vec<_>>>()?;
        let mut checks = Vec::with_capacity(4);

        let a_pos = self.a_matrix(l, &ZArg::Symbolic, &NuArg::Symbolic)?;
        let a_neg = self.a_matrix(l, &ZArg::Symbolic, &NuArg::NegSymbolic)?;
        let lhs = a_neg.mul(&t).mul(&a_pos).sub(&t);
        checks.push(IdentityCheck::from_residual(IdentityKind::InversePair, &lhs, "A(z;-nu) T A(z;nu) - T"));

        let st = s.mul(&t);
        let inv = st.mul(&st).sub(&PolyMatrix::identity(n));
        checks.push(IdentityCheck::from_residual(IdentityKind::Involution, &inv, "(S T)^2 - I"));

        let mut twisted = None;
        for (i, v) in vs.iter().enumerate() {
            let sign = if i % 2 == 0 { Rational::one() } else { -Rational::one() };
            let r = st.mul(v).add(&v.mul(&t).mul(&s).scale(&PolyZU::constant(sign)));
            if !r.is_zero() {
                twisted = Some((r, format!("S T V({i}) + (-1)^{i} V({i}) T S")));
                break;
            }
        }
        checks.push(match twisted {
            Some((r, what)) => IdentityCheck::from_residual(IdentityKind::TwistedCommutation, &r, &what),
            None => IdentityCheck::passed(IdentityKind::TwistedCommutation),
        });

        let mut null = None;
        'outer: for (i, vi) in vs.iter().enumerate() {
            let vit = vi.mul(&t);
            for (k, vk) in vs.iter().enumerate() {
                let r = vit.mul(vk);
                if !r.is_zero() {
                    null = Some((r, format!("V({i}) T V({k})")));
                    break 'outer;
                }
            }
        }
        checks.push(match null {
            Some((r, what)) => IdentityCheck::from_residual(IdentityKind::NullProduct, &r, &what),
            None => IdentityCheck::passed(IdentityKind::NullProduct),
        });

        Ok(IdentityReport { l, checks })
    }

    /// `A(z;nu) T_{-1} A(z;-nu) T_{-1+1/nu} = T_{1-1/nu}` at exact `u = 1/nu`.
    /// Returns the first offending entry on failure.
    pub fn verify_chain(&self, l: u8, nu: i64) -> Result<Option<String>> {
        if nu == 0 {
            return Err(Error::DivisionByZero("chain check needs nu != 0".into()));
        }
        let n = dim(l);
        let u = Rational::new(BigInt::one(), BigInt::from(nu));
        let one = Rational::one();
        let t_m1 = t_matrix(&DiagSpec::constant(n, -&one));
        let a_pos = self.a_matrix(l, &ZArg::Symbolic, &NuArg::Value(nu))?;
        let a_neg = self.a_matrix(l, &ZArg::Symbolic, &NuArg::Value(-nu))?;
        let back = t_m1.mul(&a_neg).mul(&t_matrix(&DiagSpec::constant(n, -&one + &u)));
        let r = a_pos.mul(&back).sub(&t_matrix(&DiagSpec::constant(n, &one - &u)));
        Ok(r.first_nonzero().map(|(i, j, e)| format!("entry ({},{}) = {e}", i + 1, j + 1)))
    }
}

/// First argument of `A`: formal `z`, or a rational value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZArg {
    Symbolic,
    Value(Rational),
}

/// Second argument of `A`: formal `nu` (as `u = 1/nu`), formal `-nu`, or an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuArg {
    Symbolic,
    NegSymbolic,
    Value(i64),
}

/// `diag(1, lambda, ..., lambda^(n-1))` with `lambda` a polynomial in `u` (or `z`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagSpec {
    pub n: usize,
    pub lambda: PolyZU,
}

impl DiagSpec {
    pub fn constant(n: usize, lambda: Rational) -> Self {
        DiagSpec { n, lambda: PolyZU::constant(lambda) }
    }

    pub fn poly(n: usize, lambda: PolyZU) -> Self {
        DiagSpec { n, lambda }
    }
}

pub fn t_matrix(spec: &DiagSpec) -> PolyMatrix {
    let mut m = PolyMatrix::zero(spec.n);
    let mut p = PolyZU::one();
    for i in 0..spec.n {
        m.set(i, i, p.clone());
        p = p.mul(&spec.lambda);
    }
    m
}

pub fn s_matrix(l: u8) -> Result<PolyMatrix> {
    MatrixSet::standard().matrix(MatrixId::S { l })
}

pub fn v_matrix(l: u8, i: u8) -> Result<PolyMatrix> {
    MatrixSet::standard().matrix(MatrixId::V { l, i })
}

pub fn a_matrix(l: u8, z: &ZArg, nu: &NuArg) -> Result<PolyMatrix> {
    MatrixSet::standard().a_matrix(l, z, nu)
}

pub fn check_identities(l: u8) -> Result<IdentityReport> {
    MatrixSet::standard().check_identities(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityKind {
    /// `A(z;-nu) T_{-1} A(z;nu) = T_{-1}` in `Q[z,u]`
    InversePair,
    /// `(S T_{-1})^2 = I`
    Involution,
    /// `S T_{-1} V(i) = -(-1)^i V(i) T_{-1} S`
    TwistedCommutation,
    /// `V(i) T_{-1} V(k) = 0`
    NullProduct,
}

impl IdentityKind {
    pub fn name(self) -> &'static str {
        match self {
            IdentityKind::InversePair => "inverse_pair",
            IdentityKind::Involution => "involution",
            IdentityKind::TwistedCommutation => "twisted_commutation",
            IdentityKind::NullProduct => "null_product",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub kind: IdentityKind,
    pub pass: bool,
    /// First offending entry, 1-based.
    pub witness: Option<String>,
}

impl IdentityCheck {
    fn passed(kind: IdentityKind) -> Self {
        IdentityCheck { kind, pass: true, witness: None }
    }

    fn from_residual(kind: IdentityKind, r: &PolyMatrix, what: &str) -> Self {
        match r.first_nonzero() {
            None => Self::passed(kind),
            Some((i, j, e)) => IdentityCheck {
                kind,
                pass: false,
                witness: Some(format!("{what}: entry ({},{}) = {e}", i + 1, j + 1)),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub l: u8,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn column_is_zero(rows: &[Vec<i64>], c: usize) -> bool {
    rows.iter().all(|r| r[c].is_zero())
}

/// Number of all-zero columns at the right edge.
pub fn trailing_zero_columns(rows: &[Vec<i64>]) -> usize {
    let n = rows.first().map_or(0, Vec::len);
    (0..n).rev().take_while(|&c| column_is_zero(rows, c)).count()
}
