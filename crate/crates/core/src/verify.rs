//! Exact and numeric checks of the recurrences
//!
//! * forward: `A(z;nu) Y(nu) = T_{1-1/nu} Y(nu-1)`
//! * backward: `Y(nu) = T_{-1} A(z;-nu) T_{-1+1/nu} Y(nu-1)`
//!
//! plus report assembly and parallel sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{CoeffW, ComplexBall, ComplexRational, Rational};
use crate::family::{tail_profile, FamilyIndex, SeriesCache, Truncation, YVector};
use crate::matrix::{dim, t_matrix, DiagSpec, MatrixSet, NuArg, PolyMatrix, ZArg};
use crate::series::{log_branch, ls_add, ls_eval, ls_mul_z, ls_scale, EvalPoint, LogSeries, TailBound};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Recurrence {
    /// `A(z;nu) Y(nu) = T_{1-1/nu} Y(nu-1)`
    Forward,
    /// `Y(nu) = T_{-1} A(z;-nu) T_{-1+1/nu} Y(nu-1)`
    Backward,
}

impl Recurrence {
    pub fn name(self) -> &'static str {
        match self {
            Recurrence::Forward => "forward",
            Recurrence::Backward => "backward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        })
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check_id: String,
    pub params: BTreeMap<String, String>,
    pub status: Status,
    /// Numeric mode only: max-norm of the residual midpoint.
    pub residual: Option<f64>,
    /// Numeric mode only: proven bound the residual must not exceed.
    pub budget: Option<f64>,
    /// Exact mode: exponent interval on which every coefficient was compared.
    pub window: Option<(i64, i64)>,
    pub elapsed: Duration,
    /// Located first failure.
    pub witness: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    fn error(check_id: String, params: BTreeMap<String, String>, e: &Error, elapsed: Duration) -> Self {
        CheckReport { check_id, params, status: Status::Fail, residual: None, budget: None, window: None, elapsed, witness: Some(e.to_string()) }
    }
}

/// Either `T = 2 nu + 40` per `nu`, or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TruncRule {
    Default,
    Fixed(u32),
}

impl TruncRule {
    pub fn resolve(self, idx: &FamilyIndex) -> Result<Truncation> {
        match self {
            TruncRule::Default => Ok(Truncation::default_for(idx.nu())),
            TruncRule::Fixed(t) => Truncation::new(t, idx),
        }
    }
}

/// A range of `nu >= 2` for one `(l, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactCheckSpec {
    l: u8,
    k: u8,
    nu_min: u32,
    nu_max: u32,
    t: TruncRule,
}

impl ExactCheckSpec {
    pub fn new(l: u8, k: u8, nu_min: u32, nu_max: u32, t: TruncRule) -> Result<Self> {
        FamilyIndex::new(l, k, nu_min)?;
        if nu_min < 2 {
            return Err(Error::InvalidArgument(format!("recurrences are checked for nu >= 2, got {nu_min}")));
        }
        if nu_max < nu_min {
            return Err(Error::InvalidArgument(format!("empty nu range {nu_min}..={nu_max}")));
        }
        Ok(ExactCheckSpec { l, k, nu_min, nu_max, t })
    }

    fn points(&self, which: Recurrence) -> Vec<CheckPoint> {
        (self.nu_min..=self.nu_max)
            .map(|nu| CheckPoint::Exact { which, idx: FamilyIndex::new(self.l, self.k, nu).expect("validated"), t: self.t })
            .collect()
    }
}

/// One numeric check at a concrete `z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericCheckSpec {
    idx: FamilyIndex,
    pt: EvalPoint,
    t: TruncRule,
}

impl NumericCheckSpec {
    pub fn new(idx: FamilyIndex, pt: EvalPoint, t: TruncRule) -> Result<Self> {
        if idx.nu() < 2 {
            return Err(Error::InvalidArgument(format!("recurrences are checked for nu >= 2, got {}", idx.nu())));
        }
        t.resolve(&idx)?;
        Ok(NumericCheckSpec { idx, pt, t })
    }
}

/// A single unit of work in a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckPoint {
    Identities { l: u8 },
    Chain { l: u8, nu: u32 },
    Exact { which: Recurrence, idx: FamilyIndex, t: TruncRule },
    Numeric { which: Recurrence, spec: NumericCheckSpec },
}

fn base_params(idx: &FamilyIndex, t: Truncation) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("l".to_string(), idx.l().to_string()),
        ("k".to_string(), idx.k().to_string()),
        ("nu".to_string(), idx.nu().to_string()),
        ("T".to_string(), t.get().to_string()),
    ])
}

fn rational_matrix_part(m: &PolyMatrix, a: usize) -> Vec<Vec<Rational>> {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m.get(i, j).z_coeff_rational(a)).collect()).collect()
}

/// `M Y` for a matrix linear in `z` with rational coefficients.
fn apply(m: &PolyMatrix, y: &[LogSeries]) -> Vec<LogSeries> {
    let m0 = rational_matrix_part(m, 0);
    let m1 = rational_matrix_part(m, 1);
    (0..m.dim())
        .map(|i| {
            let mut acc = LogSeries::zero();
            for (j, yj) in y.iter().enumerate() {
                if !m0[i][j].is_zero() {
                    acc = ls_add(&acc, &ls_scale(&CoeffW::constant(m0[i][j].clone()), yj));
                }
                if !m1[i][j].is_zero() {
                    acc = ls_add(&acc, &ls_mul_z(&ls_scale(&CoeffW::constant(m1[i][j].clone()), yj)));
                }
            }
            acc
        })
        .collect()
}

fn inv(nu: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(nu))
}

/// Left operator, left argument, right operator, right argument of a recurrence.
struct Sides {
    left_op: PolyMatrix,
    right_op: PolyMatrix,
}

fn sides(set: &MatrixSet, which: Recurrence, l: u8, nu: u32, z: &ZArg) -> Result<Sides> {
    let n = dim(l);
    let one = Rational::one();
    let u = inv(nu);
    Ok(match which {
        Recurrence::Forward => Sides {
            left_op: set.a_matrix(l, z, &NuArg::Value(nu as i64))?,
            right_op: t_matrix(&DiagSpec::constant(n, &one - &u)),
        },
        Recurrence::Backward => Sides {
            left_op: PolyMatrix::identity(n),
            right_op: t_matrix(&DiagSpec::constant(n, -&one))
                .mul(&set.a_matrix(l, z, &NuArg::Value(-(nu as i64)))?)
                .mul(&t_matrix(&DiagSpec::constant(n, -&one + &u))),
        },
    })
}

fn ys(cache: &SeriesCache, idx: FamilyIndex, t: Truncation) -> Result<(std::sync::Arc<YVector>, std::sync::Arc<YVector>)> {
    Ok((cache.y(idx, t)?, cache.y(idx.with_nu(idx.nu() - 1), t)?))
}

fn exact_check(set: &MatrixSet, cache: &SeriesCache, which: Recurrence, idx: FamilyIndex, t: Truncation) -> Result<(Option<String>, (i64, i64))> {
    let (y_nu, y_prev) = ys(cache, idx, t)?;
    let s = sides(set, which, idx.l(), idx.nu(), &ZArg::Symbolic)?;
    let lhs = apply(&s.left_op, y_nu.entries());
    let rhs = apply(&s.right_op, y_prev.entries());
    let lo = -(t.get() as i64) + 1;
    let mut hi = lo;
    let mut witness = None;
    for (i, (a, b)) in lhs.iter().zip(&rhs).enumerate() {
        hi = hi.max(a.e_max()).max(b.e_max());
        let d = a.sub(b);
        if let Some(from) = d.exact_from() {
            debug_assert!(from <= lo, "comparison window starts above {lo}");
        }
        if witness.is_none() {
            witness = d.terms().find(|(_, e, c)| *e >= lo && !c.is_zero()).map(|(m, e, c)| {
                format!("entry {}: coefficient of log^{m} z^{e} is {c}", i + 1)
            });
        }
    }
    Ok((witness, (lo, hi)))
}

/// Numeric residual and budget.
fn numeric_check(set: &MatrixSet, cache: &SeriesCache, which: Recurrence, spec: &NumericCheckSpec) -> Result<(f64, f64)> {
    let idx = spec.idx;
    let t = spec.t.resolve(&idx)?;
    let pt = &spec.pt;
    let prec = pt.prec();
    let (y_nu, y_prev) = ys(cache, idx, t)?;
    let z_abs = pt.abs_lower();
    let log_abs = log_branch(pt.z(), prec)?.upper_abs_f64();
    let profile = tail_profile(idx);
    let eval_side = |y: &YVector| -> Result<Vec<ComplexBall>> {
        y.entries()
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let tail = profile.entry_tail_bound(idx.l(), y.idx().nu(), t, j as u32, z_abs, log_abs)?;
                Ok(ls_eval(s, pt, TailBound::new(tail)?))
            })
            .collect()
    };
    let left_vals = eval_side(&y_nu)?;
    let right_vals = eval_side(&y_prev)?;
    let s = sides(set, which, idx.l(), idx.nu(), &ZArg::Symbolic)?;
    let z_val = pt.z();
    let instantiate = |m: &PolyMatrix| -> Vec<Vec<ComplexRational>> {
        let m0 = rational_matrix_part(m, 0);
        let m1 = rational_matrix_part(m, 1);
        m0.iter()
            .zip(&m1)
            .map(|(r0, r1)| r0.iter().zip(r1).map(|(a, b)| ComplexRational::real(a.clone()).add(&z_val.scale(b))).collect())
            .collect()
    };
    let combine = |m: &[Vec<ComplexRational>], v: &[ComplexBall]| -> Vec<ComplexBall> {
        m.iter()
            .map(|row| {
                row.iter().zip(v).fold(ComplexBall::zero(prec), |acc, (a, x)| if a.is_zero() { acc } else { acc.add(&x.mul(&a.to_ball(prec))) })
            })
            .collect()
    };
    let lhs = combine(&instantiate(&s.left_op), &left_vals);
    let rhs = combine(&instantiate(&s.right_op), &right_vals);
    let mut residual: f64 = 0.0;
    let mut budget: f64 = 0.0;
    for (a, b) in lhs.iter().zip(&rhs) {
        let d = a.sub(b);
        residual = residual.max(d.mid_abs_f64());
        budget = budget.max(d.rad_f64());
    }
    Ok((residual, budget))
}

fn z_label(z: &ComplexRational) -> String {
    z.to_string()
}

/// Runs one check point against `set`.
pub fn run_point(set: &MatrixSet, cache: &SeriesCache, point: &CheckPoint) -> Vec<CheckReport> {
    let start = Instant::now();
    match point {
        CheckPoint::Identities { l } => {
            let params = BTreeMap::from([("l".to_string(), l.to_string())]);
            match set.check_identities(*l) {
                Ok(r) => r
                    .checks
                    .iter()
                    .map(|c| CheckReport {
                        check_id: format!("identity.{}.l{l}", c.kind.name()),
                        params: params.clone(),
                        status: if c.pass { Status::Pass } else { Status::Fail },
                        residual: None,
                        budget: None,
                        window: None,
                        elapsed: start.elapsed(),
                        witness: c.witness.clone(),
                    })
                    .collect(),
                Err(e) => vec![CheckReport::error(format!("identity.l{l}"), params, &e, start.elapsed())],
            }
        }
        CheckPoint::Chain { l, nu } => {
            let params = BTreeMap::from([("l".to_string(), l.to_string()), ("nu".to_string(), nu.to_string())]);
            let id = format!("chain.exact.l{l}.nu{nu}");
            match set.verify_chain(*l, *nu as i64) {
                Ok(w) => vec![CheckReport {
                    check_id: id,
                    params,
                    status: if w.is_none() { Status::Pass } else { Status::Fail },
                    residual: None,
                    budget: None,
                    window: None,
                    elapsed: start.elapsed(),
                    witness: w,
                }],
                Err(e) => vec![CheckReport::error(id, params, &e, start.elapsed())],
            }
        }
        CheckPoint::Exact { which, idx, t } => {
            let id = format!("{}.exact.l{}.k{}.nu{}", which.name(), idx.l(), idx.k(), idx.nu());
            let outcome = t.resolve(idx).and_then(|tt| Ok((tt, exact_check(set, cache, *which, *idx, tt)?)));
            match outcome {
                Ok((tt, (witness, window))) => vec![CheckReport {
                    check_id: id,
                    params: base_params(idx, tt),
                    status: if witness.is_none() && window.0 <= window.1 { Status::Pass } else { Status::Fail },
                    residual: None,
                    budget: None,
                    window: Some(window),
                    elapsed: start.elapsed(),
                    witness,
                }],
                Err(e) => {
                    let params = base_params(idx, Truncation::default_for(idx.nu()));
                    vec![CheckReport::error(id, params, &e, start.elapsed())]
                }
            }
        }
        CheckPoint::Numeric { which, spec } => {
            let idx = spec.idx;
            let id = format!("{}.numeric.l{}.k{}.nu{}.z{}", which.name(), idx.l(), idx.k(), idx.nu(), z_label(spec.pt.z()));
            let tt = spec.t.resolve(&idx).unwrap_or_else(|_| Truncation::default_for(idx.nu()));
            let mut params = base_params(&idx, tt);
            params.insert("z".into(), z_label(spec.pt.z()));
            params.insert("prec".into(), spec.pt.prec().bits().to_string());
            match numeric_check(set, cache, *which, spec) {
                Ok((residual, budget)) => {
                    let ok = residual <= budget;
                    vec![CheckReport {
                        check_id: id,
                        params,
                        status: if ok { Status::Pass } else { Status::Fail },
                        residual: Some(residual),
                        budget: Some(budget),
                        window: None,
                        elapsed: start.elapsed(),
                        witness: (!ok).then(|| format!("residual {residual:e} exceeds budget {budget:e}")),
                    }]
                }
                Err(e) => vec![CheckReport::error(id, params, &e, start.elapsed())],
            }
        }
    }
}

pub fn verify_eq16_exact(spec: &ExactCheckSpec) -> Vec<CheckReport> {
    run_all(MatrixSet::standard(), &spec.points(Recurrence::Forward), None)
}

pub fn verify_eq17_exact(spec: &ExactCheckSpec) -> Vec<CheckReport> {
    run_all(MatrixSet::standard(), &spec.points(Recurrence::Backward), None)
}

pub fn verify_numeric(spec: &NumericCheckSpec, which: Recurrence) -> CheckReport {
    let cache = SeriesCache::new();
    let mut r = run_point(MatrixSet::standard(), &cache, &CheckPoint::Numeric { which, spec: spec.clone() });
    r.pop().expect("one report per numeric point")
}

/// What to run, against which matrices, on how many threads.
#[derive(Debug, Clone)]
pub struct SweepConfig<'a> {
    pub points: Vec<CheckPoint>,
    pub matrices: &'a MatrixSet,
    /// `None` uses the global rayon pool.
    pub jobs: Option<usize>,
}

impl<'a> SweepConfig<'a> {
    pub fn new(points: Vec<CheckPoint>) -> Self {
        SweepConfig { points, matrices: MatrixSet::standard(), jobs: None }
    }

    /// Identities for every level, then both recurrences in exact mode for all
    /// `l`, `k` and `nu` in `nu_min..=nu_max`.
    pub fn exact_default(nu_min: u32, nu_max: u32) -> Self {
        let mut points: Vec<CheckPoint> = (0..=2).map(|l| CheckPoint::Identities { l }).collect();
        for which in [Recurrence::Forward, Recurrence::Backward] {
            for l in 0..=2u8 {
                for &k in crate::family::k_set(l).expect("valid level") {
                    let spec = ExactCheckSpec::new(l, k, nu_min, nu_max, TruncRule::Default).expect("valid range");
                    points.extend(spec.points(which));
                }
            }
        }
        SweepConfig::new(points)
    }
}

fn run_all(set: &MatrixSet, points: &[CheckPoint], jobs: Option<usize>) -> Vec<CheckReport> {
    let cache = SeriesCache::new();
    let work = || points.par_iter().flat_map_iter(|p| run_point(set, &cache, p)).collect::<Vec<_>>();
    match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    }
}

/// Runs every point; output order follows `config.points` regardless of `jobs`.
pub fn sweep(config: &SweepConfig<'_>) -> Vec<CheckReport> {
    run_all(config.matrices, &config.points, config.jobs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use crate::exact::Precision;
    use crate::matrix::MatrixId;

    fn point(re: Rational, im: Rational, bits: u32) -> EvalPoint {
        EvalPoint::new(ComplexRational::new(re, im), Precision::new(bits).unwrap()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(ExactCheckSpec::new(0, 1, 1, 3, TruncRule::Default).is_err());
        assert!(ExactCheckSpec::new(0, 5, 2, 3, TruncRule::Default).is_err());
        assert!(ExactCheckSpec::new(0, 1, 4, 3, TruncRule::Default).is_err());
        let idx = FamilyIndex::new(0, 1, 1).unwrap();
        assert!(NumericCheckSpec::new(idx, point(int(2), int(0), 128), TruncRule::Default).is_err());
    }

    #[test]
    fn forward_exact_examples() {
        let r = verify_eq16_exact(&ExactCheckSpec::new(0, 1, 2, 2, TruncRule::Fixed(40)).unwrap());
        assert_eq!(r.len(), 1);
        assert!(r[0].passed(), "{r:?}");
        let (lo, hi) = r[0].window.unwrap();
        assert!(hi - lo + 1 >= 35);
        let r = verify_eq16_exact(&ExactCheckSpec::new(2, 7, 3, 3, TruncRule::Fixed(50)).unwrap());
        assert!(r[0].passed(), "{r:?}");
    }

    #[test]
    fn backward_exact_examples() {
        let r = verify_eq17_exact(&ExactCheckSpec::new(0, 3, 2, 2, TruncRule::Fixed(40)).unwrap());
        assert!(r[0].passed(), "{r:?}");
        let r = verify_eq17_exact(&ExactCheckSpec::new(1, 5, 4, 4, TruncRule::Fixed(50)).unwrap());
        assert!(r[0].passed(), "{r:?}");
    }

    #[test]
    fn backward_then_forward_reproduces_rhs() {
        let set = MatrixSet::standard();
        let idx = FamilyIndex::new(1, 3, 3).unwrap();
        let t = Truncation::default_for(3);
        let prev = build_prev(idx, t);
        let back = sides(set, Recurrence::Backward, 1, 3, &ZArg::Symbolic).unwrap().right_op;
        let fwd = sides(set, Recurrence::Forward, 1, 3, &ZArg::Symbolic).unwrap();
        let lhs = apply(&fwd.left_op.mul(&back), &prev);
        let rhs = apply(&fwd.right_op, &prev);
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!(a.sub(b).is_zero());
        }
    }

    fn build_prev(idx: FamilyIndex, t: Truncation) -> Vec<LogSeries> {
        crate::family::build_y(idx.with_nu(idx.nu() - 1), t).unwrap().entries().to_vec()
    }

    #[test]
    fn mutated_s_fails_with_witness() {
        let set = MatrixSet::standard().perturbed(MatrixId::S { l: 0 }, 0, 1, 1).unwrap();
        let cache = SeriesCache::new();
        let idx = FamilyIndex::new(0, 1, 2).unwrap();
        let r = run_point(&set, &cache, &CheckPoint::Exact { which: Recurrence::Forward, idx, t: TruncRule::Default });
        assert!(!r[0].passed());
        assert!(r[0].witness.as_deref().unwrap().starts_with("entry 1"));
    }

    #[test]
    fn numeric_examples() {
        let idx = FamilyIndex::new(0, 1, 5).unwrap();
        let spec = NumericCheckSpec::new(idx, point(int(2), int(0), 192), TruncRule::Fixed(60)).unwrap();
        let r = verify_numeric(&spec, Recurrence::Forward);
        assert!(r.passed(), "{r:?}");
        assert!(r.residual.unwrap() < 1e-12);
        let idx = FamilyIndex::new(2, 7, 5).unwrap();
        let spec = NumericCheckSpec::new(idx, point(int(-3), int(0), 192), TruncRule::Fixed(60)).unwrap();
        let r = verify_numeric(&spec, Recurrence::Forward);
        assert!(r.passed(), "{r:?}");
        assert!(r.residual.unwrap() <= r.budget.unwrap());
    }

    #[test]
    fn low_precision_reports_budget() {
        let idx = FamilyIndex::new(1, 5, 3).unwrap();
        let spec = NumericCheckSpec::new(idx, point(rat(3, 2), rat(1, 2), 64), TruncRule::Fixed(200)).unwrap();
        let r = verify_numeric(&spec, Recurrence::Backward);
        assert!(r.budget.is_some());
        assert!(r.residual.is_some());
        assert_eq!(r.passed(), r.residual.unwrap() <= r.budget.unwrap());
    }

    #[test]
    fn sweep_basics() {
        assert!(sweep(&SweepConfig::new(Vec::new())).is_empty());
        let mut cfg = SweepConfig::exact_default(2, 3);
        let serial = {
            cfg.jobs = Some(1);
            sweep(&cfg)
        };
        cfg.jobs = Some(4);
        let parallel = sweep(&cfg);
        let ids = |r: &[CheckReport]| r.iter().map(|c| c.check_id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&serial), ids(&parallel));
        assert!(serial.iter().all(CheckReport::passed));
        assert_eq!(serial.len(), 12 + 2 * 12 * 2);
    }

    #[test]
    fn sweep_isolates_faults() {
        let set = MatrixSet::standard().perturbed(MatrixId::V { l: 1, i: 2 }, 2, 1, -1).unwrap();
        let mut cfg = SweepConfig::exact_default(2, 2);
        cfg.matrices = &set;
        let r = sweep(&cfg);
        for c in &r {
            let level1 = c.params.get("l").map(String::as_str) == Some("1");
            if !level1 {
                assert!(c.passed(), "{}", c.check_id);
            }
        }
        assert!(r.iter().any(|c| !c.passed()));
    }
}
