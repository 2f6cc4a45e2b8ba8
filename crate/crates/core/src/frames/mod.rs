//! Systems `u_xt = F`, `v_xt = G`, their frames `f_ij`, and the checks that
//! decide whether a frame makes the system describe surfaces of constant
//! curvature `K = -delta`.

mod io;
mod verify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;
use crate::expr::{
    find_witness, parse, zero_test, EvalError, Expr, ExprError, FnTable, Interval, ParseError, SampleBox, Sampler,
    Sym, Witness, ZeroReport,
};

pub use io::SystemFile;
pub use verify::{
    check_dependencies, genericity, jacobian_minors, metric, nondegeneracy, regularity_witness, residual_terms,
    structure_residuals, verify, Condition, EntryCheck, ResidualTerms, VerificationReport,
};

#[derive(Debug, Error)]
pub enum FrameError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("parameter `{name}`: {reason}")]
    Param { name: String, reason: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// `+1` for pseudospherical (`K = -1`), `-1` for spherical (`K = +1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Delta {
    Pss,
    Ss,
}

impl Delta {
    pub fn sign(self) -> f64 {
        match self {
            Delta::Pss => 1.0,
            Delta::Ss => -1.0,
        }
    }

    /// Gaussian curvature of the induced metric.
    pub fn curvature(self) -> f64 {
        -self.sign()
    }

    pub fn flip(self) -> Delta {
        match self {
            Delta::Pss => Delta::Ss,
            Delta::Ss => Delta::Pss,
        }
    }

    pub fn expr(self) -> Expr {
        Expr::constant(self.sign())
    }
}

impl TryFrom<i8> for Delta {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Delta::Pss),
            -1 => Ok(Delta::Ss),
            other => Err(format!("delta must be 1 or -1, got {other}")),
        }
    }
}

impl From<Delta> for i8 {
    fn from(d: Delta) -> i8 {
        d.sign() as i8
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i8::from(*self))
    }
}

/// A named real parameter: bound to a value or free (sampled).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub free: bool,
    /// Values the parameter may not take.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclusions: Vec<f64>,
    /// Sampling range when free (default: the global sample box).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<Interval>,
}

/// Half-width of the gap cut out of the sampling range around an excluded value.
const EXCLUSION_GAP: f64 = 0.05;

impl ParamSpec {
    pub fn bound(value: f64) -> ParamSpec {
        ParamSpec { value: Some(value), ..Default::default() }
    }

    pub fn free() -> ParamSpec {
        ParamSpec { free: true, ..Default::default() }
    }

    pub fn nonzero(mut self) -> ParamSpec {
        self.exclusions.push(0.0);
        self
    }

    pub fn in_range(mut self, lo: f64, hi: f64) -> ParamSpec {
        self.range = Some(Interval::new(lo, hi));
        self
    }

    pub fn is_free(&self) -> bool {
        self.value.is_none()
    }

    pub fn bind(&mut self, value: f64) {
        self.value = Some(value);
        self.free = false;
    }

    pub fn check(&self, name: &str) -> Result<(), FrameError> {
        if let Some(v) = self.value {
            if !v.is_finite() {
                return Err(FrameError::Param { name: name.into(), reason: "value is not finite".into() });
            }
            if let Some(x) = self.exclusions.iter().find(|x| (v - **x).abs() <= 1e-12) {
                return Err(FrameError::Param { name: name.into(), reason: format!("must not equal {x}") });
            }
        }
        Ok(())
    }

    /// Sampling intervals for a free parameter, with exclusions cut out.
    pub fn intervals(&self, default: &[Interval]) -> Vec<Interval> {
        let mut ivs: Vec<Interval> = match self.range {
            Some(r) => vec![r],
            None => default.to_vec(),
        };
        for &x in &self.exclusions {
            ivs = ivs
                .into_iter()
                .flat_map(|iv| {
                    if iv.lo < x + EXCLUSION_GAP && x - EXCLUSION_GAP < iv.hi && iv.width() > 0.0 {
                        let mut parts = Vec::new();
                        if iv.lo < x - EXCLUSION_GAP {
                            parts.push(Interval::new(iv.lo, x - EXCLUSION_GAP));
                        }
                        if x + EXCLUSION_GAP < iv.hi {
                            parts.push(Interval::new(x + EXCLUSION_GAP, iv.hi));
                        }
                        parts
                    } else {
                        vec![iv]
                    }
                })
                .collect();
        }
        ivs
    }
}

/// One hyperbolic system `u_xt = F`, `v_xt = G` with its curvature sign.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub label: String,
    pub delta: Delta,
    pub f: Expr,
    pub g: Expr,
    pub params: BTreeMap<String, ParamSpec>,
    pub functions: FnTable,
}

impl SystemSpec {
    pub fn new(label: &str, delta: Delta, f: Expr, g: Expr) -> SystemSpec {
        SystemSpec {
            label: label.to_string(),
            delta,
            f,
            g,
            params: BTreeMap::new(),
            functions: FnTable::new(),
        }
    }

    pub fn parse(label: &str, delta: Delta, f: &str, g: &str) -> Result<SystemSpec, ParseError> {
        Ok(SystemSpec::new(label, delta, parse(f)?, parse(g)?))
    }

    pub fn with_param(mut self, name: &str, spec: ParamSpec) -> SystemSpec {
        self.params.insert(name.to_string(), spec);
        self
    }

    pub fn bind(&mut self, name: &str, value: f64) -> Result<(), FrameError> {
        let spec = self.params.entry(name.to_string()).or_default();
        spec.bind(value);
        spec.check(name)
    }

    pub fn bound_values(&self) -> BTreeMap<String, f64> {
        self.params
            .iter()
            .filter_map(|(k, p)| p.value.map(|v| (k.clone(), v)))
            .collect()
    }

    /// Evaluation context: bound parameters, sampling box for the free
    /// ones, and the function table.
    pub fn context(&self, tol: &Tolerances) -> Result<Context, FrameError> {
        for (name, p) in &self.params {
            p.check(name)?;
        }
        let mut bx = SampleBox::default();
        for (name, p) in &self.params {
            if p.is_free() {
                let ivs = p.intervals(&bx.default.clone());
                bx = bx.with(Sym::param(name), ivs);
            }
        }
        Ok(Context {
            fns: self.functions.clone(),
            bound: self.bound_values(),
            bx,
            tol: tol.clone(),
        })
    }
}

/// The 3x2 table `f_ij`: `omega_i = f_i1 dx + f_i2 dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub f: [[Expr; 2]; 3],
}

impl Frame {
    pub fn new(f: [[Expr; 2]; 3]) -> Frame {
        Frame { f }
    }

    pub fn parse(rows: [[&str; 2]; 3]) -> Result<Frame, ParseError> {
        let p = |s: &str| parse(s);
        Ok(Frame {
            f: [
                [p(rows[0][0])?, p(rows[0][1])?],
                [p(rows[1][0])?, p(rows[1][1])?],
                [p(rows[2][0])?, p(rows[2][1])?],
            ],
        })
    }

    pub fn zero() -> Frame {
        Frame::new(std::array::from_fn(|_| [Expr::zero(), Expr::zero()]))
    }

    /// Entry `f_{i+1, j+1}`.
    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.f[i][j]
    }

    pub fn entry_name(i: usize, j: usize) -> String {
        format!("f{}{}", i + 1, j + 1)
    }

    pub fn map(&self, mut op: impl FnMut(&Expr) -> Expr) -> Frame {
        Frame::new(std::array::from_fn(|i| [op(&self.f[i][0]), op(&self.f[i][1])]))
    }

    pub fn with_entry(&self, i: usize, j: usize, e: Expr) -> Frame {
        let mut out = self.clone();
        out.f[i][j] = e;
        out
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Expr)> {
        (0..3).flat_map(move |i| (0..2).map(move |j| (i, j, &self.f[i][j])))
    }

    /// Entry-wise simplified copy.
    pub fn simplify(&self) -> Frame {
        self.map(Expr::simplify)
    }
}

/// Bound parameters, sampling box and function table shared by all checks
/// on one system.
#[derive(Clone, Debug)]
pub struct Context {
    pub fns: FnTable,
    pub bound: BTreeMap<String, f64>,
    pub bx: SampleBox,
    pub tol: Tolerances,
}

impl Context {
    pub fn new(tol: &Tolerances) -> Context {
        Context {
            fns: FnTable::new(),
            bound: BTreeMap::new(),
            bx: SampleBox::default(),
            tol: tol.clone(),
        }
    }

    /// Inline closed-form functions, substitute bound parameters, simplify.
    pub fn prepare(&self, e: &Expr) -> Expr {
        self.fns.inline(e).bind_params(&self.bound).simplify()
    }

    pub fn prepare_frame(&self, fr: &Frame) -> Frame {
        fr.map(|e| self.prepare(e))
    }

    pub fn zero_report(&self, e: &Expr) -> Result<ZeroReport, EvalError> {
        zero_test(e, &self.bx, &self.tol.zero, &self.fns)
    }

    pub fn is_zero(&self, e: &Expr) -> Result<bool, EvalError> {
        Ok(self.zero_report(e)?.zero)
    }

    /// A point where every expression in `exprs` has magnitude at least the
    /// witness threshold.
    pub fn witness_nonzero(&self, exprs: &[Expr]) -> Option<Witness> {
        let w = self.tol.witness;
        find_witness(exprs, &self.bx, &self.tol.zero, &self.fns, |vals| vals.iter().all(|v| v.abs() >= w))
    }

    /// Two-point rank test: `a` and `b` count as linearly dependent when
    /// `a(P) b(Q) - b(P) a(Q)` stays below the dependence threshold at every
    /// sampled pair of points.
    pub fn dependent(&self, a: &Expr, b: &Expr) -> bool {
        let mut sampler = Sampler::new([a, b], &self.bx, self.tol.zero.seed ^ 0x5EED);
        let mut pairs = 0;
        let mut attempts = 0;
        while pairs < self.tol.dependence_pairs && attempts < 50 * self.tol.dependence_pairs {
            attempts += 1;
            let (p, q) = (sampler.next_point(), sampler.next_point());
            let vals = (
                a.eval(&p, &self.fns),
                b.eval(&p, &self.fns),
                a.eval(&q, &self.fns),
                b.eval(&q, &self.fns),
            );
            if let (Ok(ap), Ok(bp), Ok(aq), Ok(bq)) = vals {
                pairs += 1;
                if (ap * bq - bp * aq).abs() >= self.tol.dependence {
                    return false;
                }
            }
        }
        true
    }
}
