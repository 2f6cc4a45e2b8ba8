//! Registry of the known systems and families with their frames, parameter
//! metadata and the parameter choices that reduce a family to a member.

mod entries;
mod reduce;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{derive_fg, ClassifyError};
use crate::config::Tolerances;
use crate::expr::{parse_with, Expr, FnDef, FnTable, ParseContext, ParseError};
use crate::frames::{Delta, Frame, FrameError, ParamSpec, SystemSpec};

pub use reduce::{reduce, reductions, Certificate, Reduction};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog key `{0}`")]
    UnknownKey(String),
    #[error("parameter `{name}`: {reason}")]
    ParamViolation { name: String, reason: String },
    #[error("`{0}` is an evolution system, not of the form u_xt = F, v_xt = G")]
    NotHyperbolic(String),
    #[error("reduction {corollary} -> {target} does not reproduce the target: {detail}")]
    CertificateFailure { corollary: String, target: String, detail: String },
    #[error("no reduction {0} -> {1} is registered")]
    UnknownReduction(String, String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    Example,
    Corollary,
    /// Evolution system kept for its frame; `get` refuses it.
    EvolutionReference,
    /// Not from the classification; exercises the solver.
    SolverFixture,
}

/// Curvature sign of an entry: fixed, or chosen at `get` time (default given).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaRule {
    Fixed(Delta),
    Either(Delta),
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParamInfo {
    pub name: &'static str,
    pub default: f64,
    pub nonzero: bool,
    /// When nonempty, the only admissible values.
    #[serde(skip_serializing_if = "<[f64]>::is_empty")]
    pub allowed: &'static [f64],
}

impl ParamInfo {
    fn check(&self, value: f64) -> Result<(), CatalogError> {
        let violation = |reason: String| CatalogError::ParamViolation { name: self.name.into(), reason };
        if !value.is_finite() {
            return Err(violation("value is not finite".into()));
        }
        if self.nonzero && value == 0.0 {
            return Err(violation("must be nonzero".into()));
        }
        if !self.allowed.is_empty() && !self.allowed.contains(&value) {
            return Err(violation(format!("must be one of {:?}", self.allowed)));
        }
        Ok(())
    }

    fn spec(&self) -> ParamSpec {
        ParamSpec { exclusions: if self.nonzero { vec![0.0] } else { Vec::new() }, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FunctionInfo {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub body: &'static str,
    /// Replaceable at `get` time.
    pub user: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum SystemForm {
    Given {
        #[serde(rename = "F")]
        f: &'static str,
        #[serde(rename = "G")]
        g: &'static str,
    },
    /// `(F, G)` solved from the frame; the closed form on record does not
    /// satisfy the structure equations and is kept for comparison only.
    Derived {
        #[serde(rename = "printed_F")]
        printed_f: &'static str,
        #[serde(rename = "printed_G")]
        printed_g: &'static str,
    },
    Evolution { u_t: &'static str, v_t: &'static str },
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub key: &'static str,
    pub name: &'static str,
    pub kind: EntryKind,
    pub delta: DeltaRule,
    pub params: &'static [ParamInfo],
    pub functions: &'static [FunctionInfo],
    pub system: SystemForm,
    pub frame: [[&'static str; 2]; 3],
    /// Expressions that must have a nonzero witness, with the reason.
    pub conditions: &'static [(&'static str, &'static str)],
    /// Default characteristic data: `u(x,0)`, `v(x,0)`, `u(0,t)`, `v(0,t)`.
    pub data: [&'static str; 4],
}

/// Parameter values, free parameters, curvature sign and function bodies
/// that replace an entry's defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub params: BTreeMap<String, f64>,
    pub free: BTreeSet<String>,
    pub delta: Option<Delta>,
    pub functions: BTreeMap<String, FnDef>,
}

impl Overrides {
    pub fn param(mut self, name: &str, value: f64) -> Overrides {
        self.params.insert(name.into(), value);
        self
    }

    pub fn free(mut self, name: &str) -> Overrides {
        self.free.insert(name.into());
        self
    }

    pub fn delta(mut self, delta: Delta) -> Overrides {
        self.delta = Some(delta);
        self
    }

    pub fn function(mut self, name: &str, args: &[&str], body: &str) -> Overrides {
        self.functions.insert(
            name.into(),
            FnDef { args: args.iter().map(|s| s.to_string()).collect(), body: body.into() },
        );
        self
    }
}

pub fn entries() -> &'static [CatalogEntry] {
    entries::ENTRIES
}

pub fn keys() -> impl Iterator<Item = &'static str> {
    entries().iter().map(|e| e.key)
}

pub fn entry(key: &str) -> Result<&'static CatalogEntry, CatalogError> {
    entries()
        .iter()
        .find(|e| e.key == key)
        .ok_or_else(|| CatalogError::UnknownKey(key.to_string()))
}

/// Instantiate a hyperbolic entry.
pub fn get(key: &str, ov: &Overrides) -> Result<(SystemSpec, Frame), CatalogError> {
    entry(key)?.instantiate(ov)
}

struct Bound {
    delta: Delta,
    params: BTreeMap<String, ParamSpec>,
    functions: FnTable,
    ctx: ParseContext,
}

impl CatalogEntry {
    pub fn is_hyperbolic(&self) -> bool {
        !matches!(self.system, SystemForm::Evolution { .. })
    }

    pub fn default_delta(&self) -> Delta {
        match self.delta {
            DeltaRule::Fixed(d) | DeltaRule::Either(d) => d,
        }
    }

    fn bind(&self, ov: &Overrides) -> Result<Bound, CatalogError> {
        let delta = match (self.delta, ov.delta) {
            (DeltaRule::Fixed(d), Some(o)) if o != d => {
                return Err(CatalogError::ParamViolation {
                    name: "delta".into(),
                    reason: format!("`{}` is registered with delta = {d}", self.key),
                })
            }
            (DeltaRule::Fixed(d), _) => d,
            (DeltaRule::Either(d), o) => o.unwrap_or(d),
        };
        for name in ov.params.keys().chain(&ov.free) {
            if !self.params.iter().any(|p| p.name == name) {
                return Err(CatalogError::ParamViolation { name: name.clone(), reason: "unknown parameter".into() });
            }
        }
        let mut params = BTreeMap::new();
        for p in self.params {
            let mut spec = p.spec();
            if ov.free.contains(p.name) {
                if !p.allowed.is_empty() {
                    return Err(CatalogError::ParamViolation {
                        name: p.name.into(),
                        reason: "takes discrete values and cannot be free".into(),
                    });
                }
                spec.free = true;
            } else {
                let value = ov.params.get(p.name).copied().unwrap_or(p.default);
                p.check(value)?;
                spec.value = Some(value);
            }
            params.insert(p.name.to_string(), spec);
        }

        let mut defs = BTreeMap::new();
        for f in self.functions {
            let args = f.args.iter().map(|s| s.to_string()).collect();
            defs.insert(f.name.to_string(), FnDef { args, body: f.body.to_string() });
        }
        for (name, def) in &ov.functions {
            match self.functions.iter().find(|f| f.name == name) {
                Some(f) if f.user && f.args.len() == def.args.len() => {
                    defs.insert(name.clone(), def.clone());
                }
                _ => {
                    return Err(CatalogError::ParamViolation {
                        name: name.clone(),
                        reason: "not a replaceable function of this entry, or wrong arity".into(),
                    })
                }
            }
        }
        let functions = FnTable::from_definitions(&defs)?;
        let mut names: BTreeSet<String> = params.keys().cloned().collect();
        names.insert("delta".into());
        let ctx = ParseContext { params: Some(names), functions: Some(functions.arities()), args: Vec::new() };
        Ok(Bound { delta, params, functions, ctx })
    }

    fn parse_bound(&self, text: &str, b: &Bound) -> Result<Expr, CatalogError> {
        let sign = BTreeMap::from([("delta".to_string(), b.delta.sign())]);
        Ok(parse_with(text, &b.ctx)?.bind_params(&sign))
    }

    fn frame_bound(&self, b: &Bound) -> Result<Frame, CatalogError> {
        let mut rows = Vec::new();
        for row in &self.frame {
            rows.push([self.parse_bound(row[0], b)?, self.parse_bound(row[1], b)?]);
        }
        Ok(Frame::new(rows.try_into().unwrap()))
    }

    /// The frame alone; available for every entry, evolution ones included.
    pub fn frame_with(&self, ov: &Overrides) -> Result<(Frame, SystemSpec), CatalogError> {
        let b = self.bind(ov)?;
        let fr = self.frame_bound(&b)?;
        let shell = SystemSpec {
            label: self.key.into(),
            delta: b.delta,
            f: Expr::zero(),
            g: Expr::zero(),
            params: b.params,
            functions: b.functions,
        };
        Ok((fr, shell))
    }

    pub fn instantiate(&self, ov: &Overrides) -> Result<(SystemSpec, Frame), CatalogError> {
        let b = self.bind(ov)?;
        let fr = self.frame_bound(&b)?;
        let mut sys = SystemSpec {
            label: self.key.into(),
            delta: b.delta,
            f: Expr::zero(),
            g: Expr::zero(),
            params: b.params.clone(),
            functions: b.functions.clone(),
        };
        let ctx = sys.context(&Tolerances::default())?;
        for (expr, reason) in self.conditions {
            let e = ctx.prepare(&self.parse_bound(expr, &b)?);
            if ctx.witness_nonzero(&[e]).is_none() {
                return Err(CatalogError::ParamViolation { name: expr.to_string(), reason: reason.to_string() });
            }
        }
        match self.system {
            SystemForm::Given { f, g } => {
                sys.f = self.parse_bound(f, &b)?;
                sys.g = self.parse_bound(g, &b)?;
            }
            SystemForm::Derived { .. } => {
                let d = derive_fg(&fr, b.delta, &ctx)?;
                sys.f = d.f;
                sys.g = d.g;
            }
            SystemForm::Evolution { .. } => return Err(CatalogError::NotHyperbolic(self.key.into())),
        }
        Ok((sys, fr))
    }

    /// The closed form on record for entries whose `(F, G)` are derived.
    pub fn printed_system(&self, ov: &Overrides) -> Result<Option<(Expr, Expr)>, CatalogError> {
        match self.system {
            SystemForm::Derived { printed_f, printed_g } => {
                let b = self.bind(ov)?;
                Ok(Some((self.parse_bound(printed_f, &b)?, self.parse_bound(printed_g, &b)?)))
            }
            _ => Ok(None),
        }
    }

    /// Random admissible parameter values (and sign, when selectable).
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Overrides {
        let mut ov = Overrides::default();
        for p in self.params {
            let value = if !p.allowed.is_empty() {
                p.allowed[rng.gen_range(0..p.allowed.len())]
            } else if p.nonzero {
                let m = rng.gen_range(0.5..1.5);
                if rng.gen_bool(0.5) {
                    m
                } else {
                    -m
                }
            } else {
                rng.gen_range(-1.5..1.5)
            };
            ov.params.insert(p.name.into(), value);
        }
        if let DeltaRule::Either(_) = self.delta {
            ov.delta = Some(if rng.gen_bool(0.5) { Delta::Pss } else { Delta::Ss });
        }
        ov
    }
}
