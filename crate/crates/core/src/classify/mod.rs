//! Constructive side of the classification: frames with one constant row
//! (`f31`, `f21` or `f11`), the systems they determine, and the functional
//! equation that underlies both families.

mod build;
mod derive;
mod lemma;
mod random;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_with, EvalError, Expr, ExprError, FnDef, FnTable, ParseContext, ParseError};
use crate::frames::{Delta, FrameError, ParamSpec};

pub use build::{build_case1, build_case2, case2_constants, t3_from_t2, Case2Constants};
pub use derive::{compare_printed, derive_fg, printed_case1, printed_case2, Derived, PrintedCheck};
pub use lemma::{lemma2_classify, lemma2_data, lemma2_residual, LemmaCase, LemmaData};
pub use random::{random_case1, random_case2};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("W = g_ux h_vx - g_vx h_ux has no nonzero witness")]
    DegenerateW,
    #[error("p_u and p_v are proportional")]
    ProportionalGradients,
    #[error("no pair of residual equations is solvable for (F, G)")]
    NonInvertible,
    #[error("remaining structure residual is not identically zero: {residual}")]
    ThirdResidualNonzero { residual: String },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Which frame row is the constant `eta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// `f31 = eta`
    T1,
    /// `f21 = eta`
    T2,
    /// `f11 = eta`
    T3,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::T1, Variant::T2, Variant::T3];

    /// Zero-based index of the constant row.
    pub fn constant_row(self) -> usize {
        match self {
            Variant::T1 => 2,
            Variant::T2 => 1,
            Variant::T3 => 0,
        }
    }
}

/// Family (i): frames built from `g, h` in `(ux, vx)` and `phi(a v + b u)`.
#[derive(Clone, Debug)]
pub struct Case1Params {
    pub label: String,
    pub variant: Variant,
    pub delta: Delta,
    pub a: Expr,
    pub b: Expr,
    pub lambda: Expr,
    pub mu: Expr,
    pub eta: Expr,
    pub g: Expr,
    pub h: Expr,
    /// Unary function of `xi`, registered as `phi`.
    pub phi: FnDef,
    pub params: BTreeMap<String, ParamSpec>,
    pub functions: FnTable,
}

/// Family (ii): frames linear in `(ux, vx)` built from `p(u, v)`.
///
/// `(a2, b2)` are the coefficients of the second non-constant row: `f21`
/// for T1, `f31` for T2 and T3.
#[derive(Clone, Debug)]
pub struct Case2Params {
    pub label: String,
    pub variant: Variant,
    pub delta: Delta,
    pub a1: Expr,
    pub b1: Expr,
    pub a2: Expr,
    pub b2: Expr,
    pub eta: Expr,
    /// Function of `(u, v)`, registered as `p`.
    pub p: FnDef,
    pub params: BTreeMap<String, ParamSpec>,
    pub functions: FnTable,
}

/// A number or an expression in the grammar, as accepted in parameter files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    fn to_expr(&self, ctx: &ParseContext) -> Result<Expr, ParseError> {
        match self {
            Scalar::Number(x) => Ok(Expr::constant(*x)),
            Scalar::Text(s) => parse_with(s, ctx),
        }
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Scalar {
        Scalar::Number(x)
    }
}

/// JSON parameter file for the builders; `case` selects the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum ParamsFile {
    #[serde(rename = "1")]
    Case1 {
        #[serde(default)]
        label: Option<String>,
        variant: Variant,
        delta: Delta,
        a: Scalar,
        b: Scalar,
        lambda: Scalar,
        mu: Scalar,
        eta: Scalar,
        g: String,
        h: String,
        phi: FnDef,
        #[serde(default)]
        params: BTreeMap<String, ParamSpec>,
        #[serde(default)]
        functions: BTreeMap<String, FnDef>,
    },
    #[serde(rename = "2")]
    Case2 {
        #[serde(default)]
        label: Option<String>,
        variant: Variant,
        delta: Delta,
        a1: Scalar,
        b1: Scalar,
        a2: Scalar,
        b2: Scalar,
        eta: Scalar,
        p: FnDef,
        #[serde(default)]
        params: BTreeMap<String, ParamSpec>,
        #[serde(default)]
        functions: BTreeMap<String, FnDef>,
    },
}

/// Parsed builder input.
#[derive(Clone, Debug)]
pub enum BuildParams {
    Case1(Case1Params),
    Case2(Case2Params),
}

impl ParamsFile {
    pub fn from_json(text: &str) -> Result<ParamsFile, ClassifyError> {
        serde_json::from_str(text).map_err(|e| ClassifyError::Frame(FrameError::Invalid(e.to_string())))
    }

    pub fn to_params(&self) -> Result<BuildParams, ClassifyError> {
        let context = |params: &BTreeMap<String, ParamSpec>, functions: &FnTable| ParseContext {
            params: Some(params.keys().cloned().collect()),
            functions: Some(functions.arities()),
            args: Vec::new(),
        };
        match self {
            ParamsFile::Case1 { label, variant, delta, a, b, lambda, mu, eta, g, h, phi, params, functions } => {
                let fns = FnTable::from_definitions(functions)?;
                let ctx = context(params, &fns);
                Ok(BuildParams::Case1(Case1Params {
                    label: label.clone().unwrap_or_else(|| format!("case1-{variant:?}")),
                    variant: *variant,
                    delta: *delta,
                    a: a.to_expr(&ctx)?,
                    b: b.to_expr(&ctx)?,
                    lambda: lambda.to_expr(&ctx)?,
                    mu: mu.to_expr(&ctx)?,
                    eta: eta.to_expr(&ctx)?,
                    g: parse_with(g, &ctx)?,
                    h: parse_with(h, &ctx)?,
                    phi: phi.clone(),
                    params: params.clone(),
                    functions: fns,
                }))
            }
            ParamsFile::Case2 { label, variant, delta, a1, b1, a2, b2, eta, p, params, functions } => {
                let fns = FnTable::from_definitions(functions)?;
                let ctx = context(params, &fns);
                Ok(BuildParams::Case2(Case2Params {
                    label: label.clone().unwrap_or_else(|| format!("case2-{variant:?}")),
                    variant: *variant,
                    delta: *delta,
                    a1: a1.to_expr(&ctx)?,
                    b1: b1.to_expr(&ctx)?,
                    a2: a2.to_expr(&ctx)?,
                    b2: b2.to_expr(&ctx)?,
                    eta: eta.to_expr(&ctx)?,
                    p: p.clone(),
                    params: params.clone(),
                    functions: fns,
                }))
            }
        }
    }
}
