use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Context, Delta, Frame, FrameError, SystemSpec};
use crate::config::Tolerances;
use crate::expr::{Expr, ExprError, Sym, Witness, ZeroReport};

/// Longest residual text copied into a report.
const MAX_RESIDUAL_TEXT: usize = 4000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryCheck {
    pub entry: String,
    pub passed: bool,
    /// Variables the entry depends on but must not.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depends_on: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: String,
    pub description: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<EntryCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<ZeroReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Condition {
    fn new(id: &str, description: &str, passed: bool) -> Condition {
        Condition {
            id: id.into(),
            description: description.into(),
            passed,
            entries: Vec::new(),
            check: None,
            residual: None,
            witness: None,
            note: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub label: String,
    pub delta: Delta,
    pub passed: bool,
    pub params: BTreeMap<String, f64>,
    pub free_params: Vec<String>,
    pub conditions: Vec<Condition>,
    pub tolerances: Tolerances,
}

impl VerificationReport {
    pub fn condition(&self, id: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.id == id)
    }
}

/// Column-dependency check on an already prepared frame: `f_i1` must not
/// depend on `u, v` and `f_i2` must not depend on `ux, vx`.
pub fn check_dependencies(fr: &Frame, ctx: &Context) -> Result<Vec<EntryCheck>, FrameError> {
    let mut out = Vec::new();
    for (i, j, e) in fr.entries() {
        let forbidden = if j == 0 { [Sym::U, Sym::V] } else { [Sym::Ux, Sym::Vx] };
        let mut depends_on = Vec::new();
        for s in forbidden {
            if !e.depends_on(&s) {
                continue;
            }
            if !ctx.is_zero(&e.diff(&s)?)? {
                depends_on.push(s.name());
            }
        }
        out.push(EntryCheck {
            entry: Frame::entry_name(i, j),
            passed: depends_on.is_empty(),
            depends_on,
        });
    }
    Ok(out)
}

/// The three 2x2 minors of the Jacobian of `(f11, f21, f31)` in `(ux, vx)`.
pub fn jacobian_minors(fr: &Frame) -> Result<[Expr; 3], ExprError> {
    let mut d = Vec::new();
    for i in 0..3 {
        d.push([fr.f[i][0].diff(&Sym::Ux)?, fr.f[i][0].diff(&Sym::Vx)?]);
    }
    let minor = |i: usize, k: usize| &d[i][0] * &d[k][1] - &d[i][1] * &d[k][0];
    Ok([minor(0, 1), minor(0, 2), minor(1, 2)])
}

/// `f11 f22 - f12 f21`, the coefficient of `omega_1 ^ omega_2`.
pub fn nondegeneracy(fr: &Frame) -> Expr {
    (&fr.f[0][0] * &fr.f[1][1] - &fr.f[0][1] * &fr.f[1][0]).simplify()
}

fn minor_square_sum(fr: &Frame) -> Result<Expr, ExprError> {
    let m = jacobian_minors(fr)?;
    Ok(m.iter().map(|x| x.powi(2)).sum::<Expr>().simplify())
}

/// A sample point where both the Jacobian-minor sum and the
/// nondegeneracy coefficient are at least the witness threshold.
pub fn regularity_witness(fr: &Frame, ctx: &Context) -> Result<Option<Witness>, FrameError> {
    let exprs = [minor_square_sum(fr)?, nondegeneracy(fr)];
    Ok(ctx.witness_nonzero(&exprs))
}

/// Residual `R_i = -f_i1,ux F - f_i1,vx G + rhs_i`, split into its parts.
#[derive(Clone, Debug)]
pub struct ResidualTerms {
    pub coef_f: Expr,
    pub coef_g: Expr,
    pub rhs: Expr,
}

impl ResidualTerms {
    pub fn assemble(&self, f: &Expr, g: &Expr) -> Expr {
        Expr::add(vec![
            Expr::neg_of(&self.coef_f * f),
            Expr::neg_of(&self.coef_g * g),
            self.rhs.clone(),
        ])
    }
}

pub fn residual_terms(fr: &Frame, delta: Delta) -> Result<[ResidualTerms; 3], ExprError> {
    let f = &fr.f;
    let d = delta.expr();
    let quadratic = [
        -(&f[2][0] * &f[1][1]) + &f[2][1] * &f[1][0],
        -(&f[0][0] * &f[2][1]) + &f[0][1] * &f[2][0],
        &d * (-(&f[0][0] * &f[1][1]) + &f[0][1] * &f[1][0]),
    ];
    let mut out = Vec::with_capacity(3);
    for (i, q) in quadratic.into_iter().enumerate() {
        let transport = f[i][1].diff(&Sym::U)? * Expr::ux() + f[i][1].diff(&Sym::V)? * Expr::vx();
        out.push(ResidualTerms {
            coef_f: f[i][0].diff(&Sym::Ux)?,
            coef_g: f[i][0].diff(&Sym::Vx)?,
            rhs: transport + q,
        });
    }
    Ok(out.try_into().unwrap())
}

/// The three structure-equation residuals with `u_xt -> F`, `v_xt -> G`.
pub fn structure_residuals(f: &Expr, g: &Expr, fr: &Frame, delta: Delta) -> Result<[Expr; 3], ExprError> {
    let terms = residual_terms(fr, delta)?;
    Ok(std::array::from_fn(|i| terms[i].assemble(f, g)))
}

/// First fundamental form `(g11, g12, g22)` of `omega_1^2 + omega_2^2`.
pub fn metric(fr: &Frame) -> [Expr; 3] {
    let f = &fr.f;
    [
        (f[0][0].powi(2) + f[1][0].powi(2)).simplify(),
        (&f[0][0] * &f[0][1] + &f[1][0] * &f[1][1]).simplify(),
        (f[0][1].powi(2) + f[1][1].powi(2)).simplify(),
    ]
}

/// At least one of `F_u, F_v, G_u, G_v` is not identically zero.
pub fn genericity(sys: &SystemSpec, ctx: &Context) -> Result<bool, FrameError> {
    for e in [&sys.f, &sys.g] {
        let e = ctx.prepare(e);
        for s in [Sym::U, Sym::V] {
            if e.depends_on(&s) && !ctx.is_zero(&e.diff(&s)?)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn truncated(e: &Expr) -> String {
    let mut s = e.to_string();
    if s.len() > MAX_RESIDUAL_TEXT {
        let cut = (0..=MAX_RESIDUAL_TEXT).rev().find(|&i| s.is_char_boundary(i)).unwrap_or(0);
        s.truncate(cut);
        s.push_str("...");
    }
    s
}

/// All six conditions of the characterization theorem.
pub fn verify(sys: &SystemSpec, fr: &Frame, tol: &Tolerances) -> Result<VerificationReport, FrameError> {
    let ctx = sys.context(tol)?;
    let frame = ctx.prepare_frame(fr);
    let f = ctx.prepare(&sys.f);
    let g = ctx.prepare(&sys.g);
    let mut conditions = Vec::new();

    let entries = check_dependencies(&frame, &ctx)?;
    let mut c1 = Condition::new("C1", "f_i1 independent of u, v and f_i2 independent of ux, vx", true);
    c1.passed = entries.iter().all(|e| e.passed);
    c1.entries = entries;
    let columns_ok = c1.passed;
    conditions.push(c1);

    let mut c2 = Condition::new("C2", "Jacobian of (f11, f21, f31) in (ux, vx) has a nonzero 2x2 minor", false);
    c2.witness = ctx.witness_nonzero(&[minor_square_sum(&frame)?]);
    c2.passed = c2.witness.is_some();
    conditions.push(c2);

    let names = [
        ("C3", "first structure equation residual vanishes identically"),
        ("C4", "second structure equation residual vanishes identically"),
        ("C5", "third structure equation residual vanishes identically"),
    ];
    if columns_ok {
        let residuals = structure_residuals(&f, &g, &frame, sys.delta)?;
        for ((id, desc), r) in names.iter().zip(residuals) {
            let report = ctx.zero_report(&r)?;
            let mut c = Condition::new(id, desc, report.zero);
            if !report.zero {
                c.residual = Some(truncated(&r.simplify()));
            }
            c.check = Some(report);
            conditions.push(c);
        }
    } else {
        for (id, desc) in names {
            let mut c = Condition::new(id, desc, false);
            c.note = Some("not evaluated: column dependency check failed".into());
            conditions.push(c);
        }
    }

    let mut c6 = Condition::new("C6", "f11 f22 - f12 f21 nonzero", false);
    c6.witness = ctx.witness_nonzero(&[nondegeneracy(&frame)]);
    c6.passed = c6.witness.is_some();
    conditions.push(c6);

    let free_params = sys.params.iter().filter(|(_, p)| p.is_free()).map(|(k, _)| k.clone()).collect();
    Ok(VerificationReport {
        label: sys.label.clone(),
        delta: sys.delta,
        passed: conditions.iter().all(|c| c.passed),
        params: ctx.bound.clone(),
        free_params,
        conditions,
        tolerances: tol.clone(),
    })
}
