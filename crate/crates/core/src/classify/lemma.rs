use serde::Serialize;

use super::{ClassifyError, Variant};
use crate::expr::{Expr, Sym};
use crate::frames::{Context, Delta, Frame};

/// Data of the functional equation
/// `psi0_u ux + psi0_v vx - eps rho1 psi2 + eps rho2 psi1 = 0`
/// with `psi_k = psi_k(u, v)` and `rho_k = rho_k(ux, vx)`.
#[derive(Clone, Debug)]
pub struct LemmaData {
    pub psi: [Expr; 3],
    pub rho: [Expr; 2],
    pub epsilon: f64,
}

/// Solution class of the functional equation.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "case")]
pub enum LemmaCase {
    /// `psi1 = psi2 = 0`, `psi0` constant.
    I,
    /// `psi1`, `psi2` linearly dependent and not both zero.
    II,
    /// `rho_k = a_k ux + b_k vx`.
    III { a: [String; 2], b: [String; 2] },
    NoMatch { reason: String },
}

/// The functional-equation data carried by the structure residual of the
/// constant row.
pub fn lemma2_data(fr: &Frame, variant: Variant, delta: Delta) -> LemmaData {
    let f = |i: usize, j: usize| fr.f[i][j].clone();
    match variant {
        Variant::T2 => LemmaData { psi: [f(1, 1), f(0, 1), f(2, 1)], rho: [f(0, 0), f(2, 0)], epsilon: 1.0 },
        Variant::T1 => LemmaData {
            psi: [f(2, 1), f(0, 1), f(1, 1)],
            rho: [f(0, 0), f(1, 0)],
            epsilon: delta.sign(),
        },
        Variant::T3 => LemmaData { psi: [f(0, 1), f(2, 1), f(1, 1)], rho: [f(2, 0), f(1, 0)], epsilon: 1.0 },
    }
}

/// Residual of the equation and the determinant `rho1_ux rho2_vx - rho1_vx rho2_ux`.
pub fn lemma2_residual(d: &LemmaData) -> Result<(Expr, Expr), ClassifyError> {
    let [p0, p1, p2] = &d.psi;
    let [r1, r2] = &d.rho;
    let e = Expr::constant(d.epsilon);
    let residual = p0.diff(&Sym::U)? * Expr::ux() + p0.diff(&Sym::V)? * Expr::vx() - &e * r1 * p2 + &e * r2 * p1;
    let det = r1.diff(&Sym::Ux)? * r2.diff(&Sym::Vx)? - r1.diff(&Sym::Vx)? * r2.diff(&Sym::Ux)?;
    Ok((residual.simplify(), det.simplify()))
}

/// Decide which solution class `d` falls in. Requires the residual to vanish
/// identically and the determinant to have a nonzero witness.
pub fn lemma2_classify(d: &LemmaData, ctx: &Context) -> Result<LemmaCase, ClassifyError> {
    let d = LemmaData {
        psi: d.psi.clone().map(|e| ctx.prepare(&e)),
        rho: d.rho.clone().map(|e| ctx.prepare(&e)),
        epsilon: d.epsilon,
    };
    let (residual, det) = lemma2_residual(&d)?;
    if !ctx.is_zero(&residual)? {
        return Ok(LemmaCase::NoMatch { reason: "residual is not identically zero".into() });
    }
    if ctx.witness_nonzero(&[det]).is_none() {
        return Ok(LemmaCase::NoMatch { reason: "rho1, rho2 have dependent gradients".into() });
    }
    let [_, p1, p2] = &d.psi;
    if ctx.is_zero(p1)? && ctx.is_zero(p2)? {
        return Ok(LemmaCase::I);
    }
    if ctx.dependent(p1, p2) {
        return Ok(LemmaCase::II);
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for r in &d.rho {
        for (s, t) in [(Sym::Ux, Sym::Ux), (Sym::Ux, Sym::Vx), (Sym::Vx, Sym::Vx)] {
            if !ctx.is_zero(&r.diff(&s)?.diff(&t)?)? {
                return Ok(LemmaCase::NoMatch { reason: "rho is not linear in (ux, vx)".into() });
            }
        }
        let (ak, bk) = (r.diff(&Sym::Ux)?, r.diff(&Sym::Vx)?);
        if !ctx.is_zero(&(r - &ak * Expr::ux() - &bk * Expr::vx()).simplify())? {
            return Ok(LemmaCase::NoMatch { reason: "rho has a constant term".into() });
        }
        a.push(ak.to_string());
        b.push(bk.to_string());
    }
    Ok(LemmaCase::III { a: [a[0].clone(), a[1].clone()], b: [b[0].clone(), b[1].clone()] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;
    use crate::expr::parse;

    fn ctx() -> Context {
        Context::new(&Tolerances::default())
    }

    fn data(psi: [&str; 3], rho: [&str; 2], epsilon: f64) -> LemmaData {
        LemmaData {
            psi: psi.map(|s| parse(s).unwrap()),
            rho: rho.map(|s| parse(s).unwrap()),
            epsilon,
        }
    }

    #[test]
    fn classifies_three_cases() {
        // psi1 = psi2 = 0
        assert_eq!(lemma2_classify(&data(["3", "0", "0"], ["ux", "vx^3"], 1.0), &ctx()).unwrap(), LemmaCase::I);
        // Konno-Oono column: psi = (2v, 0, 1) with rho = (2vx, 2ux)
        assert_eq!(
            lemma2_classify(&data(["2*v", "0", "1"], ["2*vx", "2*ux"], 1.0), &ctx()).unwrap(),
            LemmaCase::II
        );
        // Pohlmeyer-Lund-Regge, f21 constant
        let d = data(["-1 - 2*u*v", "v - u", "-(u + v)"], ["ux + vx", "ux - vx"], 1.0);
        assert!(matches!(lemma2_classify(&d, &ctx()).unwrap(), LemmaCase::III { .. }));
        // residual nonzero
        let d = data(["u", "v - u", "-(u + v)"], ["ux + vx", "ux - vx"], 1.0);
        assert!(matches!(lemma2_classify(&d, &ctx()).unwrap(), LemmaCase::NoMatch { .. }));
    }

    #[test]
    fn embedding_matches_the_constant_row_residual() {
        let fr = Frame::parse([["ux + vx", "v - u"], ["1", "-1 - 2*u*v"], ["ux - vx", "-(u + v)"]]).unwrap();
        let (res, _) = lemma2_residual(&lemma2_data(&fr, Variant::T2, Delta::Pss)).unwrap();
        let terms = crate::frames::residual_terms(&fr, Delta::Pss).unwrap();
        assert_eq!(res, terms[1].rhs.simplify());
    }
}
