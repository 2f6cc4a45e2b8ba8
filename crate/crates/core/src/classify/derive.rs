use serde::{Deserialize, Serialize};

use super::{case2_constants, Case1Params, Case2Params, ClassifyError, Variant};
use crate::expr::{Expr, Sym};
use crate::frames::{Context, Delta, Frame, SystemSpec};

/// `(F, G)` solved from two structure residuals.
#[derive(Clone, Debug)]
pub struct Derived {
    pub f: Expr,
    pub g: Expr,
    /// Zero-based rows whose residuals were solved.
    pub rows: (usize, usize),
    /// Determinant of the 2x2 system in `(F, G)`.
    pub w: Expr,
}

fn is_constant_row(fr: &Frame, i: usize, ctx: &Context) -> Result<bool, ClassifyError> {
    for s in [Sym::Ux, Sym::Vx] {
        let d = ctx.prepare(&fr.f[i][0].diff(&s)?);
        if !ctx.is_zero(&d)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solve two of the structure residuals for `(F, G)` and require the third
/// to vanish identically. Pairs that leave out a row with constant `f_i1`
/// are tried first.
pub fn derive_fg(fr: &Frame, delta: Delta, ctx: &Context) -> Result<Derived, ClassifyError> {
    let terms = crate::frames::residual_terms(fr, delta)?;
    let mut pairs: Vec<(usize, usize, usize)> = vec![(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let mut constant = [false; 3];
    for (i, c) in constant.iter_mut().enumerate() {
        *c = is_constant_row(fr, i, ctx)?;
    }
    pairs.sort_by_key(|&(_, _, rest)| !constant[rest]);

    for (i, k, rest) in pairs {
        let (ti, tk) = (&terms[i], &terms[k]);
        let w = (&ti.coef_f * &tk.coef_g - &ti.coef_g * &tk.coef_f).simplify();
        if ctx.witness_nonzero(&[ctx.prepare(&w)]).is_none() {
            continue;
        }
        let inv = w.recip();
        let f = ((&ti.rhs * &tk.coef_g - &ti.coef_g * &tk.rhs) * &inv).simplify();
        let g = ((&ti.coef_f * &tk.rhs - &ti.rhs * &tk.coef_f) * &inv).simplify();
        let third = ctx.prepare(&terms[rest].assemble(&f, &g));
        if !ctx.is_zero(&third)? {
            return Err(ClassifyError::ThirdResidualNonzero { residual: third.to_string() });
        }
        return Ok(Derived { f, g, rows: (i, k), w });
    }
    Err(ClassifyError::NonInvertible)
}

/// Outcome of comparing one closed-form `(F, G)` with the derived system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrintedCheck {
    pub form: String,
    pub matches: bool,
}

/// Closed form of `(F, G)` for family (i).
pub fn printed_case1(p: &Case1Params) -> Result<(Expr, Expr), ClassifyError> {
    let (a, b, l, m, eta) = (&p.a, &p.b, &p.lambda, &p.mu, &p.eta);
    let (g, h) = (&p.g, &p.h);
    let xi = a * Expr::v() + b * Expr::u();
    let phi = |k| Expr::call1("phi", k, xi.clone());
    let d = p.delta.expr();
    let (gu, gv, hu, hv) = (g.diff(&Sym::Ux)?, g.diff(&Sym::Vx)?, h.diff(&Sym::Ux)?, h.diff(&Sym::Vx)?);
    let w = &gu * &hv - &gv * &hu;
    let rate = b * Expr::ux() + a * Expr::vx();
    let (f, gg) = match p.variant {
        Variant::T1 => {
            let q = (g.powi(2) + h.powi(2)) * 0.5;
            (
                -(&d * a * &rate) * phi(2) - eta * (m * &hv + l * &gv) * phi(1) + q.diff(&Sym::Vx)? * phi(0),
                &d * b * &rate * phi(2) + eta * (m * &hu + l * &gu) * phi(1) - q.diff(&Sym::Ux)? * phi(0),
            )
        }
        Variant::T2 | Variant::T3 => {
            let q = (h.powi(2) - &d * g.powi(2)) * 0.5;
            (
                -(a * &rate) * phi(2) + eta * (m * &hv - &d * l * &gv) * phi(1) - q.diff(&Sym::Vx)? * phi(0),
                b * &rate * phi(2) - eta * (m * &hu - &d * l * &gu) * phi(1) + q.diff(&Sym::Ux)? * phi(0),
            )
        }
    };
    Ok(((f / &w).simplify(), (gg / &w).simplify()))
}

/// Closed forms of `(F, G)` for family (ii). With `f31 = eta` two readings
/// are returned: as typeset (`gamma^2` under the `ux` term of `G`) and with
/// `gamma` throughout.
pub fn printed_case2(p: &Case2Params) -> Vec<(String, Expr, Expr)> {
    let c = case2_constants(p);
    let (al, be, ta, ga) = (&c.alpha, &c.beta, &c.tau, &c.gamma);
    let pd = |i: u32, j: u32| Expr::call("p", vec![i, j], vec![Expr::u(), Expr::v()]);
    let (p0, pu, pv, puu, puv, pvv) = (pd(0, 0), pd(1, 0), pd(0, 1), pd(2, 0), pd(1, 1), pd(0, 2));
    let (ux, vx, eta) = (Expr::ux(), Expr::vx(), &p.eta);
    let ga2 = ga.powi(2);
    match p.variant {
        Variant::T2 | Variant::T3 => {
            let f = -(&ux / ga) * (&puv + ta * &p0) - (&vx / ga) * (&pvv + be * &p0) + (eta / &ga2) * (be * &pu - ta * &pv);
            let g = (&ux / ga) * (&puu + al * &p0) + (&vx / ga) * (&puv + ta * &p0) - (eta / &ga2) * (ta * &pu - al * &pv);
            vec![("printed".into(), f.simplify(), g.simplify())]
        }
        Variant::T1 => {
            let d = p.delta.expr();
            let f = -(&ux / ga) * (&d * &puv - ta * &p0) + (&vx / ga) * (-(&d * &pvv) + be * &p0)
                + (&d * eta / &ga2) * (-(be * &pu) + ta * &pv);
            let g_rest = (&vx / ga) * (&d * &puv - ta * &p0) + (&d * eta / &ga2) * (ta * &pu - al * &pv);
            let g_ux = &d * &puu - al * &p0;
            vec![
                ("printed".into(), f.simplify(), ((&ux / &ga2) * &g_ux + &g_rest).simplify()),
                ("uniform-gamma".into(), f.simplify(), ((&ux / ga) * &g_ux + &g_rest).simplify()),
            ]
        }
    }
}

/// Compare closed forms against the system's `(F, G)` by identity testing.
pub fn compare_printed(
    forms: &[(String, Expr, Expr)],
    sys: &SystemSpec,
    ctx: &Context,
) -> Result<Vec<PrintedCheck>, ClassifyError> {
    let mut out = Vec::new();
    for (name, f, g) in forms {
        let df = ctx.prepare(&(f - &sys.f));
        let dg = ctx.prepare(&(g - &sys.g));
        let matches = ctx.is_zero(&df)? && ctx.is_zero(&dg)?;
        out.push(PrintedCheck { form: name.clone(), matches });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;
    use crate::expr::parse;

    fn ctx() -> Context {
        Context::new(&Tolerances::default())
    }

    #[test]
    fn solves_pohlmeyer_lund_regge_frame() {
        let fr = Frame::parse([
            ["ux + vx", "v - u"],
            ["1", "-1 - 2*u*v"],
            ["ux - vx", "-(u + v)"],
        ])
        .unwrap();
        let d = derive_fg(&fr, Delta::Pss, &ctx()).unwrap();
        assert_eq!(d.rows, (0, 2));
        assert_eq!(d.f, parse("2*u*v*ux - u").unwrap().simplify());
        assert_eq!(d.g, parse("-2*u*v*vx - v").unwrap().simplify());
    }

    #[test]
    fn reports_inconsistent_third_residual() {
        // Konno-Oono frame with the wrong sign of delta
        let fr = Frame::parse([["2*vx", "0"], ["2*ux", "1"], ["0", "2*v"]]).unwrap();
        assert!(derive_fg(&fr, Delta::Pss, &ctx()).is_ok());
        assert!(matches!(
            derive_fg(&fr, Delta::Ss, &ctx()),
            Err(ClassifyError::ThirdResidualNonzero { .. })
        ));
    }

    #[test]
    fn reports_non_invertible() {
        let fr = Frame::parse([["ux", "0"], ["2*ux", "1"], ["1", "v"]]).unwrap();
        assert!(matches!(derive_fg(&fr, Delta::Pss, &ctx()), Err(ClassifyError::NonInvertible)));
    }
}
