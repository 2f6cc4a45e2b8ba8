use std::collections::BTreeMap;

use super::{derive_fg, Case1Params, Case2Params, ClassifyError, Variant};
use crate::config::Tolerances;
use crate::expr::{Expr, ExprFn, FnDef, FnTable, ParseContext, Sym};
use crate::frames::{Context, Delta, Frame, FrameError, ParamSpec, SystemSpec};

/// Swap rows 1 and 2 and negate row 3. Maps a frame with `f21 = eta` to one
/// with `f11 = eta` for the same system and the same `delta`.
pub fn t3_from_t2(fr: &Frame) -> Frame {
    let f = &fr.f;
    Frame::new([
        f[1].clone(),
        f[0].clone(),
        [-&f[2][0], -&f[2][1]],
    ])
    .simplify()
}

fn register(functions: &FnTable, name: &str, def: &FnDef, arity: usize) -> Result<FnTable, ClassifyError> {
    if def.args.len() != arity {
        return Err(ClassifyError::Frame(FrameError::Invalid(format!(
            "`{name}` takes {arity} argument(s), got {}",
            def.args.len()
        ))));
    }
    let ctx = ParseContext {
        params: None,
        functions: Some(functions.arities()),
        args: def.args.clone(),
    };
    let body = crate::expr::parse_with(&def.body, &ctx)?;
    let mut fns = functions.clone();
    fns.insert(name, ExprFn::new(def.args.clone(), body));
    Ok(fns)
}

fn context(params: &BTreeMap<String, ParamSpec>, fns: &FnTable, tol: &Tolerances) -> Result<Context, ClassifyError> {
    let shell = SystemSpec {
        label: String::new(),
        delta: Delta::Pss,
        f: Expr::zero(),
        g: Expr::zero(),
        params: params.clone(),
        functions: fns.clone(),
    };
    Ok(shell.context(tol)?)
}

fn require_nonzero(ctx: &Context, e: &Expr, what: &str) -> Result<(), ClassifyError> {
    match ctx.witness_nonzero(&[ctx.prepare(e)]) {
        Some(_) => Ok(()),
        None => Err(ClassifyError::ConstraintViolation(what.into())),
    }
}

fn case1_frame(p: &Case1Params) -> Frame {
    let xi = &p.a * Expr::v() + &p.b * Expr::u();
    let phi = Expr::call1("phi", 0, xi.clone());
    let dphi = Expr::call1("phi", 1, xi);
    let (g, h, eta) = (p.g.clone(), p.h.clone(), p.eta.clone());
    let (l, m) = (&p.lambda * &dphi, &p.mu * &dphi);
    let t2 = Frame::new([[g.clone(), l.clone()], [eta.clone(), phi.clone()], [h.clone(), m.clone()]]);
    match p.variant {
        Variant::T1 => Frame::new([[g, l], [h, m], [eta, phi]]).simplify(),
        Variant::T2 => t2.simplify(),
        Variant::T3 => t3_from_t2(&t2),
    }
}

/// Frame and system of family (i). Checks `lambda^2 + mu^2 != 0`,
/// `a^2 + b^2 != 0`, the linear constraint on `mu g - lambda h`, `W != 0`
/// and, when `f21 = eta` or `f11 = eta`, `g != lambda eta phi'/phi`.
pub fn build_case1(p: &Case1Params, tol: &Tolerances) -> Result<(SystemSpec, Frame), ClassifyError> {
    let fns = register(&p.functions, "phi", &p.phi, 1)?;
    let ctx = context(&p.params, &fns, tol)?;
    require_nonzero(&ctx, &(p.lambda.powi(2) + p.mu.powi(2)), "lambda^2+mu^2=0")?;
    require_nonzero(&ctx, &(p.a.powi(2) + p.b.powi(2)), "a^2+b^2=0")?;

    let rate = &p.a * Expr::vx() + &p.b * Expr::ux();
    let target = match p.variant {
        Variant::T1 => p.delta.expr() * rate,
        Variant::T2 | Variant::T3 => rate,
    };
    let constraint = &p.mu * &p.g - &p.lambda * &p.h - target;
    if !ctx.is_zero(&ctx.prepare(&constraint))? {
        return Err(ClassifyError::ConstraintViolation("mu*g-lambda*h".into()));
    }

    if p.variant != Variant::T1 {
        let xi = &p.a * Expr::v() + &p.b * Expr::u();
        let e = &p.g * Expr::call1("phi", 0, xi.clone()) - &p.lambda * &p.eta * Expr::call1("phi", 1, xi);
        require_nonzero(&ctx, &e, "g=lambda*eta*phi'/phi")?;
    }

    let w = p.g.diff(&Sym::Ux)? * p.h.diff(&Sym::Vx)? - p.g.diff(&Sym::Vx)? * p.h.diff(&Sym::Ux)?;
    if ctx.witness_nonzero(&[ctx.prepare(&w)]).is_none() {
        return Err(ClassifyError::DegenerateW);
    }

    let frame = case1_frame(p);
    let d = derive_fg(&frame, p.delta, &ctx)?;
    let sys = SystemSpec {
        label: p.label.clone(),
        delta: p.delta,
        f: d.f,
        g: d.g,
        params: p.params.clone(),
        functions: fns,
    };
    Ok((sys, frame))
}

/// `alpha, beta, tau, gamma` of family (ii) as expressions in the
/// coefficients.
#[derive(Clone, Debug)]
pub struct Case2Constants {
    pub alpha: Expr,
    pub beta: Expr,
    pub tau: Expr,
    pub gamma: Expr,
}

pub fn case2_constants(p: &Case2Params) -> Case2Constants {
    let (a1, b1, a2, b2) = (&p.a1, &p.b1, &p.a2, &p.b2);
    let gamma = (a1 * b2 - b1 * a2).simplify();
    match p.variant {
        Variant::T1 => Case2Constants {
            alpha: (a1.powi(2) + a2.powi(2)).simplify(),
            beta: (b1.powi(2) + b2.powi(2)).simplify(),
            tau: (a1 * b1 + a2 * b2).simplify(),
            gamma,
        },
        Variant::T2 | Variant::T3 => {
            let d = p.delta.expr();
            Case2Constants {
                alpha: (a2.powi(2) - &d * a1.powi(2)).simplify(),
                beta: (b2.powi(2) - &d * b1.powi(2)).simplify(),
                tau: (a2 * b2 - &d * a1 * b1).simplify(),
                gamma,
            }
        }
    }
}

fn case2_frame(p: &Case2Params) -> Frame {
    let uv = || vec![Expr::u(), Expr::v()];
    let pf = Expr::call("p", vec![0, 0], uv());
    let pu = Expr::call("p", vec![1, 0], uv());
    let pv = Expr::call("p", vec![0, 1], uv());
    let gamma = case2_constants(p).gamma;
    let lin = |a: &Expr, b: &Expr| a * Expr::ux() + b * Expr::vx();
    let col2 = |a: &Expr, b: &Expr| (b * &pu - a * &pv) / &gamma;
    let row1 = [lin(&p.a1, &p.b1), col2(&p.a1, &p.b1)];
    let row2 = [lin(&p.a2, &p.b2), col2(&p.a2, &p.b2)];
    let constant = [p.eta.clone(), pf];
    match p.variant {
        Variant::T1 => {
            let d = p.delta.expr();
            Frame::new([
                [row1[0].clone(), &d * &row1[1]],
                [row2[0].clone(), &d * &row2[1]],
                constant,
            ])
            .simplify()
        }
        Variant::T2 => Frame::new([row1, constant, row2]).simplify(),
        Variant::T3 => t3_from_t2(&Frame::new([row1, constant, row2])),
    }
}

/// Frame and system of family (ii). Checks `gamma != 0` and that `p_u`,
/// `p_v` are not proportional.
pub fn build_case2(p: &Case2Params, tol: &Tolerances) -> Result<(SystemSpec, Frame), ClassifyError> {
    let fns = register(&p.functions, "p", &p.p, 2)?;
    let ctx = context(&p.params, &fns, tol)?;
    require_nonzero(&ctx, &case2_constants(p).gamma, "gamma=0")?;
    let uv = || vec![Expr::u(), Expr::v()];
    let pu = ctx.prepare(&Expr::call("p", vec![1, 0], uv()));
    let pv = ctx.prepare(&Expr::call("p", vec![0, 1], uv()));
    if ctx.dependent(&pu, &pv) {
        return Err(ClassifyError::ProportionalGradients);
    }
    let frame = case2_frame(p);
    let d = derive_fg(&frame, p.delta, &ctx)?;
    let sys = SystemSpec {
        label: p.label.clone(),
        delta: p.delta,
        f: d.f,
        g: d.g,
        params: p.params.clone(),
        functions: fns,
    };
    Ok((sys, frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::frames::verify;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn konno_oono_case1() -> Case1Params {
        // f31 = 0, f11 = 2vx/nu, f21 = 2ux/nu, f12 = 0, f22 = nu, f32 = 2v
        Case1Params {
            label: "ko".into(),
            variant: Variant::T1,
            delta: Delta::Pss,
            a: Expr::constant(2.0),
            b: Expr::zero(),
            lambda: Expr::zero(),
            mu: Expr::param("nu"),
            eta: Expr::zero(),
            g: parse("2*vx/nu").unwrap(),
            h: parse("2*ux/nu").unwrap(),
            phi: FnDef { args: vec!["s".into()], body: "s".into() },
            params: [("nu".to_string(), ParamSpec::bound(1.5).nonzero())].into(),
            functions: FnTable::new(),
        }
    }

    #[test]
    fn t3_swaps_and_negates() {
        let fr = Frame::parse([["a", "b"], ["c", "d"], ["e", "f"]]).unwrap();
        let t3 = t3_from_t2(&fr);
        assert_eq!(t3, Frame::parse([["c", "d"], ["a", "b"], ["-e", "-f"]]).unwrap().simplify());
    }

    #[test]
    fn case1_recovers_konno_oono() {
        let (sys, fr) = build_case1(&konno_oono_case1(), &tol()).unwrap();
        let ctx = sys.context(&tol()).unwrap();
        let f = ctx.prepare(&(&sys.f - parse("-2*v*vx").unwrap()));
        let g = ctx.prepare(&(&sys.g - parse("2*v*ux").unwrap()));
        assert!(ctx.is_zero(&f).unwrap() && ctx.is_zero(&g).unwrap(), "F={} G={}", sys.f, sys.g);
        assert!(verify(&sys, &fr, &tol()).unwrap().passed);
    }

    #[test]
    fn case1_constraints_are_enforced() {
        let mut p = konno_oono_case1();
        p.g = parse("3*vx/nu").unwrap();
        assert!(matches!(build_case1(&p, &tol()), Err(ClassifyError::ConstraintViolation(m)) if m == "mu*g-lambda*h"));

        let mut p = konno_oono_case1();
        p.mu = Expr::zero();
        assert!(matches!(build_case1(&p, &tol()), Err(ClassifyError::ConstraintViolation(m)) if m == "lambda^2+mu^2=0"));

        let mut p = konno_oono_case1();
        p.a = Expr::zero();
        assert!(matches!(build_case1(&p, &tol()), Err(ClassifyError::ConstraintViolation(m)) if m == "a^2+b^2=0"));

        // g and h both functions of vx: W = 0
        let mut p = konno_oono_case1();
        p.h = parse("vx^3").unwrap();
        assert!(matches!(build_case1(&p, &tol()), Err(ClassifyError::DegenerateW)));
    }

    #[test]
    fn case1_t2_rejects_log_derivative_g() {
        // g = lambda eta phi'/phi with phi = exp: g constant = lambda*eta
        let p = Case1Params {
            label: "bad".into(),
            variant: Variant::T2,
            delta: Delta::Pss,
            a: Expr::zero(),
            b: Expr::one(),
            lambda: Expr::one(),
            mu: Expr::one(),
            eta: Expr::constant(2.0),
            g: Expr::constant(2.0),
            h: parse("2 - ux").unwrap(),
            phi: FnDef { args: vec!["s".into()], body: "exp(s)".into() },
            params: BTreeMap::new(),
            functions: FnTable::new(),
        };
        assert!(matches!(build_case1(&p, &tol()), Err(ClassifyError::ConstraintViolation(m)) if m.starts_with("g=")));
    }

    fn pohlmeyer_lund_regge_case2(variant: Variant) -> Case2Params {
        // cor 5.1 data with k0 = -1, a = sqrt2, b = -sqrt2, theta = pi/2, eta = 1
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r2 = 2f64.sqrt();
        Case2Params {
            label: "plr".into(),
            variant,
            delta: Delta::Pss,
            a1: Expr::constant(r2 * s),
            b1: Expr::constant(r2 * s),
            a2: Expr::constant(r2 * s),
            b2: Expr::constant(-r2 * s),
            eta: Expr::one(),
            p: FnDef { args: vec!["u".into(), "v".into()], body: "-1 - 2*u*v".into() },
            params: BTreeMap::new(),
            functions: FnTable::new(),
        }
    }

    #[test]
    fn case2_recovers_pohlmeyer_lund_regge() {
        for variant in [Variant::T2, Variant::T3] {
            let (sys, fr) = build_case2(&pohlmeyer_lund_regge_case2(variant), &tol()).unwrap();
            let ctx = sys.context(&tol()).unwrap();
            let f = ctx.prepare(&(&sys.f - parse("2*u*v*ux - u").unwrap()));
            let g = ctx.prepare(&(&sys.g - parse("-2*u*v*vx - v").unwrap()));
            assert!(ctx.is_zero(&f).unwrap() && ctx.is_zero(&g).unwrap(), "F={} G={}", sys.f, sys.g);
            assert!(verify(&sys, &fr, &tol()).unwrap().passed);
        }
    }

    #[test]
    fn case2_constraints_are_enforced() {
        let mut p = pohlmeyer_lund_regge_case2(Variant::T2);
        p.b2 = p.b1.clone();
        p.a2 = p.a1.clone();
        assert!(matches!(build_case2(&p, &tol()), Err(ClassifyError::ConstraintViolation(m)) if m == "gamma=0"));
        let mut p = pohlmeyer_lund_regge_case2(Variant::T2);
        p.p.body = "(u + 2*v)^2".into();
        assert!(matches!(build_case2(&p, &tol()), Err(ClassifyError::ProportionalGradients)));
    }

    #[test]
    fn constants_follow_the_variant() {
        let mut p = pohlmeyer_lund_regge_case2(Variant::T1);
        p.a1 = Expr::constant(1.0);
        p.b1 = Expr::constant(2.0);
        p.a2 = Expr::constant(3.0);
        p.b2 = Expr::constant(4.0);
        let c = case2_constants(&p);
        assert_eq!(
            [c.alpha, c.beta, c.tau, c.gamma].map(|e| e.as_const().unwrap()),
            [10.0, 20.0, 14.0, -2.0]
        );
        p.variant = Variant::T2;
        p.delta = Delta::Ss;
        let c = case2_constants(&p);
        assert_eq!(
            [c.alpha, c.beta, c.tau, c.gamma].map(|e| e.as_const().unwrap()),
            [10.0, 20.0, 14.0, -2.0]
        );
        p.delta = Delta::Pss;
        let c = case2_constants(&p);
        assert_eq!([c.alpha, c.beta, c.tau].map(|e| e.as_const().unwrap()), [8.0, 12.0, 10.0]);
    }
}
