//! Linear problems `Psi_x = A Psi`, `Psi_t = B Psi` attached to a frame:
//! the 2x2 forms in sl(2,R) / su(2) and the 3x3 forms in so(2,1) / so(3).

mod transport;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, ExprError, Sym};
use crate::frames::{Context, Delta, Frame, FrameError, SystemSpec};

pub use transport::{
    holonomy_loop, lattice_path, parse_loop, transport, unit_state, CompiledPair, Move, PathError, TraceRow,
    TransportSummary, TransportTrace,
};

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("entry ({row}, {col}) of {matrix} depends on {var}: the residual involves {derivative}")]
    FreeDerivative { matrix: &'static str, row: usize, col: usize, var: String, derivative: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("parameter `{0}` has no value")]
    FreeParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algebra {
    Sl2,
    Su2,
    So21,
    So3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    #[serde(rename = "2x2")]
    TwoByTwo,
    #[serde(rename = "3x3")]
    ThreeByThree,
}

/// Matrix entry `re + i im`.
#[derive(Clone, Debug, PartialEq)]
pub struct CExpr {
    pub re: Expr,
    pub im: Expr,
}

impl CExpr {
    pub fn real(re: Expr) -> CExpr {
        CExpr { re, im: Expr::zero() }
    }

    pub fn imag(im: Expr) -> CExpr {
        CExpr { re: Expr::zero(), im }
    }

    fn add(&self, o: &CExpr) -> CExpr {
        CExpr { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &CExpr) -> CExpr {
        CExpr { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn mul(&self, o: &CExpr) -> CExpr {
        CExpr {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> CExpr {
        CExpr { re: f(&self.re), im: f(&self.im) }
    }

    fn simplify(&self) -> CExpr {
        self.map(Expr::simplify)
    }
}

pub type Matrix = Vec<Vec<CExpr>>;

#[derive(Clone, Debug)]
pub struct LinearPair {
    pub algebra: Algebra,
    pub delta: Delta,
    pub a: Matrix,
    pub b: Matrix,
}

impl LinearPair {
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn is_complex(&self) -> bool {
        self.algebra == Algebra::Su2
    }
}

fn two_by_two(f1: &Expr, f2: &Expr, f3: &Expr, delta: Delta) -> Matrix {
    let h = |e: Expr| (e * 0.5).simplify();
    match delta {
        Delta::Pss => vec![
            vec![CExpr::real(h(f2.clone())), CExpr::real(h(f1 - f3))],
            vec![CExpr::real(h(f1 + f3)), CExpr::real(h(-f2))],
        ],
        Delta::Ss => vec![
            vec![CExpr::imag(h(f2.clone())), CExpr { re: h(f1.clone()), im: h(f3.clone()) }],
            vec![CExpr { re: h(-f1), im: h(f3.clone()) }, CExpr::imag(h(-f2))],
        ],
    }
}

fn three_by_three(f1: &Expr, f2: &Expr, f3: &Expr, delta: Delta) -> Matrix {
    let d = delta.sign();
    let z = || CExpr::real(Expr::zero());
    let r = |e: Expr| CExpr::real(e.simplify());
    vec![
        vec![z(), r(f1.clone()), r(f2.clone())],
        vec![r(d * f1.clone()), z(), r(f3.clone())],
        vec![r(d * f2.clone()), r(-f3), z()],
    ]
}

/// Populate `A` from the first column of the frame and `B` from the second.
pub fn build(fr: &Frame, delta: Delta, form: Form) -> LinearPair {
    let col = |j: usize| (&fr.f[0][j], &fr.f[1][j], &fr.f[2][j]);
    let make = |j: usize| {
        let (f1, f2, f3) = col(j);
        match form {
            Form::TwoByTwo => two_by_two(f1, f2, f3, delta),
            Form::ThreeByThree => three_by_three(f1, f2, f3, delta),
        }
    };
    let algebra = match (form, delta) {
        (Form::TwoByTwo, Delta::Pss) => Algebra::Sl2,
        (Form::TwoByTwo, Delta::Ss) => Algebra::Su2,
        (Form::ThreeByThree, Delta::Pss) => Algebra::So21,
        (Form::ThreeByThree, Delta::Ss) => Algebra::So3,
    };
    LinearPair { algebra, delta, a: make(0), b: make(1) }
}

fn product(x: &Matrix, y: &Matrix) -> Matrix {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let terms: Vec<CExpr> = (0..n).map(|j| x[i][j].mul(&y[j][k])).collect();
                    CExpr {
                        re: Expr::add(terms.iter().map(|t| t.re.clone()).collect()),
                        im: Expr::add(terms.iter().map(|t| t.im.clone()).collect()),
                    }
                })
                .collect()
        })
        .collect()
}

fn depends(ctx: &Context, e: &CExpr, s: &Sym) -> Result<bool, LinearError> {
    for part in [&e.re, &e.im] {
        let p = ctx.prepare(part);
        if p.depends_on(s) && !ctx.is_zero(&p.diff(s)?)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `A_t - B_x + AB - BA` with `u_xt -> F`, `v_xt -> G`. `A` may not depend
/// on `u, v` (that would bring in `u_t, v_t`) and `B` may not depend on
/// `ux, vx` (`u_xx, v_xx`).
pub fn zc_residual(lp: &LinearPair, sys: &SystemSpec, ctx: &Context) -> Result<Matrix, LinearError> {
    let n = lp.dim();
    for i in 0..n {
        for j in 0..n {
            for (s, deriv) in [(Sym::U, "u_t"), (Sym::V, "v_t")] {
                if depends(ctx, &lp.a[i][j], &s)? {
                    return Err(LinearError::FreeDerivative {
                        matrix: "A",
                        row: i,
                        col: j,
                        var: s.name(),
                        derivative: deriv.into(),
                    });
                }
            }
            for (s, deriv) in [(Sym::Ux, "u_xx"), (Sym::Vx, "v_xx")] {
                if depends(ctx, &lp.b[i][j], &s)? {
                    return Err(LinearError::FreeDerivative {
                        matrix: "B",
                        row: i,
                        col: j,
                        var: s.name(),
                        derivative: deriv.into(),
                    });
                }
            }
        }
    }
    let ab = product(&lp.a, &lp.b);
    let ba = product(&lp.b, &lp.a);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let a = &lp.a[i][j];
            let b = &lp.b[i][j];
            let at = CExpr {
                re: a.re.diff(&Sym::Ux)? * &sys.f + a.re.diff(&Sym::Vx)? * &sys.g,
                im: a.im.diff(&Sym::Ux)? * &sys.f + a.im.diff(&Sym::Vx)? * &sys.g,
            };
            let bx = CExpr {
                re: b.re.diff(&Sym::U)? * Expr::ux() + b.re.diff(&Sym::V)? * Expr::vx(),
                im: b.im.diff(&Sym::U)? * Expr::ux() + b.im.diff(&Sym::V)? * Expr::vx(),
            };
            row.push(at.sub(&bx).add(&ab[i][j]).sub(&ba[i][j]).simplify());
        }
        out.push(row);
    }
    Ok(out)
}

/// Every entry of the zero-curvature residual vanishes identically.
pub fn zero_curvature(lp: &LinearPair, sys: &SystemSpec, ctx: &Context) -> Result<bool, LinearError> {
    let r = zc_residual(lp, sys, ctx)?;
    for e in r.iter().flatten() {
        for part in [&e.re, &e.im] {
            if !ctx.is_zero(&ctx.prepare(part))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Membership of `A` and `B` in the pair's Lie algebra, entry-wise.
pub fn in_algebra(lp: &LinearPair, ctx: &Context) -> Result<bool, LinearError> {
    let zero = |e: &Expr| -> Result<bool, LinearError> { Ok(ctx.is_zero(&ctx.prepare(e))?) };
    for m in [&lp.a, &lp.b] {
        let n = m.len();
        let ok = match lp.algebra {
            Algebra::Sl2 => {
                let tr = m[0][0].add(&m[1][1]);
                zero(&tr.re)? && zero(&tr.im)? && (0..2).all(|i| (0..2).all(|j| m[i][j].im.is_const_zero()))
            }
            Algebra::Su2 => {
                // A + A^dagger = 0
                let mut ok = true;
                for i in 0..n {
                    for j in 0..n {
                        ok &= zero(&(&m[i][j].re + &m[j][i].re))? && zero(&(&m[i][j].im - &m[j][i].im))?;
                    }
                }
                ok
            }
            Algebra::So21 | Algebra::So3 => {
                // J M is antisymmetric for J = diag(1, -delta, -delta)
                let d = lp.delta.sign();
                let j = [1.0, -d, -d];
                let mut ok = true;
                for r in 0..n {
                    for c in 0..n {
                        ok &= zero(&(j[r] * m[r][c].re.clone() + j[c] * m[c][r].re.clone()))?;
                        ok &= m[r][c].im.is_const_zero();
                    }
                }
                ok
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, Overrides};
    use crate::config::Tolerances;
    use crate::expr::parse;

    fn ctx() -> Context {
        Context::new(&Tolerances::default())
    }

    #[test]
    fn nls_pair_matches_the_closed_form() {
        let (fr, shell) = catalog::entry("nls-minus").unwrap().frame_with(&Overrides::default().free("eta")).unwrap();
        let ctx = shell.context(&Tolerances::default()).unwrap();
        let lp = build(&fr, Delta::Pss, Form::TwoByTwo);
        let expected = [["-v", "u - eta"], ["u + eta", "v"]];
        for i in 0..2 {
            for j in 0..2 {
                let d = ctx.prepare(&(&lp.a[i][j].re - parse(expected[i][j]).unwrap()));
                assert!(ctx.is_zero(&d).unwrap(), "A[{i}][{j}] = {}", lp.a[i][j].re);
            }
        }
        let expected_b = [
            ["2*eta*v - ux", "-2*eta*u - vx + 2*eta^2 + u^2 + v^2"],
            ["-2*eta*u - vx - 2*eta^2 - u^2 - v^2", "-2*eta*v + ux"],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let d = ctx.prepare(&(&lp.b[i][j].re - parse(expected_b[i][j]).unwrap()));
                assert!(ctx.is_zero(&d).unwrap(), "B[{i}][{j}] = {}", lp.b[i][j].re);
            }
        }
        // A depends on u, v: hyperbolic substitution is impossible
        let sys = SystemSpec::new("nls", Delta::Pss, Expr::zero(), Expr::zero());
        assert!(matches!(zc_residual(&lp, &sys, &ctx), Err(LinearError::FreeDerivative { matrix: "A", .. })));
    }

    #[test]
    fn zero_frame_gives_zero_matrices() {
        for form in [Form::TwoByTwo, Form::ThreeByThree] {
            for d in [Delta::Pss, Delta::Ss] {
                let lp = build(&Frame::zero(), d, form);
                assert!(lp.a.iter().chain(&lp.b).flatten().all(|e| e.re.is_const_zero() && e.im.is_const_zero()));
            }
        }
    }

    #[test]
    fn konno_oono_three_by_three_entries() {
        let (sys, fr) = catalog::get("konno-oono", &Overrides::default().param("nu", 2.0)).unwrap();
        let c = sys.context(&Tolerances::default()).unwrap();
        let lp = build(&fr, Delta::Pss, Form::ThreeByThree);
        assert_eq!(c.prepare(&lp.a[0][1].re), Expr::vx());
        assert_eq!(c.prepare(&lp.a[0][2].re), Expr::ux());
        assert_eq!(c.prepare(&lp.a[1][2].re), Expr::zero());
        assert_eq!(c.prepare(&lp.a[1][0].re), Expr::vx());
        assert_eq!(c.prepare(&lp.a[2][0].re), Expr::ux());
        assert!(zero_curvature(&lp, &sys, &c).unwrap());
        assert!(in_algebra(&lp, &c).unwrap());
    }

    #[test]
    fn plr_pair_is_flat_and_breaks_without_b() {
        let (sys, fr) = catalog::get("plr", &Overrides::default()).unwrap();
        let c = sys.context(&Tolerances::default()).unwrap();
        let lp = build(&fr, Delta::Pss, Form::TwoByTwo);
        assert!(in_algebra(&lp, &c).unwrap());
        assert!(zero_curvature(&lp, &sys, &c).unwrap());
        let mut broken = lp.clone();
        for e in broken.b.iter_mut().flatten() {
            *e = CExpr::real(Expr::zero());
        }
        assert!(!zero_curvature(&broken, &sys, &c).unwrap());
        let _ = ctx();
    }

    #[test]
    fn spherical_pairs_are_flat() {
        let (sys, fr) = catalog::get("ex3.4", &Overrides::default()).unwrap();
        let c = sys.context(&Tolerances::default()).unwrap();
        for form in [Form::TwoByTwo, Form::ThreeByThree] {
            let lp = build(&fr, Delta::Ss, form);
            assert!(in_algebra(&lp, &c).unwrap(), "{form:?}");
            assert!(zero_curvature(&lp, &sys, &c).unwrap(), "{form:?}");
        }
    }
}
