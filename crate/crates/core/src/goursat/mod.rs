//! Characteristic (Goursat) problem for `u_xt = F`, `v_xt = G` on a
//! rectangle, and geometric checks of the numerical solution against a frame.

mod geometry;

use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::Tolerances;
use crate::expr::{EvalError, Expr, ExprFn, FnTable, ParseError, Point, Sym, UserFn};
use crate::frames::{FrameError, SystemSpec};

pub use geometry::{
    generic_data, screen, validate_with_grid, Orders, Screen,
    curvature, forms_residual, pde_residual, validate, CurvatureField, FormsResidual, GeometryReport, LevelReport,
    PdeResidual,
};

#[derive(Debug, Error)]
pub enum GoursatError {
    #[error("data do not agree at the corner: {which}(0,0) is {bottom} from t=0 and {left} from x=0")]
    CornerMismatch { which: &'static str, bottom: f64, left: f64 },
    #[error("solution exceeds {cap:e} at node ({i}, {j}): {value}")]
    Blowup { i: usize, j: usize, value: f64, cap: f64 },
    #[error("cell fixed point at node ({i}, {j}) still changing by {change:e} after the last sweep")]
    NonConvergence { i: usize, j: usize, change: f64 },
    #[error("evaluation failed at node ({i}, {j}): {source}")]
    Eval { i: usize, j: usize, source: EvalError },
    #[error("parameter `{0}` has no value")]
    FreeParameter(String),
    #[error("grid needs at least 3 nodes per direction, got {0}x{1}")]
    TooSmall(usize, usize),
    #[error("data: {0}")]
    Data(#[from] ParseError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Characteristic data `u(x,0)`, `v(x,0)` on `[0,X]` and `u(0,t)`, `v(0,t)`
/// on `[0,T]`, each a closed-form expression in one variable.
#[derive(Clone, Debug)]
pub struct GoursatData {
    texts: [String; 4],
    parts: [ExprFn; 4],
    pub x_len: f64,
    pub t_len: f64,
}

impl GoursatData {
    /// `[u(x,0), v(x,0), u(0,t), v(0,t)]` on the unit square.
    pub fn parse(texts: [&str; 4]) -> Result<GoursatData, ParseError> {
        let parts = [
            ExprFn::parse(&["x"], texts[0])?,
            ExprFn::parse(&["x"], texts[1])?,
            ExprFn::parse(&["t"], texts[2])?,
            ExprFn::parse(&["t"], texts[3])?,
        ];
        Ok(GoursatData {
            texts: texts.map(str::to_string),
            parts,
            x_len: 1.0,
            t_len: 1.0,
        })
    }

    pub fn with_extent(mut self, x_len: f64, t_len: f64) -> GoursatData {
        self.x_len = x_len;
        self.t_len = t_len;
        self
    }

    pub fn texts(&self) -> &[String; 4] {
        &self.texts
    }

    /// Random data `c0 + a*s + c*sin(pi*s)` on each edge with amplitudes at
    /// most 0.5, sharing the corner values.
    pub fn generated<R: Rng>(rng: &mut R) -> GoursatData {
        let mut amp = || rng.gen_range(-0.5..0.5);
        let (u0, v0) = (amp(), amp());
        let edge = |c0: f64, a: f64, c: f64, s: &str| format!("({c0:?}) + ({a:?})*{s} + ({c:?})*sin(pi*{s})");
        let texts = [
            edge(u0, amp(), amp(), "x"),
            edge(v0, amp(), amp(), "x"),
            edge(u0, amp(), amp(), "t"),
            edge(v0, amp(), amp(), "t"),
        ];
        GoursatData::parse([&texts[0], &texts[1], &texts[2], &texts[3]]).expect("generated data parse")
    }

    fn value(&self, k: usize, s: f64, order: u32) -> Result<f64, EvalError> {
        self.parts[k].eval(&[order], &[s], &Point::default(), &FnTable::new())
    }

    pub fn check_corner(&self, tol: f64) -> Result<(), GoursatError> {
        for (which, b, l) in [("u", 0, 2), ("v", 1, 3)] {
            let bottom = self.value(b, 0.0, 0).map_err(|source| GoursatError::Eval { i: 0, j: 0, source })?;
            let left = self.value(l, 0.0, 0).map_err(|source| GoursatError::Eval { i: 0, j: 0, source })?;
            if (bottom - left).abs() > tol {
                return Err(GoursatError::CornerMismatch { which, bottom, left });
            }
        }
        Ok(())
    }
}

/// `F` and `G` with parameters bound and functions inlined.
#[derive(Clone, Debug)]
pub(crate) struct Rhs {
    f: Expr,
    g: Expr,
    fns: FnTable,
}

/// Fail on a parameter that is still symbolic after preparation.
pub(crate) fn require_bound(exprs: &[&Expr]) -> Result<(), GoursatError> {
    for e in exprs {
        if let Some(Sym::Param(p)) = e.symbols().into_iter().find(|s| matches!(s, Sym::Param(_))) {
            return Err(GoursatError::FreeParameter(p.to_string()));
        }
    }
    Ok(())
}

impl Rhs {
    pub(crate) fn new(sys: &SystemSpec, tol: &Tolerances) -> Result<Rhs, GoursatError> {
        let ctx = sys.context(tol)?;
        let (f, g) = (ctx.prepare(&sys.f), ctx.prepare(&sys.g));
        require_bound(&[&f, &g])?;
        Ok(Rhs { f, g, fns: ctx.fns })
    }

    pub(crate) fn eval(&self, s: [f64; 4]) -> Result<[f64; 2], EvalError> {
        let p = Point { vars: s, ..Point::default() };
        Ok([self.f.eval(&p, &self.fns)?, self.g.eval(&p, &self.fns)?])
    }
}

/// Node values of `u, v, u_x, v_x` on an `nx` by `nt` grid, stored row by
/// row in `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionGrid {
    pub label: String,
    pub nx: usize,
    pub nt: usize,
    pub hx: f64,
    pub ht: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub ux: Vec<f64>,
    pub vx: Vec<f64>,
}

impl SolutionGrid {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.ht
    }

    /// `[u, ux, v, vx]` at node `(i, j)`.
    pub fn state(&self, i: usize, j: usize) -> [f64; 4] {
        let k = self.idx(i, j);
        [self.u[k], self.ux[k], self.v[k], self.vx[k]]
    }

    /// Interior nodes, boundary ring excluded.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.nt - 1).flat_map(move |j| (1..self.nx - 1).map(move |i| (i, j)))
    }

    /// `x,t,u,v,ux,vx,K`; `K` is left empty where it was not computed.
    pub fn to_csv(&self, k: Option<&CurvatureField>) -> String {
        let mut out = String::from("x,t,u,v,ux,vx,K\n");
        for j in 0..self.nt {
            for i in 0..self.nx {
                let n = self.idx(i, j);
                let kv = k.and_then(|f| f.k[n]).map(|x| x.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    self.x(i),
                    self.t(j),
                    self.u[n],
                    self.v[n],
                    self.ux[n],
                    self.vx[n],
                    kv
                );
            }
        }
        out
    }
}

struct Solver<'a> {
    rhs: &'a Rhs,
    tol: &'a Tolerances,
}

impl Solver<'_> {
    fn rhs(&self, s: [f64; 4], i: usize, j: usize) -> Result<[f64; 2], GoursatError> {
        let fg = self.rhs.eval(s).map_err(|source| GoursatError::Eval { i, j, source })?;
        self.guard(&fg, i, j)?;
        Ok(fg)
    }

    fn guard(&self, vals: &[f64], i: usize, j: usize) -> Result<(), GoursatError> {
        let cap = self.tol.blowup;
        match vals.iter().find(|x| !x.is_finite() || x.abs() > cap) {
            Some(&value) => Err(GoursatError::Blowup { i, j, value, cap }),
            None => Ok(()),
        }
    }

    /// Fixed point `s = step(F(s))` from the predictor `s0`; returns the
    /// state and its right-hand side.
    fn settle(
        &self,
        mut s: [f64; 4],
        step: impl Fn([f64; 2]) -> [f64; 4],
        i: usize,
        j: usize,
    ) -> Result<([f64; 4], [f64; 2]), GoursatError> {
        self.guard(&s, i, j)?;
        let mut change = 0.0;
        for _ in 0..self.tol.sweeps {
            let next = step(self.rhs(s, i, j)?);
            self.guard(&next, i, j)?;
            change = next
                .iter()
                .zip(&s)
                .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
                .fold(0.0, f64::max);
            s = next;
        }
        if change > self.tol.sweep_change {
            return Err(GoursatError::NonConvergence { i, j, change });
        }
        Ok((s, self.rhs(s, i, j)?))
    }
}

/// Second-order characteristic-rectangle scheme. Each cell advances `u`, `v`
/// by the trapezoidal rule on `u_xt = F` over the cell and `u_x`, `v_x` by
/// the trapezoidal rule on `(u_x)_t = F` along the new column; the unknown
/// corner value of `F, G` is settled by fixed-point sweeps.
pub fn solve(
    sys: &SystemSpec,
    data: &GoursatData,
    nx: usize,
    nt: usize,
    tol: &Tolerances,
) -> Result<SolutionGrid, GoursatError> {
    if nx < 3 || nt < 3 {
        return Err(GoursatError::TooSmall(nx, nt));
    }
    data.check_corner(tol.corner)?;
    let rhs = Rhs::new(sys, tol)?;
    let solver = Solver { rhs: &rhs, tol };
    let hx = data.x_len / (nx - 1) as f64;
    let ht = data.t_len / (nt - 1) as f64;
    let n = nx * nt;
    let mut st = vec![[0.0; 4]; n];
    let mut fg = vec![[0.0; 2]; n];
    let at = |i: usize, j: usize| j * nx + i;
    let edge = |k: usize, s: f64, order: u32, i: usize, j: usize| {
        data.value(k, s, order).map_err(|source| GoursatError::Eval { i, j, source })
    };

    for i in 0..nx {
        let x = i as f64 * hx;
        let s = [edge(0, x, 0, i, 0)?, edge(0, x, 1, i, 0)?, edge(1, x, 0, i, 0)?, edge(1, x, 1, i, 0)?];
        solver.guard(&s, i, 0)?;
        st[at(i, 0)] = s;
        fg[at(i, 0)] = solver.rhs(s, i, 0)?;
    }

    for j in 1..nt {
        let t = j as f64 * ht;
        let (u, v) = (edge(2, t, 0, 0, j)?, edge(3, t, 0, 0, j)?);
        let (p, f0) = (st[at(0, j - 1)], fg[at(0, j - 1)]);
        let guess = [u, p[1] + ht * f0[0], v, p[3] + ht * f0[1]];
        let step = |f1: [f64; 2]| [u, p[1] + 0.5 * ht * (f0[0] + f1[0]), v, p[3] + 0.5 * ht * (f0[1] + f1[1])];
        let (s, r) = solver.settle(guess, step, 0, j)?;
        st[at(0, j)] = s;
        fg[at(0, j)] = r;

        for i in 1..nx {
            let (s00, s10, s01) = (st[at(i - 1, j - 1)], st[at(i, j - 1)], st[at(i - 1, j)]);
            let (f00, f10, f01) = (fg[at(i - 1, j - 1)], fg[at(i, j - 1)], fg[at(i - 1, j)]);
            let cell = 0.25 * hx * ht;
            let step = |f11: [f64; 2]| {
                [
                    s10[0] + s01[0] - s00[0] + cell * (f00[0] + f10[0] + f01[0] + f11[0]),
                    s10[1] + 0.5 * ht * (f10[0] + f11[0]),
                    s10[2] + s01[2] - s00[2] + cell * (f00[1] + f10[1] + f01[1] + f11[1]),
                    s10[3] + 0.5 * ht * (f10[1] + f11[1]),
                ]
            };
            let predicted = [f10[0] + f01[0] - f00[0], f10[1] + f01[1] - f00[1]];
            let (s, r) = solver.settle(step(predicted), step, i, j)?;
            st[at(i, j)] = s;
            fg[at(i, j)] = r;
        }
    }

    Ok(SolutionGrid {
        label: sys.label.clone(),
        nx,
        nt,
        hx,
        ht,
        u: st.iter().map(|s| s[0]).collect(),
        ux: st.iter().map(|s| s[1]).collect(),
        v: st.iter().map(|s| s[2]).collect(),
        vx: st.iter().map(|s| s[3]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Delta;

    fn zero_system() -> SystemSpec {
        SystemSpec::parse("zero", Delta::Pss, "0", "0").unwrap()
    }

    #[test]
    fn separable_data_are_reproduced_exactly() {
        let data = GoursatData::parse(["x", "0", "0", "t"]).unwrap();
        let g = solve(&zero_system(), &data, 17, 17, &Tolerances::default()).unwrap();
        for j in 0..g.nt {
            for i in 0..g.nx {
                let [u, ux, v, vx] = g.state(i, j);
                assert!((u - g.x(i)).abs() < 1e-14);
                assert!((v - g.t(j)).abs() < 1e-14);
                assert_eq!((ux, vx), (1.0, 0.0));
            }
        }
    }

    #[test]
    fn separable_nonlinear_data_are_reproduced() {
        let data = GoursatData::parse(["sin(x)", "x^2", "sin(0) + exp(t) - 1", "t^3"]).unwrap();
        let g = solve(&zero_system(), &data, 21, 21, &Tolerances::default()).unwrap();
        for (i, j) in [(0, 0), (7, 3), (20, 20), (5, 19)] {
            let (x, t) = (g.x(i), g.t(j));
            let [u, ux, v, vx] = g.state(i, j);
            assert!((u - (x.sin() + t.exp() - 1.0)).abs() < 1e-13);
            assert!((ux - x.cos()).abs() < 1e-13);
            assert!((v - (x * x + t.powi(3))).abs() < 1e-13);
            assert!((vx - 2.0 * x).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_equation_matches_closed_form() {
        // u_xt = u has the solution exp(x + t) for data exp(x), exp(t)
        let sys = SystemSpec::parse("lin", Delta::Pss, "u", "0").unwrap();
        let data = GoursatData::parse(["exp(x)", "0", "exp(t)", "0"]).unwrap();
        let tol = Tolerances::default();
        let err = |n: usize| {
            let g = solve(&sys, &data, n, n, &tol).unwrap();
            let k = g.idx(n - 1, n - 1);
            (g.u[k] - 2f64.exp()).abs().max((g.ux[k] - 2f64.exp()).abs())
        };
        let (e1, e2) = (err(17), err(33));
        let order = (e1 / e2).log2();
        assert!(order > 1.8 && order < 2.3, "{e1} {e2} {order}");
    }

    #[test]
    fn corner_mismatch_is_rejected() {
        let data = GoursatData::parse(["1 + x", "0", "t", "0"]).unwrap();
        let r = solve(&zero_system(), &data, 5, 5, &Tolerances::default());
        assert!(matches!(r, Err(GoursatError::CornerMismatch { which: "u", .. })));
    }

    #[test]
    fn blowup_is_reported_with_its_node() {
        let sys = SystemSpec::parse("blow", Delta::Pss, "ux^3", "0").unwrap();
        let data = GoursatData::parse(["5*x", "0", "0", "0"]).unwrap();
        let r = solve(&sys, &data, 33, 33, &Tolerances::default());
        assert!(matches!(r, Err(GoursatError::Blowup { .. }) | Err(GoursatError::NonConvergence { .. })), "{r:?}");
    }

    #[test]
    fn unbound_parameter_is_rejected() {
        let sys = SystemSpec::parse("free", Delta::Pss, "k*u", "0").unwrap();
        let data = GoursatData::parse(["x", "0", "0", "t"]).unwrap();
        let r = solve(&sys, &data, 5, 5, &Tolerances::default());
        assert!(matches!(r, Err(GoursatError::FreeParameter(p)) if p == "k"));
    }

    #[test]
    fn generated_data_share_the_corner() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            GoursatData::generated(&mut rng).check_corner(1e-12).unwrap();
        }
    }
}
